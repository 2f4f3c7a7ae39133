#include "unfold/channel.hpp"

#include <cmath>

#include "unfold/linalg.hpp"

namespace unfold {

double snr_to_sigma2(double snr_db, int n_tx) {
    require(n_tx >= 1, "snr_to_sigma2: K must be >= 1");
    return n_tx * std::pow(10.0, -snr_db / 10.0);
}

ChannelSample make_sample(Rng &rng, int n_rx, int n_tx, SnrRange snr) {
    if (n_rx < n_tx || n_tx < 1)
        throw ConfigError("make_sample: need N >= K >= 1 for a full-rank channel");

    const double snr_db = snr.is_fixed() ? snr.lo_db : rng.next_uniform(snr.lo_db, snr.hi_db);
    ChannelSample s;
    s.sigma2 = snr_to_sigma2(snr_db, n_tx);

    s.H = Matrix(n_rx, n_tx);
    for (double &h : s.H.data) h = rng.next_gaussian();

    s.x.resize(n_tx);
    for (double &xi : s.x) xi = rng.next_bit() ? 1.0 : -1.0;

    s.y = matvec(s.H, s.x);
    const double sigma = std::sqrt(s.sigma2);
    for (double &yi : s.y) yi += sigma * rng.next_gaussian();
    return s;
}

Vec zf_decode(const Matrix &H, const Vec &y) {
    return solve_normal_equations(gram(H), matvec_transpose(H, y));
}

Vec ml_decode(const Matrix &H, const Vec &y) {
    require(H.rows == static_cast<int>(y.size()), "ml_decode: H.rows != y.len");
    const int k = H.cols;
    if (k > 16) throw CapacityError("ml_decode: exhaustive search limited to K <= 16");

    // Candidate m maps bit (k-1-j) to symbol j, so ascending m enumerates
    // candidates in lexicographic order with -1 < +1; keeping the first
    // strict minimum implements the tie rule.
    Vec best, cand(k);
    double best_metric = 0.0;
    const uint64_t total = uint64_t{1} << k;
    for (uint64_t m = 0; m < total; ++m) {
        for (int j = 0; j < k; ++j)
            cand[j] = ((m >> (k - 1 - j)) & 1) ? 1.0 : -1.0;
        double metric = 0.0;
        for (int i = 0; i < H.rows; ++i) {
            double r = y[i];
            const double *row = H.data.data() + static_cast<size_t>(i) * k;
            for (int j = 0; j < k; ++j) r -= row[j] * cand[j];
            metric += r * r;
        }
        if (m == 0 || metric < best_metric) {
            best_metric = metric;
            best = cand;
        }
    }
    return best;
}

Vec sign_slice(const Vec &v) {
    Vec out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = v[i] >= 0.0 ? 1.0 : -1.0;
    return out;
}

double ber(const std::vector<Vec> &decisions, const std::vector<Vec> &truths) {
    require(decisions.size() == truths.size(), "ber: list length mismatch");
    long long errors = 0, symbols = 0;
    for (size_t s = 0; s < decisions.size(); ++s) {
        require(decisions[s].size() == truths[s].size(), "ber: vector length mismatch");
        for (size_t i = 0; i < decisions[s].size(); ++i) {
            errors += decisions[s][i] != truths[s][i];
            ++symbols;
        }
    }
    require(symbols > 0, "ber: empty input");
    return static_cast<double>(errors) / static_cast<double>(symbols);
}

} // namespace unfold
