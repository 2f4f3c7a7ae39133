#include <doctest.h>

#include <cmath>

#include "unfold/channel.hpp"
#include "unfold/kernels.hpp"
#include "unfold/linalg.hpp"
#include "test_oracles.hpp"

using namespace unfold;

TEST_CASE("snr_to_sigma2 mapping") {
    CHECK(snr_to_sigma2(0.0, 20) == doctest::Approx(20.0));
    CHECK(snr_to_sigma2(10.0, 1) == doctest::Approx(0.1));
    CHECK(snr_to_sigma2(13.0103, 20) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("noiseless samples satisfy y == H x exactly") {
    Rng rng(3);
    // +inf dB drives sigma^2 to zero
    const auto batch = generate_batch(rng, 4, 3, 16,
                                      SnrRange::fixed(std::numeric_limits<double>::infinity()));
    for (const ChannelSample &s : batch) {
        CHECK(s.sigma2 == 0.0);
        const Vec hx = matvec(s.H, s.x);
        for (size_t i = 0; i < hx.size(); ++i) CHECK(s.y[i] == hx[i]);
    }
}

TEST_CASE("symbols are balanced BPSK") {
    Rng rng(11);
    const auto batch = generate_batch(rng, 3, 2, 1000, SnrRange::fixed(10.0));
    long long plus = 0, total = 0;
    for (const ChannelSample &s : batch) {
        for (double x : s.x) {
            CHECK((x == 1.0 || x == -1.0));
            plus += x == 1.0;
            ++total;
        }
    }
    const double frac = static_cast<double>(plus) / total;
    CHECK(std::abs(frac - 0.5) < 0.05);
}

TEST_CASE("same seed gives a bit-identical batch") {
    Rng a(31), b(31);
    const auto b1 = generate_batch(a, 4, 2, 50, {5.0, 12.0});
    const auto b2 = generate_batch(b, 4, 2, 50, {5.0, 12.0});
    for (size_t i = 0; i < b1.size(); ++i) {
        CHECK(b1[i].H.data == b2[i].H.data);
        CHECK(b1[i].x == b2[i].x);
        CHECK(b1[i].y == b2[i].y);
        CHECK(b1[i].sigma2 == b2[i].sigma2);
    }
}

TEST_CASE("N < K is a configuration error") {
    Rng rng(1);
    CHECK_THROWS_AS(generate_batch(rng, 2, 3, 4, SnrRange::fixed(10.0)), ConfigError);
}

TEST_CASE("channel entries have the right moments") {
    Rng rng(17);
    const auto batch = generate_batch(rng, 10, 10, 1000, SnrRange::fixed(10.0));
    double sum = 0, sq = 0;
    long long n = 0;
    for (const ChannelSample &s : batch)
        for (double h : s.H.data) {
            sum += h;
            sq += h * h;
            ++n;
        }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / static_cast<double>(n)));
}

TEST_CASE("zf_decode on the identity channel returns y") {
    const Vec xt = zf_decode(Matrix::identity(2), Vec{0.3, -0.7});
    CHECK(xt[0] == doctest::Approx(0.3));
    CHECK(xt[1] == doctest::Approx(-0.7));
}

TEST_CASE("zf_decode inverts a noiseless channel") {
    Rng rng(5);
    const auto batch = generate_batch(rng, 5, 3, 20,
                                      SnrRange::fixed(std::numeric_limits<double>::infinity()));
    for (const ChannelSample &s : batch) {
        const Vec xt = zf_decode(s.H, s.y);
        for (size_t i = 0; i < xt.size(); ++i)
            CHECK(xt[i] == doctest::Approx(s.x[i]).epsilon(1e-8));
    }
}

TEST_CASE("zf_decode matches an independent QR least-squares oracle") {
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        Matrix H(3, 2);
        for (double &v : H.data) v = rng.next_gaussian();
        Vec y(3);
        for (double &v : y) v = rng.next_gaussian();
        const Vec mine = zf_decode(H, y);
        const Vec oracle = oracles::qr_least_squares(H, y);
        for (size_t i = 0; i < mine.size(); ++i)
            CHECK(mine[i] == doctest::Approx(oracle[i]).epsilon(1e-8));
    }
}

TEST_CASE("ml_decode recovers noiseless transmissions and breaks ties low") {
    Rng rng(13);
    const auto batch = generate_batch(rng, 4, 3, 20,
                                      SnrRange::fixed(std::numeric_limits<double>::infinity()));
    for (const ChannelSample &s : batch) CHECK(ml_decode(s.H, s.y) == s.x);

    CHECK(ml_decode(Matrix::identity(2), Vec{0.9, -0.1}) == Vec{1.0, -1.0});
    // (0, 0) is equidistant from all four candidates; lexicographic tie rule
    CHECK(ml_decode(Matrix::identity(2), Vec{0.0, 0.0}) == Vec{-1.0, -1.0});
}

TEST_CASE("ml_decode refuses K > 16") {
    Matrix H(20, 17);
    for (double &v : H.data) v = 1.0;
    CHECK_THROWS_AS(ml_decode(H, Vec(20, 0.0)), CapacityError);
}

TEST_CASE("ber counts mismatches") {
    const std::vector<Vec> truths{{1.0, -1.0}, {1.0, 1.0}};
    CHECK(ber(truths, truths) == 0.0);
    std::vector<Vec> flipped = truths;
    for (Vec &v : flipped)
        for (double &x : v) x = -x;
    CHECK(ber(flipped, truths) == 1.0);
    CHECK_THROWS_AS(ber(truths, {{1.0, -1.0}}), ContractError);
    CHECK_THROWS_AS(ber({{1.0}, {1.0}}, truths), ContractError);
}

TEST_CASE("ber of independent uniform guesses is one half") {
    Rng rng(21);
    std::vector<Vec> a, b;
    for (int i = 0; i < 1000; ++i) {
        Vec va(100), vb(100);
        for (int j = 0; j < 100; ++j) {
            va[j] = rng.next_bit() ? 1.0 : -1.0;
            vb[j] = rng.next_bit() ? 1.0 : -1.0;
        }
        a.push_back(std::move(va));
        b.push_back(std::move(vb));
    }
    CHECK(ber(a, b) == doctest::Approx(0.5).epsilon(0.01));
    CHECK(ber(a, b) == ber(b, a)); // symmetry

    // invariant under a consistent permutation of sample order
    std::vector<Vec> ap(a.rbegin(), a.rend()), bp(b.rbegin(), b.rend());
    CHECK(ber(ap, bp) == ber(a, b));
}

TEST_CASE("ML is no worse than ZF-then-sign on a common set") {
    Rng rng(55);
    for (double snr_db : {4.0, 10.0}) {
        const auto batch = generate_batch(rng, 6, 4, 3000, SnrRange::fixed(snr_db));
        const auto [zf_err, symbols] = batch_baseline_errors(batch, BaselineKind::zf);
        const auto [ml_err, symbols2] = batch_baseline_errors(batch, BaselineKind::ml);
        CHECK(symbols == symbols2);
        CHECK(symbols >= 10000);
        // allow one standard error of slack
        const double p = static_cast<double>(zf_err) / symbols;
        const double se = std::sqrt(p * (1 - p) * symbols);
        CHECK(static_cast<double>(ml_err) <= zf_err + se);
    }
}
