#pragma once

#include <vector>

#include "unfold/matrix.hpp"
#include "unfold/rng.hpp"

namespace unfold {

// One realization of the linear model y = H x + n with BPSK symbols.
struct ChannelSample {
    Matrix H;      // n_rx x n_tx, i.i.d. N(0,1) entries
    Vec x;         // n_tx, entries in {-1,+1}
    Vec y;         // n_rx
    double sigma2; // per-component noise variance
};

struct SnrRange {
    double lo_db = 0.0;
    double hi_db = 0.0; // lo == hi means a fixed SNR

    static SnrRange fixed(double db) { return {db, db}; }
    bool is_fixed() const { return lo_db == hi_db; }
};

struct SnrGrid {
    double min_db = 0.0;
    double max_db = 15.0;
    int points = 16;

    double at(int i) const {
        return points == 1 ? min_db : min_db + (max_db - min_db) * i / (points - 1);
    }
};

// sigma^2 = K * 10^(-snr_db/10). With unit-variance H entries and unit-power
// symbols E||Hx||^2 = N*K and E||n||^2 = N*sigma^2, so receive SNR = K/sigma^2.
double snr_to_sigma2(double snr_db, int n_tx);

// Draw one sample; a non-degenerate range draws its SNR uniformly first.
ChannelSample make_sample(Rng &rng, int n_rx, int n_tx, SnrRange snr);

// Least-squares estimate (H^T H)^{-1} H^T y, before sign slicing.
Vec zf_decode(const Matrix &H, const Vec &y);

// Exhaustive argmin over {-1,+1}^K of ||y - H s||^2; ties resolve to the
// lexicographically smallest s with -1 < +1. Guarded at K <= 16.
Vec ml_decode(const Matrix &H, const Vec &y);

// Elementwise sign with sign(0) = +1.
Vec sign_slice(const Vec &v);

// Fraction of symbol positions where decision != truth.
double ber(const std::vector<Vec> &decisions, const std::vector<Vec> &truths);

} // namespace unfold
