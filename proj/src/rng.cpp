#include "unfold/rng.hpp"

#include <cmath>
#include <numbers>

namespace unfold {

namespace {

constexpr uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

Rng::Rng(uint64_t seed, uint64_t stream_id)
    : state_(mix64(mix64(seed ^ 0x853c49e6748fea9bULL) + stream_id)) {}

uint64_t Rng::next_u64() { return mix64(state_ += kGamma); }

double Rng::next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_uniform();
}

bool Rng::next_bit() { return (next_u64() >> 63) != 0; }

double Rng::next_gaussian() {
    // 1 - u1 lies in (0, 1], keeping the log finite.
    double u1 = 1.0 - next_uniform();
    double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Rng Rng::stream(uint64_t stream_id) const {
    return Rng(raw_tag{}, mix64(state_ ^ mix64(stream_id + 0xda3e39cb94b95bdbULL)));
}

Rng Rng::split() { return Rng(raw_tag{}, mix64(next_u64())); }

Vec sample_gaussian(Rng &rng, size_t n, double mean, double stddev) {
    require(stddev >= 0.0, "sample_gaussian: stddev must be >= 0");
    Vec out(n, mean);
    if (stddev == 0.0) return out;
    for (size_t i = 0; i < n; ++i) out[i] = mean + stddev * rng.next_gaussian();
    return out;
}

} // namespace unfold
