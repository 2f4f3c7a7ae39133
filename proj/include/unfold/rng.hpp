#pragma once

#include <cstdint>

#include "unfold/matrix.hpp"

namespace unfold {

// Counter-based generator (splitmix64 core). Same seed gives the same
// stream on every run and platform; streams with distinct ids are
// statistically independent. Single-owner: parallel code must hand each
// worker its own stream via stream()/split(), never share one instance.
class Rng {
  public:
    explicit Rng(uint64_t seed, uint64_t stream_id = 0);

    uint64_t next_u64();
    double next_uniform();                       // [0, 1)
    double next_uniform(double lo, double hi);   // [lo, hi)
    bool next_bit();
    double next_gaussian();                      // standard normal, Box-Muller

    // Independent stream keyed by id; does not advance this generator.
    Rng stream(uint64_t stream_id) const;
    // Child stream; advances this generator by one draw.
    Rng split();

    uint64_t state() const { return state_; }

  private:
    struct raw_tag {};
    Rng(raw_tag, uint64_t state) : state_(state) {}
    uint64_t state_;
};

// n i.i.d. draws from N(mean, stddev^2); stddev == 0 yields the constant
// mean without consuming randomness. Negative stddev is a contract error.
Vec sample_gaussian(Rng &rng, size_t n, double mean, double stddev);

} // namespace unfold
