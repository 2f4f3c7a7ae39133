#pragma once

#include <string>

#include "unfold/model.hpp"

namespace unfold {

struct Checkpoint {
    ModelParams params;
    std::string label; // method label carried through the pipeline
};

// Versioned JSON container: dims, per-layer arrays, masks as 0/1 strings,
// frozen_prefix and the step counter. Doubles round-trip bit-exactly.
void save_checkpoint(const ModelParams &params, const std::string &label,
                     const std::string &path);
Checkpoint load_checkpoint(const std::string &path);

} // namespace unfold
