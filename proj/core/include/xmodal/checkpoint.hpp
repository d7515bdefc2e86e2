#pragma once

#include <filesystem>

#include "xmodal/encoder.hpp"
#include "xmodal/optimizer.hpp"

namespace xmodal {

struct Checkpoint {
  EncoderParams params;  // carries the encoder spec
  TrainConfig config;    // the configuration that produced the parameters
};

// Versioned line-delimited text format: a JSON header (format version,
// encoder spec, train config, head size) followed by one line per parameter
// tensor (name, shape, full-precision values). Round-trips bit-exactly.
void save_checkpoint(const EncoderParams& params, const TrainConfig& config,
                     const std::filesystem::path& path);

// Throws DataError on version mismatch (naming both versions), truncation,
// or any shape inconsistency.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace xmodal
