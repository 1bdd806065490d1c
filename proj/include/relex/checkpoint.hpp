#pragma once

#include <string>

#include "relex/corpus_types.hpp"
#include "relex/hyperparams.hpp"
#include "relex/network.hpp"

namespace relex {

struct Checkpoint {
  ModelParams params;
  HyperParams hyper;
  Vocab vocab;
  double threshold = 0.0;
};

// Single-file format: magic + version, a JSON header carrying hyper
// parameters, vocabulary and tuned threshold, then one block per named
// parameter (name, shape, little-endian fp64 payload). Round-trips are
// bit-exact.
void save_checkpoint(const ModelParams& params, const HyperParams& hyper, const Vocab& vocab,
                     double threshold, const std::string& path);

// Rejects unknown magic, truncation, and name/shape mismatches. When
// `expected` is given, its architecture dimensions must agree with the
// stored header.
Checkpoint load_checkpoint(const std::string& path, const HyperParams* expected = nullptr);

}  // namespace relex
