#pragma once

#include <string>
#include <vector>

#include "relex/config.hpp"
#include "relex/gradcheck.hpp"

namespace relex {

// exit codes: 0 success, 1 verification failure, 2 usage or I/O error
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerification = 1;
inline constexpr int kExitUsage = 2;

int cmd_train(const RunConfig& cfg);
int cmd_eval(const RunConfig& cfg);
int cmd_predict(const RunConfig& cfg);
int cmd_gradcheck(const RunConfig& cfg);
int cmd_synth(const RunConfig& cfg);

struct VariantCheck {
  std::string attention_variant;
  std::string combine_mode;
  ad::FdiffReport report;
};

// Finite-difference check of the full batch loss on one internally generated
// random instance, for every attention variant x combine mode pair.
std::vector<VariantCheck> run_model_gradcheck(const HyperParams& base, std::uint64_t seed,
                                              double eps, int samples);

}  // namespace relex
