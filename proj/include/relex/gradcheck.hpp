#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "relex/tensor.hpp"

namespace relex::ad {

struct FdiffParam {
  std::string name;
  double max_rel_err = 0.0;
  int coords_checked = 0;
};

struct FdiffReport {
  std::vector<FdiffParam> params;
  double max_rel_err = 0.0;
  std::string worst_param;

  bool within(double tol) const { return max_rel_err < tol; }
};

// Central-difference check of a tape gradient. f evaluates the objective at
// the current parameter values and, through its own backward pass, leaves
// d(objective)/d(theta) in each parameter's grad buffer. f must be
// deterministic. For parameters larger than max_coords_per_param a seeded
// random subset of coordinates is probed. Relative error denominator is
// max(|fd|, |grad|, 1e-8).
FdiffReport finite_difference_check(const std::function<double()>& f,
                                    const std::vector<std::pair<std::string, Tensor>>& params,
                                    double eps = 1e-5, int max_coords_per_param = 8,
                                    std::uint64_t seed = 12345);

}  // namespace relex::ad
