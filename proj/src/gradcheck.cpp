#include "relex/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "relex/rng.hpp"

namespace relex::ad {

static double checked_eval(const std::function<double()>& f) {
  const double v = f();
  if (!std::isfinite(v))
    throw std::runtime_error("finite_difference_check: objective is not finite");
  return v;
}

FdiffReport finite_difference_check(const std::function<double()>& f,
                                    const std::vector<std::pair<std::string, Tensor>>& params,
                                    double eps, int max_coords_per_param, std::uint64_t seed) {
  if (eps <= 0.0) throw std::invalid_argument("finite_difference_check: eps must be positive");

  // one evaluation at the base point populates the analytic gradients
  for (const auto& [name, t] : params) t.zero_grad();
  checked_eval(f);
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const auto& [name, t] : params) analytic.push_back(t.grad());

  Rng rng(seed);
  FdiffReport report;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    const auto& [name, t] = params[pi];
    const std::size_t n = t.size();

    std::vector<std::size_t> coords;
    if (static_cast<int>(n) <= max_coords_per_param) {
      coords.resize(n);
      for (std::size_t i = 0; i < n; ++i) coords[i] = i;
    } else {
      std::vector<char> taken(n, 0);
      while (static_cast<int>(coords.size()) < max_coords_per_param) {
        std::size_t c = static_cast<std::size_t>(rng.below(n));
        if (!taken[c]) {
          taken[c] = 1;
          coords.push_back(c);
        }
      }
    }

    FdiffParam entry{name, 0.0, static_cast<int>(coords.size())};
    for (std::size_t c : coords) {
      double& slot = t.data()[c];
      const double saved = slot;
      slot = saved + eps;
      const double fp = checked_eval(f);
      slot = saved - eps;
      const double fm = checked_eval(f);
      slot = saved;

      const double fd = (fp - fm) / (2.0 * eps);
      const double an = analytic[pi][c];
      const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-8});
      entry.max_rel_err = std::max(entry.max_rel_err, rel);
    }
    if (entry.max_rel_err >= report.max_rel_err) {
      if (entry.max_rel_err > report.max_rel_err || report.worst_param.empty()) {
        report.max_rel_err = entry.max_rel_err;
        report.worst_param = name;
      }
    }
    report.params.push_back(std::move(entry));
  }
  return report;
}

}  // namespace relex::ad
