#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "relex/hyperparams.hpp"
#include "relex/trainer.hpp"

namespace relex {

// Flat key = value configuration with documented defaults. Unknown keys are
// rejected; the effective (defaults + file + overrides) map is echoed into
// every output artifact header.
class RunConfig {
 public:
  RunConfig();  // defaults only

  static RunConfig from_file(const std::string& path);

  void set(const std::string& key, const std::string& value);  // rejects unknown keys

  const std::string& get(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  bool empty(const std::string& key) const { return get(key).empty(); }

  HyperParams hyper() const;      // num_labels left unset
  TrainConfig train_config() const;
  std::vector<int> bucket_edges(const std::string& key) const;

  // sorted key = value lines for artifact headers
  std::vector<std::string> echo_lines() const;
  std::vector<std::pair<std::string, std::string>> echo_pairs() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace relex
