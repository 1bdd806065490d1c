#include "relex/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace relex {

namespace {

const std::map<std::string, std::string>& defaults() {
  static const std::map<std::string, std::string> table = {
      // paths
      {"train_path", ""},
      {"dev_path", ""},
      {"test_path", ""},
      {"embeddings_path", ""},
      {"checkpoint_path", "model.ckpt"},
      {"history_path", ""},  // derived from checkpoint_path when empty
      {"out_dir", "."},
      {"input_path", ""},
      {"output_path", ""},
      {"out_path", "synth.jsonl"},
      // model dimensions and variants
      {"d_w", "50"},
      {"d_z", "10"},
      {"d_u", "5"},
      {"f_g", "230"},
      {"f_e", "230"},
      {"k", "3"},
      {"ws", "5"},
      {"m", "1"},
      {"dropout", "0.5"},
      {"max_pos", "50"},
      {"context_window", "5"},
      {"attention_variant", "dep_weighted"},
      {"combine_mode", "concat"},
      {"softmax_distance_factor", "true"},
      {"separate_entity_banks", "false"},
      {"l0_literal_weight", "false"},
      // corpus
      {"min_count", "1"},
      {"lenient", "false"},
      // training
      {"batch_size", "50"},
      {"max_epochs", "100"},
      {"patience", "5"},
      {"lr", "0.01"},
      {"eps", "1e-8"},
      {"max_grad_norm", "0"},
      {"seed", "13"},
      // evaluation
      {"threshold", ""},  // empty = use the checkpoint's stored threshold
      {"workers", "1"},
      {"length_bucket_edges", "20,40"},
      {"distance_bucket_edges", "5,10"},
      // synth
      {"size", "100"},
      {"dev_size", "0"},
      {"dev_out", ""},
      {"test_size", "0"},
      {"test_out", ""},
      // gradient check
      {"gradcheck_eps", "1e-5"},
      {"gradcheck_samples", "6"},
      {"gradcheck_tol", "1e-4"},
  };
  return table;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

RunConfig::RunConfig() : values_(defaults()) {}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                               ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      cfg.set(key, value);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ": line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("unknown configuration key: " + key);
  it->second = value;
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("unknown configuration key: " + key);
  return it->second;
}

int RunConfig::get_int(const std::string& key) const {
  try {
    std::size_t used = 0;
    const int v = std::stoi(get(key), &used);
    if (used != get(key).size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("configuration key " + key + " is not an integer: '" + get(key) +
                                "'");
  }
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  try {
    return std::stoull(get(key));
  } catch (const std::exception&) {
    throw std::invalid_argument("configuration key " + key + " is not an integer: '" + get(key) +
                                "'");
  }
}

double RunConfig::get_double(const std::string& key) const {
  try {
    return std::stod(get(key));
  } catch (const std::exception&) {
    throw std::invalid_argument("configuration key " + key + " is not a number: '" + get(key) +
                                "'");
  }
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("configuration key " + key + " is not a boolean: '" + v + "'");
}

HyperParams RunConfig::hyper() const {
  HyperParams h;
  h.d_w = get_int("d_w");
  h.d_z = get_int("d_z");
  h.d_u = get_int("d_u");
  h.f_g = get_int("f_g");
  h.f_e = get_int("f_e");
  h.k = get_int("k");
  h.ws = get_int("ws");
  h.m = get_int("m");
  h.dropout = get_double("dropout");
  h.max_pos = get_int("max_pos");
  h.context_window = get_int("context_window");
  h.attention_variant = attention_variant_from_string(get("attention_variant"));
  h.combine_mode = combine_mode_from_string(get("combine_mode"));
  h.softmax_distance_factor = get_bool("softmax_distance_factor");
  h.separate_entity_banks = get_bool("separate_entity_banks");
  h.l0_literal_weight = get_bool("l0_literal_weight");
  h.validate();
  return h;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.batch_size = get_int("batch_size");
  t.max_epochs = get_int("max_epochs");
  t.patience = get_int("patience");
  t.lr = get_double("lr");
  t.eps = get_double("eps");
  t.max_grad_norm = get_double("max_grad_norm");
  t.seed = get_u64("seed");
  t.checkpoint_path = get("checkpoint_path");
  if (t.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (t.patience < 1) throw std::invalid_argument("patience must be >= 1");
  return t;
}

std::vector<int> RunConfig::bucket_edges(const std::string& key) const {
  std::vector<int> edges;
  std::istringstream iss(get(key));
  std::string field;
  while (std::getline(iss, field, ',')) {
    field = trim(field);
    if (field.empty()) continue;
    edges.push_back(std::stoi(field));
  }
  if (edges.empty()) throw std::invalid_argument("configuration key " + key + " has no edges");
  return edges;
}

std::vector<std::string> RunConfig::echo_lines() const {
  std::vector<std::string> lines;
  for (const auto& [k, v] : values_) lines.push_back(k + " = " + v);
  return lines;
}

std::vector<std::pair<std::string, std::string>> RunConfig::echo_pairs() const {
  return {values_.begin(), values_.end()};
}

}  // namespace relex
