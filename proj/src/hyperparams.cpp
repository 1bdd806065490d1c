#include "relex/hyperparams.hpp"

#include <stdexcept>

#include <json.hpp>

namespace relex {

using nlohmann::json;

AttentionVariant attention_variant_from_string(const std::string& s) {
  if (s == "none") return AttentionVariant::None;
  if (s == "standard") return AttentionVariant::Standard;
  if (s == "dep_weighted") return AttentionVariant::DepWeighted;
  if (s == "softmax_norm") return AttentionVariant::SoftmaxNorm;
  throw std::invalid_argument("unknown attention_variant: " + s);
}

std::string to_string(AttentionVariant v) {
  switch (v) {
    case AttentionVariant::None: return "none";
    case AttentionVariant::Standard: return "standard";
    case AttentionVariant::DepWeighted: return "dep_weighted";
    case AttentionVariant::SoftmaxNorm: return "softmax_norm";
  }
  throw std::logic_error("bad attention variant");
}

CombineMode combine_mode_from_string(const std::string& s) {
  if (s == "concat") return CombineMode::Concat;
  if (s == "max_pool") return CombineMode::MaxPool;
  throw std::invalid_argument("unknown combine_mode: " + s);
}

std::string to_string(CombineMode m) {
  return m == CombineMode::Concat ? "concat" : "max_pool";
}

int HyperParams::v_ma_width() const {
  if (!uses_attention()) return 0;
  if (combine_mode == CombineMode::MaxPool) return 2 * bilstm_out();
  return 2 * m * bilstm_out();
}

int HyperParams::classifier_input_width() const { return f_g + 2 * f_e + v_ma_width(); }

void HyperParams::validate() const {
  auto positive = [](int v, const char* name) {
    if (v < 1) throw std::invalid_argument(std::string(name) + " must be positive, got " +
                                           std::to_string(v));
  };
  positive(d_w, "d_w");
  positive(d_z, "d_z");
  positive(d_u, "d_u");
  positive(f_g, "f_g");
  positive(f_e, "f_e");
  positive(k, "k");
  positive(ws, "ws");
  positive(max_pos, "max_pos");
  if (m < 0) throw std::invalid_argument("m must be >= 0");
  if (context_window < 0) throw std::invalid_argument("context_window must be >= 0");
  if (dropout < 0.0 || dropout >= 1.0)
    throw std::invalid_argument("dropout must lie in [0, 1), got " + std::to_string(dropout));
}

std::string HyperParams::to_json_string() const {
  json j;
  j["d_w"] = d_w;
  j["d_z"] = d_z;
  j["d_u"] = d_u;
  j["f_g"] = f_g;
  j["f_e"] = f_e;
  j["k"] = k;
  j["ws"] = ws;
  j["m"] = m;
  j["dropout"] = dropout;
  j["max_pos"] = max_pos;
  j["context_window"] = context_window;
  j["num_labels"] = num_labels;
  j["attention_variant"] = to_string(attention_variant);
  j["combine_mode"] = to_string(combine_mode);
  j["softmax_distance_factor"] = softmax_distance_factor;
  j["separate_entity_banks"] = separate_entity_banks;
  j["l0_literal_weight"] = l0_literal_weight;
  return j.dump();
}

HyperParams HyperParams::from_json_string(const std::string& text) {
  const json j = json::parse(text);
  HyperParams h;
  h.d_w = j.at("d_w").get<int>();
  h.d_z = j.at("d_z").get<int>();
  h.d_u = j.at("d_u").get<int>();
  h.f_g = j.at("f_g").get<int>();
  h.f_e = j.at("f_e").get<int>();
  h.k = j.at("k").get<int>();
  h.ws = j.at("ws").get<int>();
  h.m = j.at("m").get<int>();
  h.dropout = j.at("dropout").get<double>();
  h.max_pos = j.at("max_pos").get<int>();
  h.context_window = j.at("context_window").get<int>();
  h.num_labels = j.at("num_labels").get<int>();
  h.attention_variant = attention_variant_from_string(j.at("attention_variant").get<std::string>());
  h.combine_mode = combine_mode_from_string(j.at("combine_mode").get<std::string>());
  h.softmax_distance_factor = j.at("softmax_distance_factor").get<bool>();
  h.separate_entity_banks = j.at("separate_entity_banks").get<bool>();
  h.l0_literal_weight = j.at("l0_literal_weight").get<bool>();
  h.validate();
  return h;
}

}  // namespace relex
