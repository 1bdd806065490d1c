#pragma once

#include <string>

namespace relex {

enum class AttentionVariant { None, Standard, DepWeighted, SoftmaxNorm };
enum class CombineMode { Concat, MaxPool };

AttentionVariant attention_variant_from_string(const std::string& s);
std::string to_string(AttentionVariant v);
CombineMode combine_mode_from_string(const std::string& s);
std::string to_string(CombineMode m);

struct HyperParams {
  int d_w = 50;  // word embedding dim
  int d_z = 10;  // entity indicator embedding dim
  int d_u = 5;   // positional embedding dim
  int f_g = 230; // global convolution filters
  int f_e = 230; // entity convolution filters
  int k = 3;     // convolution filter width
  int ws = 5;    // dependency distance window
  int m = 1;     // attention factor count; 0 routes to the no-attention baseline
  double dropout = 0.5;
  int max_pos = 50;        // positional buckets each side
  int context_window = 5;  // entity context tokens each side
  int num_labels = 0;      // |R| + 1, filled from the vocabulary

  AttentionVariant attention_variant = AttentionVariant::DepWeighted;
  CombineMode combine_mode = CombineMode::Concat;
  bool softmax_distance_factor = true;  // softmax_norm keeps the distance factor
  bool separate_entity_banks = false;   // per-entity convolution banks
  bool l0_literal_weight = false;       // dep_weight(0) uses the out-of-window branch

  int lstm_hidden() const { return d_w + d_z; }
  int bilstm_out() const { return 2 * (d_w + d_z); }
  int x_width() const { return d_w + d_z; }
  int q_width() const { return bilstm_out() + 2 * d_u; }

  bool uses_attention() const { return attention_variant != AttentionVariant::None && m >= 1; }
  int v_ma_width() const;
  int classifier_input_width() const;

  void validate() const;

  std::string to_json_string() const;
  static HyperParams from_json_string(const std::string& text);
};

}  // namespace relex
