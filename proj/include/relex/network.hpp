#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "relex/corpus_types.hpp"
#include "relex/hyperparams.hpp"
#include "relex/rng.hpp"
#include "relex/tape.hpp"

namespace relex {

// One direction of the LSTM encoder, per-gate weight matrices. Gate order in
// every init and checkpoint walk is i, f, g, o.
struct LstmDirParams {
  ad::Tensor W_xi, W_hi, b_i;
  ad::Tensor W_xf, W_hf, b_f;
  ad::Tensor W_xg, W_hg, b_g;
  ad::Tensor W_xo, W_ho, b_o;
};

// Every trainable weight, addressable by a unique name so gradients can be
// checked and checkpoints walked parameter by parameter.
struct ModelParams {
  ad::Tensor word_emb;  // V x d_w, row 0 (PAD) zero and frozen
  ad::Tensor ind_emb;   // 3 x d_z
  ad::Tensor pos1_emb;  // (2*max_pos+1) x d_u
  ad::Tensor pos2_emb;

  LstmDirParams lstm_fwd;
  LstmDirParams lstm_bwd;

  ad::Tensor conv_global_W, conv_global_b;  // k*q_width x f_g
  ad::Tensor conv_entity_W, conv_entity_b;  // k*x_width x f_e, shared by default
  ad::Tensor conv_entity2_W, conv_entity2_b;  // only with separate banks

  std::vector<std::array<ad::Tensor, 2>> attn;  // m factors x 2 entities, bilstm_out x f_e

  ad::Tensor classifier_W;  // classifier_input_width x num_labels
  ad::Tensor classifier_b;

  bool separate_entity_banks = false;

  // deterministic (name, tensor) walk covering every trainable tensor
  std::vector<std::pair<std::string, ad::Tensor>> named() const;
  void zero_grads() const;
  // PAD embedding row is frozen: its gradient is cleared before updates
  void clear_frozen_grads() const;
  ModelParams clone() const;
};

// Word table comes from `embeddings` when given, otherwise seeded uniform
// [-0.25, 0.25] like the other lookup tables. Weight matrices draw Glorot
// uniform bounds, biases start at zero except the LSTM forget gates at 1.
ModelParams init_params(const HyperParams& hyper, const Vocab& vocab, Rng& rng,
                        const EmbeddingTable* embeddings = nullptr);

// Shared state for one forward pass. rng is only consulted when training
// (dropout); eval-mode forwards are pure functions of (enc, params).
struct ForwardCtx {
  ad::Tape& tape;
  const ModelParams& params;
  const HyperParams& hyper;
  bool training = false;
  Rng* rng = nullptr;
};

// Bi-LSTM over w||z rows; returns n x 2(d_w+d_z), dropout applied when
// training.
ad::Tensor encode_sequence(ForwardCtx& ctx, const EncodedInstance& enc);

// Convolution + tanh + max-pool over h||u1||u2 rows, zero-padded on the
// right so every position starts a window.
ad::Tensor global_feature(ForwardCtx& ctx, const ad::Tensor& H, const EncodedInstance& enc);

// Convolution + tanh + max-pool over the w||z rows of one entity's context
// range.
ad::Tensor entity_vector(ForwardCtx& ctx, const EncodedInstance& enc, int which);

// s_i = h_i^T W_a v_e, returned as an n x 1 column.
ad::Tensor bilinear_scores(ad::Tape& tape, const ad::Tensor& H, const ad::Tensor& v_e,
                           const ad::Tensor& W_a);

// Normalized attention per the configured variant; masked positions are
// exactly zero. `keep` is ignored by the standard variant.
ad::Tensor attention_probs(ad::Tape& tape, const ad::Tensor& scores, const std::vector<int>& dist,
                           const std::vector<char>& keep, const HyperParams& hyper);

// v_a = sum_i p_i h_i
ad::Tensor attention_vector(ad::Tape& tape, const ad::Tensor& H, const ad::Tensor& probs);

// m factors x 2 entities of attention vectors, concatenated (or max-pooled
// across factors and renormalized, one vector per entity).
ad::Tensor multi_factor_features(ForwardCtx& ctx, const ad::Tensor& H, const EncodedInstance& enc,
                                 const ad::Tensor& v_e1, const ad::Tensor& v_e2);

// Full pipeline to a label distribution (rank-1, sums to 1).
ad::Tensor forward(ForwardCtx& ctx, const EncodedInstance& enc);

// Mean training-mode nll over the batch.
ad::Tensor nll_batch(ad::Tape& tape, const std::vector<EncodedInstance>& batch,
                     const ModelParams& params, const HyperParams& hyper, Rng& rng);

// Eval-mode convenience: fresh tape, no dropout, plain probability vector.
std::vector<double> predict_probs(const EncodedInstance& enc, const ModelParams& params,
                                  const HyperParams& hyper);

}  // namespace relex
