#include "relex/network.hpp"

#include <cmath>
#include <stdexcept>

#include "relex/deptree.hpp"

namespace relex {

using ad::Tensor;

// ------------------------------------------------------------ parameters

static Tensor glorot(Rng& rng, int rows, int cols) {
  const double bound = std::sqrt(6.0 / (rows + cols));
  Tensor t = Tensor::zeros({rows, cols}, true);
  for (double& v : t.data()) v = rng.uniform(-bound, bound);
  return t;
}

static Tensor embedding_table(Rng& rng, int rows, int cols) {
  Tensor t = Tensor::zeros({rows, cols}, true);
  for (double& v : t.data()) v = rng.uniform(-0.25, 0.25);
  return t;
}

static LstmDirParams init_lstm_dir(Rng& rng, int in, int hidden) {
  LstmDirParams p;
  auto gate = [&](Tensor& wx, Tensor& wh, Tensor& b, double bias_init) {
    wx = glorot(rng, in, hidden);
    wh = glorot(rng, hidden, hidden);
    b = Tensor::full({1, hidden}, bias_init, true);
  };
  gate(p.W_xi, p.W_hi, p.b_i, 0.0);
  gate(p.W_xf, p.W_hf, p.b_f, 1.0);  // forget gate opens at init
  gate(p.W_xg, p.W_hg, p.b_g, 0.0);
  gate(p.W_xo, p.W_ho, p.b_o, 0.0);
  return p;
}

ModelParams init_params(const HyperParams& hyper, const Vocab& vocab, Rng& rng,
                        const EmbeddingTable* embeddings) {
  hyper.validate();
  if (hyper.num_labels < 1)
    throw std::invalid_argument("init_params: num_labels not set");

  ModelParams p;
  p.separate_entity_banks = hyper.separate_entity_banks;

  const int v = vocab.num_tokens();
  if (embeddings) {
    if (embeddings->dim != hyper.d_w)
      throw std::invalid_argument("embedding dimension " + std::to_string(embeddings->dim) +
                                  " does not match d_w " + std::to_string(hyper.d_w));
    if (embeddings->vocab_size != v)
      throw std::invalid_argument("embedding table has " + std::to_string(embeddings->vocab_size) +
                                  " rows for a vocabulary of " + std::to_string(v));
    p.word_emb = Tensor::from_values({v, hyper.d_w}, embeddings->matrix, true);
  } else {
    p.word_emb = embedding_table(rng, v, hyper.d_w);
    std::fill_n(p.word_emb.data().begin(), hyper.d_w, 0.0);  // PAD row
  }
  p.ind_emb = embedding_table(rng, 3, hyper.d_z);
  p.pos1_emb = embedding_table(rng, 2 * hyper.max_pos + 1, hyper.d_u);
  p.pos2_emb = embedding_table(rng, 2 * hyper.max_pos + 1, hyper.d_u);

  const int h = hyper.lstm_hidden();
  p.lstm_fwd = init_lstm_dir(rng, hyper.x_width(), h);
  p.lstm_bwd = init_lstm_dir(rng, hyper.x_width(), h);

  p.conv_global_W = glorot(rng, hyper.k * hyper.q_width(), hyper.f_g);
  p.conv_global_b = Tensor::zeros({1, hyper.f_g}, true);
  p.conv_entity_W = glorot(rng, hyper.k * hyper.x_width(), hyper.f_e);
  p.conv_entity_b = Tensor::zeros({1, hyper.f_e}, true);
  if (hyper.separate_entity_banks) {
    p.conv_entity2_W = glorot(rng, hyper.k * hyper.x_width(), hyper.f_e);
    p.conv_entity2_b = Tensor::zeros({1, hyper.f_e}, true);
  }

  if (hyper.uses_attention()) {
    p.attn.resize(hyper.m);
    for (int f = 0; f < hyper.m; ++f)
      for (int e = 0; e < 2; ++e) p.attn[f][e] = glorot(rng, hyper.bilstm_out(), hyper.f_e);
  }

  p.classifier_W = glorot(rng, hyper.classifier_input_width(), hyper.num_labels);
  p.classifier_b = Tensor::zeros({1, hyper.num_labels}, true);
  return p;
}

static void walk_lstm(std::vector<std::pair<std::string, Tensor>>& out, const std::string& prefix,
                      const LstmDirParams& p) {
  out.emplace_back(prefix + ".W_xi", p.W_xi);
  out.emplace_back(prefix + ".W_hi", p.W_hi);
  out.emplace_back(prefix + ".b_i", p.b_i);
  out.emplace_back(prefix + ".W_xf", p.W_xf);
  out.emplace_back(prefix + ".W_hf", p.W_hf);
  out.emplace_back(prefix + ".b_f", p.b_f);
  out.emplace_back(prefix + ".W_xg", p.W_xg);
  out.emplace_back(prefix + ".W_hg", p.W_hg);
  out.emplace_back(prefix + ".b_g", p.b_g);
  out.emplace_back(prefix + ".W_xo", p.W_xo);
  out.emplace_back(prefix + ".W_ho", p.W_ho);
  out.emplace_back(prefix + ".b_o", p.b_o);
}

std::vector<std::pair<std::string, Tensor>> ModelParams::named() const {
  std::vector<std::pair<std::string, Tensor>> out;
  out.emplace_back("word_emb", word_emb);
  out.emplace_back("ind_emb", ind_emb);
  out.emplace_back("pos1_emb", pos1_emb);
  out.emplace_back("pos2_emb", pos2_emb);
  walk_lstm(out, "lstm_fwd", lstm_fwd);
  walk_lstm(out, "lstm_bwd", lstm_bwd);
  out.emplace_back("conv_global.W", conv_global_W);
  out.emplace_back("conv_global.b", conv_global_b);
  out.emplace_back("conv_entity.W", conv_entity_W);
  out.emplace_back("conv_entity.b", conv_entity_b);
  if (separate_entity_banks) {
    out.emplace_back("conv_entity2.W", conv_entity2_W);
    out.emplace_back("conv_entity2.b", conv_entity2_b);
  }
  for (std::size_t f = 0; f < attn.size(); ++f) {
    out.emplace_back("attn." + std::to_string(f) + ".e1", attn[f][0]);
    out.emplace_back("attn." + std::to_string(f) + ".e2", attn[f][1]);
  }
  out.emplace_back("classifier.W", classifier_W);
  out.emplace_back("classifier.b", classifier_b);
  return out;
}

void ModelParams::zero_grads() const {
  for (const auto& [name, t] : named()) t.zero_grad();
}

void ModelParams::clear_frozen_grads() const {
  if (!word_emb.has_grad()) return;
  const int d = word_emb.dim(1);
  std::fill_n(word_emb.grad().begin(), d, 0.0);
}

ModelParams ModelParams::clone() const {
  ModelParams c;
  c.separate_entity_banks = separate_entity_banks;
  auto cp = [](const Tensor& t) { return t.defined() ? t.clone() : Tensor(); };
  c.word_emb = cp(word_emb);
  c.ind_emb = cp(ind_emb);
  c.pos1_emb = cp(pos1_emb);
  c.pos2_emb = cp(pos2_emb);
  auto cl = [&cp](const LstmDirParams& p) {
    LstmDirParams o;
    o.W_xi = cp(p.W_xi); o.W_hi = cp(p.W_hi); o.b_i = cp(p.b_i);
    o.W_xf = cp(p.W_xf); o.W_hf = cp(p.W_hf); o.b_f = cp(p.b_f);
    o.W_xg = cp(p.W_xg); o.W_hg = cp(p.W_hg); o.b_g = cp(p.b_g);
    o.W_xo = cp(p.W_xo); o.W_ho = cp(p.W_ho); o.b_o = cp(p.b_o);
    return o;
  };
  c.lstm_fwd = cl(lstm_fwd);
  c.lstm_bwd = cl(lstm_bwd);
  c.conv_global_W = cp(conv_global_W);
  c.conv_global_b = cp(conv_global_b);
  c.conv_entity_W = cp(conv_entity_W);
  c.conv_entity_b = cp(conv_entity_b);
  c.conv_entity2_W = cp(conv_entity2_W);
  c.conv_entity2_b = cp(conv_entity2_b);
  c.attn.resize(attn.size());
  for (std::size_t f = 0; f < attn.size(); ++f) {
    c.attn[f][0] = cp(attn[f][0]);
    c.attn[f][1] = cp(attn[f][1]);
  }
  c.classifier_W = cp(classifier_W);
  c.classifier_b = cp(classifier_b);
  return c;
}

// --------------------------------------------------------------- forward

// row vector repeated n times, so bias gradients flow through the matmul
static Tensor broadcast_rows(ad::Tape& tape, const Tensor& row, int n) {
  return tape.matmul(Tensor::full({n, 1}, 1.0), row);
}

// {n, d} -> {n, k*d}; window i covers rows i..i+k-1 with zero rows past the
// end
static Tensor conv_windows(ad::Tape& tape, const Tensor& X, int k) {
  const int n = X.dim(0), d = X.dim(1);
  Tensor padded = k > 1 ? tape.concat({X, Tensor::zeros({k - 1, d})}, 0) : X;
  std::vector<int> ids;
  ids.reserve(static_cast<std::size_t>(n) * k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) ids.push_back(i + j);
  return tape.reshape(tape.gather_rows(padded, ids), {n, k * d});
}

static Tensor conv_tanh_maxpool(ad::Tape& tape, const Tensor& X, int k, const Tensor& W,
                                const Tensor& b) {
  const int n = X.dim(0);
  Tensor windows = conv_windows(tape, X, k);
  Tensor scores = tape.add(tape.matmul(windows, W), broadcast_rows(tape, b, n));
  Tensor act = tape.tanh(scores);
  Tensor pooled = tape.reduce_max(act).values;
  return tape.reshape(pooled, {1, static_cast<int>(pooled.size())});
}

// w||z rows for a token range
static Tensor gather_x(ForwardCtx& ctx, const EncodedInstance& enc, int from, int to) {
  std::vector<int> wids(enc.word_ids.begin() + from, enc.word_ids.begin() + to + 1);
  std::vector<int> iids(enc.indicator_ids.begin() + from, enc.indicator_ids.begin() + to + 1);
  Tensor w = ctx.tape.gather_rows(ctx.params.word_emb, wids);
  Tensor z = ctx.tape.gather_rows(ctx.params.ind_emb, iids);
  return ctx.tape.concat({w, z}, 1);
}

static Tensor run_lstm(ad::Tape& tape, const Tensor& X, const LstmDirParams& p, int hidden,
                       bool reverse) {
  const int n = X.dim(0);
  const Tensor xi = tape.matmul(X, p.W_xi);
  const Tensor xf = tape.matmul(X, p.W_xf);
  const Tensor xg = tape.matmul(X, p.W_xg);
  const Tensor xo = tape.matmul(X, p.W_xo);

  Tensor h = Tensor::zeros({1, hidden});
  Tensor c = Tensor::zeros({1, hidden});
  std::vector<Tensor> outputs(n);
  for (int s = 0; s < n; ++s) {
    const int t = reverse ? n - 1 - s : s;
    const std::vector<int> row{t};
    Tensor gi = tape.sigmoid(
        tape.add(tape.add(tape.gather_rows(xi, row), tape.matmul(h, p.W_hi)), p.b_i));
    Tensor gf = tape.sigmoid(
        tape.add(tape.add(tape.gather_rows(xf, row), tape.matmul(h, p.W_hf)), p.b_f));
    Tensor gg = tape.tanh(
        tape.add(tape.add(tape.gather_rows(xg, row), tape.matmul(h, p.W_hg)), p.b_g));
    Tensor go = tape.sigmoid(
        tape.add(tape.add(tape.gather_rows(xo, row), tape.matmul(h, p.W_ho)), p.b_o));
    c = tape.add(tape.mul(gf, c), tape.mul(gi, gg));
    h = tape.mul(go, tape.tanh(c));
    outputs[t] = h;
  }
  return tape.concat(outputs, 0);
}

ad::Tensor encode_sequence(ForwardCtx& ctx, const EncodedInstance& enc) {
  if (enc.n() < 1) throw std::invalid_argument("encode_sequence: empty instance");
  Tensor X = gather_x(ctx, enc, 0, enc.n() - 1);
  const int h = ctx.hyper.lstm_hidden();
  Tensor hf = run_lstm(ctx.tape, X, ctx.params.lstm_fwd, h, false);
  Tensor hb = run_lstm(ctx.tape, X, ctx.params.lstm_bwd, h, true);
  Tensor H = ctx.tape.concat({hf, hb}, 1);
  if (ctx.training)
    H = ctx.tape.apply_dropout(H, ctx.hyper.dropout, *ctx.rng, true);
  return H;
}

ad::Tensor global_feature(ForwardCtx& ctx, const ad::Tensor& H, const EncodedInstance& enc) {
  if (H.dim(0) != enc.n())
    throw std::invalid_argument("global_feature: H rows " + std::to_string(H.dim(0)) +
                                " disagree with " + std::to_string(enc.n()) + " positional ids");
  Tensor u1 = ctx.tape.gather_rows(ctx.params.pos1_emb, enc.pos1_ids);
  Tensor u2 = ctx.tape.gather_rows(ctx.params.pos2_emb, enc.pos2_ids);
  Tensor Q = ctx.tape.concat({H, u1, u2}, 1);
  return conv_tanh_maxpool(ctx.tape, Q, ctx.hyper.k, ctx.params.conv_global_W,
                           ctx.params.conv_global_b);
}

ad::Tensor entity_vector(ForwardCtx& ctx, const EncodedInstance& enc, int which) {
  if (which != 1 && which != 2)
    throw std::invalid_argument("entity_vector: which must be 1 or 2");
  const Span ctx_span = which == 1 ? enc.ent1_ctx : enc.ent2_ctx;
  if (ctx_span.start > ctx_span.end)
    throw std::invalid_argument("entity_vector: empty context range");
  Tensor X = gather_x(ctx, enc, ctx_span.start, ctx_span.end);
  const bool second_bank = which == 2 && ctx.params.separate_entity_banks;
  const Tensor& W = second_bank ? ctx.params.conv_entity2_W : ctx.params.conv_entity_W;
  const Tensor& b = second_bank ? ctx.params.conv_entity2_b : ctx.params.conv_entity_b;
  return conv_tanh_maxpool(ctx.tape, X, ctx.hyper.k, W, b);
}

ad::Tensor bilinear_scores(ad::Tape& tape, const ad::Tensor& H, const ad::Tensor& v_e,
                           const ad::Tensor& W_a) {
  if (H.dim(1) != W_a.dim(0) || W_a.dim(1) != static_cast<int>(v_e.size()))
    throw std::invalid_argument("bilinear_scores: shapes disagree " + ad::shape_str(H.shape()) +
                                " x " + ad::shape_str(W_a.shape()) + " x " +
                                ad::shape_str(v_e.shape()));
  Tensor hw = tape.matmul(H, W_a);
  return tape.matmul(hw, tape.reshape(v_e, {static_cast<int>(v_e.size()), 1}));
}

ad::Tensor attention_probs(ad::Tape& tape, const ad::Tensor& scores, const std::vector<int>& dist,
                           const std::vector<char>& keep, const HyperParams& hyper) {
  const std::size_t n = scores.size();
  if (dist.size() != n)
    throw std::invalid_argument("attention_probs: " + std::to_string(n) + " scores but " +
                                std::to_string(dist.size()) + " distances");

  std::vector<double> weights(n, 1.0);
  std::vector<char> kept(n, 1);
  switch (hyper.attention_variant) {
    case AttentionVariant::Standard:
      break;  // uniform weights, no mask
    case AttentionVariant::DepWeighted:
      for (std::size_t i = 0; i < n; ++i)
        weights[i] = dep_weight(dist[i], hyper.ws, hyper.l0_literal_weight);
      kept = keep;
      break;
    case AttentionVariant::SoftmaxNorm:
      if (hyper.softmax_distance_factor)
        for (std::size_t i = 0; i < n; ++i)
          weights[i] = dep_weight(dist[i], hyper.ws, hyper.l0_literal_weight);
      kept = keep;
      break;
    case AttentionVariant::None:
      throw std::logic_error("attention_probs called with attention disabled");
  }
  if (kept.size() != n)
    throw std::invalid_argument("attention_probs: keep mask length mismatch");
  const bool logspace = hyper.attention_variant == AttentionVariant::SoftmaxNorm;
  return tape.attention_normalize(scores, weights, kept, logspace);
}

ad::Tensor attention_vector(ad::Tape& tape, const ad::Tensor& H, const ad::Tensor& probs) {
  if (static_cast<int>(probs.size()) != H.dim(0))
    throw std::invalid_argument("attention_vector: " + std::to_string(probs.size()) +
                                " probabilities for " + std::to_string(H.dim(0)) + " rows");
  return tape.matmul(tape.reshape(probs, {1, H.dim(0)}), H);
}

ad::Tensor multi_factor_features(ForwardCtx& ctx, const ad::Tensor& H, const EncodedInstance& enc,
                                 const ad::Tensor& v_e1, const ad::Tensor& v_e2) {
  const HyperParams& hp = ctx.hyper;
  if (!hp.uses_attention())
    throw std::invalid_argument("multi_factor_features: m == 0 routes to the baseline path");

  std::vector<char> keep(enc.n(), 1);
  if (hp.attention_variant != AttentionVariant::Standard)
    keep = attention_mask(enc.dep_dist1, enc.dep_dist2, hp.ws, enc.entity_span(1),
                          enc.entity_span(2));

  std::vector<Tensor> probs1, probs2, parts;
  for (int f = 0; f < hp.m; ++f) {
    Tensor s1 = bilinear_scores(ctx.tape, H, v_e1, ctx.params.attn[f][0]);
    Tensor s2 = bilinear_scores(ctx.tape, H, v_e2, ctx.params.attn[f][1]);
    Tensor p1 = attention_probs(ctx.tape, s1, enc.dep_dist1, keep, hp);
    Tensor p2 = attention_probs(ctx.tape, s2, enc.dep_dist2, keep, hp);
    if (hp.combine_mode == CombineMode::Concat) {
      parts.push_back(attention_vector(ctx.tape, H, p1));
      parts.push_back(attention_vector(ctx.tape, H, p2));
    } else {
      probs1.push_back(p1);
      probs2.push_back(p2);
    }
  }
  if (hp.combine_mode == CombineMode::MaxPool) {
    Tensor q1 = ctx.tape.normalize_sum(ctx.tape.elementwise_max(probs1));
    Tensor q2 = ctx.tape.normalize_sum(ctx.tape.elementwise_max(probs2));
    parts.push_back(attention_vector(ctx.tape, H, q1));
    parts.push_back(attention_vector(ctx.tape, H, q2));
  }
  return ctx.tape.concat(parts, 1);
}

ad::Tensor forward(ForwardCtx& ctx, const EncodedInstance& enc) {
  Tensor H = encode_sequence(ctx, enc);
  Tensor v_g = global_feature(ctx, H, enc);
  Tensor v_e1 = entity_vector(ctx, enc, 1);
  Tensor v_e2 = entity_vector(ctx, enc, 2);

  std::vector<Tensor> feats{v_g};
  if (ctx.hyper.uses_attention())
    feats.push_back(multi_factor_features(ctx, H, enc, v_e1, v_e2));
  feats.push_back(v_e1);
  feats.push_back(v_e2);

  Tensor x = ctx.tape.concat(feats, 1);
  if (ctx.training) x = ctx.tape.apply_dropout(x, ctx.hyper.dropout, *ctx.rng, true);
  Tensor logits = ctx.tape.add(ctx.tape.matmul(x, ctx.params.classifier_W),
                               ctx.params.classifier_b);
  Tensor probs = ctx.tape.softmax_rows(logits);
  return ctx.tape.reshape(probs, {ctx.hyper.num_labels});
}

ad::Tensor nll_batch(ad::Tape& tape, const std::vector<EncodedInstance>& batch,
                     const ModelParams& params, const HyperParams& hyper, Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("nll_batch: empty batch");
  ForwardCtx ctx{tape, params, hyper, true, &rng};
  Tensor total;
  for (const EncodedInstance& enc : batch) {
    if (enc.label_id < 0)
      throw std::invalid_argument("nll_batch: instance without a known label");
    Tensor loss = tape.nll(forward(ctx, enc), enc.label_id);
    total = total.defined() ? tape.add(total, loss) : loss;
  }
  return tape.mul(total, Tensor::scalar(1.0 / static_cast<double>(batch.size())));
}

std::vector<double> predict_probs(const EncodedInstance& enc, const ModelParams& params,
                                  const HyperParams& hyper) {
  ad::Tape tape;
  ForwardCtx ctx{tape, params, hyper, false, nullptr};
  return forward(ctx, enc).data();
}

}  // namespace relex
