#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "relex/corpus.hpp"
#include "relex/deptree.hpp"
#include "relex/gradcheck.hpp"
#include "relex/network.hpp"

using namespace relex;
using ad::Tensor;

namespace {

HyperParams small_hyper() {
  HyperParams h;
  h.d_w = 6;
  h.d_z = 3;
  h.d_u = 2;
  h.f_g = 10;
  h.f_e = 10;
  h.k = 3;
  h.ws = 5;
  h.m = 2;
  h.dropout = 0.5;
  h.max_pos = 8;
  h.context_window = 2;
  return h;
}

const char* kLine =
    R"({"tokens":["Maria","Lopez","works","for","Bell","Labs","in","Texas","."],"entity1":{"start":0,"end":1},"entity2":{"start":4,"end":5},"dep_heads":[1,2,-1,2,5,3,2,6,2],"relation":"works_for"})";

struct Fixture {
  Instance inst;
  Vocab vocab;
  HyperParams hyper;
  EncodedInstance enc;
  ModelParams params;

  explicit Fixture(HyperParams h = small_hyper()) : inst(parse_instance_line(kLine)), hyper(h) {
    vocab = build_vocab({inst}, 1);
    vocab.add_label("born_in");
    vocab.add_label("located_in");
    vocab.add_label("founded_by");
    hyper.num_labels = vocab.num_labels();
    enc = encode(inst, vocab, hyper);
    Rng rng(17);
    params = init_params(hyper, vocab, rng);
  }
};

}  // namespace

TEST_CASE("init_params is bit-deterministic under a fixed seed") {
  Fixture f1, f2;
  const auto n1 = f1.params.named(), n2 = f2.params.named();
  REQUIRE(n1.size() == n2.size());
  for (std::size_t i = 0; i < n1.size(); ++i) {
    CHECK(n1[i].first == n2[i].first);
    CHECK(n1[i].second.data() == n2[i].second.data());
  }
}

TEST_CASE("dimension ledger with the default constants") {
  HyperParams h;  // defaults: d_w 50, d_z 10, d_u 5, f 230
  CHECK(h.x_width() == 60);
  CHECK(h.lstm_hidden() == 60);
  CHECK(h.bilstm_out() == 120);
  CHECK(h.q_width() == 130);

  h.m = 1;
  CHECK(h.v_ma_width() == 240);
  CHECK(h.classifier_input_width() == 930);
  h.m = 4;
  CHECK(h.v_ma_width() == 960);
  CHECK(h.classifier_input_width() == 1650);
  h.combine_mode = CombineMode::MaxPool;
  CHECK(h.v_ma_width() == 240);  // m-independent
  h.combine_mode = CombineMode::Concat;
  h.m = 3;
  CHECK(h.v_ma_width() == 720);
  h.attention_variant = AttentionVariant::None;
  CHECK(h.v_ma_width() == 0);
  CHECK(h.classifier_input_width() == 690);
}

TEST_CASE("init_params sizes the classifier to the variant") {
  Fixture f;
  CHECK(f.params.classifier_W.dim(0) == f.hyper.classifier_input_width());
  CHECK(f.params.classifier_W.dim(1) == f.hyper.num_labels);
  CHECK(f.params.word_emb.dim(0) == f.vocab.num_tokens());
  CHECK(static_cast<int>(f.params.attn.size()) == f.hyper.m);
  // PAD row zero
  for (int c = 0; c < f.hyper.d_w; ++c) CHECK(f.params.word_emb.at(0, c) == 0.0);
  // forget bias 1
  CHECK(f.params.lstm_fwd.b_f.data()[0] == 1.0);
  CHECK(f.params.lstm_fwd.b_i.data()[0] == 0.0);

  CHECK_THROWS_AS(
      [&] {
        HyperParams h = small_hyper();  // num_labels unset
        Rng rng(1);
        return init_params(h, f.vocab, rng);
      }(),
      std::invalid_argument);
}

TEST_CASE("encode_sequence yields n x 2(d_w+d_z) rows, n = 1 included") {
  Fixture f;
  ad::Tape tape;
  ForwardCtx ctx{tape, f.params, f.hyper, false, nullptr};
  Tensor H = encode_sequence(ctx, f.enc);
  CHECK(H.shape() == std::vector<int>{9, f.hyper.bilstm_out()});

  EncodedInstance one;
  one.word_ids = {f.enc.word_ids[0]};
  one.indicator_ids = {1};
  one.pos1_ids = {f.hyper.max_pos};
  one.pos2_ids = {f.hyper.max_pos};
  one.ent1_ctx = one.ent2_ctx = Span{0, 0};
  one.dep_dist1 = one.dep_dist2 = {0};
  one.label_id = 0;
  Tensor H1 = encode_sequence(ctx, one);
  CHECK(H1.shape() == std::vector<int>{1, f.hyper.bilstm_out()});
  for (double v : H1.data()) CHECK(std::isfinite(v));
}

TEST_CASE("reversing the sentence swaps the forward and backward LSTM roles") {
  Fixture f;
  const int n = f.enc.n();

  EncodedInstance rev = f.enc;
  auto flip = [n](std::vector<int>& v) { std::reverse(v.begin(), v.end()); (void)n; };
  flip(rev.word_ids);
  flip(rev.indicator_ids);
  flip(rev.pos1_ids);
  flip(rev.pos2_ids);
  flip(rev.dep_dist1);
  flip(rev.dep_dist2);

  ModelParams swapped = f.params.clone();
  std::swap(swapped.lstm_fwd, swapped.lstm_bwd);

  ad::Tape tape;
  ForwardCtx ctx{tape, f.params, f.hyper, false, nullptr};
  Tensor H = encode_sequence(ctx, f.enc);
  ForwardCtx ctx2{tape, swapped, f.hyper, false, nullptr};
  Tensor Hr = encode_sequence(ctx2, rev);

  const int h = f.hyper.lstm_hidden();
  for (int t = 0; t < n; ++t)
    for (int c = 0; c < h; ++c) {
      // forward half of row t == backward half of mirrored row, and vice versa
      CHECK(H.at(t, c) == doctest::Approx(Hr.at(n - 1 - t, h + c)).epsilon(1e-12));
      CHECK(H.at(t, h + c) == doctest::Approx(Hr.at(n - 1 - t, c)).epsilon(1e-12));
    }
}

TEST_CASE("global_feature has f_g entries and survives n = 1 with k = 3") {
  Fixture f;
  ad::Tape tape;
  ForwardCtx ctx{tape, f.params, f.hyper, false, nullptr};
  Tensor H = encode_sequence(ctx, f.enc);
  Tensor v_g = global_feature(ctx, H, f.enc);
  CHECK(v_g.shape() == std::vector<int>{1, f.hyper.f_g});

  EncodedInstance one;
  one.word_ids = {2};
  one.indicator_ids = {1};
  one.pos1_ids = {0};
  one.pos2_ids = {0};
  one.ent1_ctx = one.ent2_ctx = Span{0, 0};
  one.dep_dist1 = one.dep_dist2 = {0};
  Tensor H1 = encode_sequence(ctx, one);
  Tensor v1 = global_feature(ctx, H1, one);
  CHECK(v1.shape() == std::vector<int>{1, f.hyper.f_g});
  for (double v : v1.data()) CHECK(std::isfinite(v));
}

TEST_CASE("global_feature over all-zero inputs with zero parameters is tanh(0)") {
  Fixture f;
  for (const auto& [name, t] : f.params.named())
    std::fill(t.data().begin(), t.data().end(), 0.0);
  ad::Tape tape;
  ForwardCtx ctx{tape, f.params, f.hyper, false, nullptr};
  Tensor H = encode_sequence(ctx, f.enc);
  Tensor v_g = global_feature(ctx, H, f.enc);
  for (double v : v_g.data()) CHECK(v == 0.0);
}

TEST_CASE("entity_vector pools the context range and shares the filter bank") {
  Fixture f;
  ad::Tape tape;
  ForwardCtx ctx{tape, f.params, f.hyper, false, nullptr};
  Tensor v_e1 = entity_vector(ctx, f.enc, 1);
  Tensor v_e2 = entity_vector(ctx, f.enc, 2);
  CHECK(v_e1.shape() == std::vector<int>{1, f.hyper.f_e});
  CHECK(v_e2.shape() == std::vector<int>{1, f.hyper.f_e});
  CHECK_THROWS_AS(entity_vector(ctx, f.enc, 3), std::invalid_argument);

  // identical context token ids give identical vectors through the shared bank
  EncodedInstance twin = f.enc;
  twin.word_ids = {5, 5, 2, 3, 5, 5, 4, 6, 7};
  twin.indicator_ids = {1, 1, 0, 0, 2, 2, 0, 0, 0};
  twin.ent1_ctx = Span{0, 1};
  twin.ent2_ctx = Span{4, 5};
  // make the indicator ids inside both spans match so the x rows agree
  twin.indicator_ids[0] = twin.indicator_ids[1] = 1;
  twin.indicator_ids[4] = twin.indicator_ids[5] = 1;
  Tensor a = entity_vector(ctx, twin, 1);
  Tensor b = entity_vector(ctx, twin, 2);
  CHECK(a.data() == b.data());
}

TEST_CASE("single-token context makes max-pool the identity over one window") {
  Fixture f;
  EncodedInstance e = f.enc;
  e.ent1_ctx = Span{3, 3};
  ad::Tape tape;
  ForwardCtx ctx{tape, f.params, f.hyper, false, nullptr};
  Tensor v = entity_vector(ctx, e, 1);
  CHECK(v.shape() == std::vector<int>{1, f.hyper.f_e});
  for (double x : v.data()) {
    CHECK(x >= -1.0);
    CHECK(x <= 1.0);
  }
}

TEST_CASE("bilinear_scores worked cases") {
  ad::Tape tape;
  Tensor H = Tensor::from_values({1, 3}, {1, 0, 0});
  Tensor W = Tensor::from_values({3, 2}, {7, 0, 0, 0, 0, 0}, true);
  Tensor v_e = Tensor::from_values({2}, {1, 0});
  Tensor s = bilinear_scores(tape, H, v_e, W);
  CHECK(s.shape() == std::vector<int>{1, 1});
  CHECK(s.value() == 7.0);  // basis probe picks out W[0][0]

  Tensor Wz = Tensor::zeros({3, 2});
  Tensor H2 = Tensor::from_values({4, 3}, std::vector<double>(12, 0.5));
  Tensor s2 = bilinear_scores(tape, H2, v_e, Wz);
  for (double v : s2.data()) CHECK(v == 0.0);

  CHECK_THROWS_AS(bilinear_scores(tape, H, Tensor::zeros({3}), W), std::invalid_argument);
}

TEST_CASE("bilinear_scores gradient w.r.t. the attention matrix") {
  Rng rng(5);
  Tensor H = Tensor::zeros({4, 6});
  for (double& v : H.data()) v = rng.uniform(-1, 1);
  Tensor W = Tensor::zeros({6, 5}, true);
  for (double& v : W.data()) v = rng.uniform(-1, 1);
  Tensor v_e = Tensor::zeros({5});
  for (double& v : v_e.data()) v = rng.uniform(-1, 1);

  auto f = [&]() {
    W.zero_grad();
    ad::Tape tape;
    Tensor s = bilinear_scores(tape, H, v_e, W);
    Tensor total = tape.matmul(tape.reshape(s, {1, 4}), Tensor::full({4, 1}, 1.0));
    tape.backward(total);
    return total.value();
  };
  const auto report = ad::finite_difference_check(f, {{"W_a", W}}, 1e-5, 12, 9);
  CHECK(report.max_rel_err < 1e-6);
}

TEST_CASE("attention_probs reproduces the hand-computed distance weighting") {
  HyperParams hyper = small_hyper();
  hyper.attention_variant = AttentionVariant::DepWeighted;
  ad::Tape tape;
  Tensor s = Tensor::from_values({3, 1}, {0, 0, 0});
  Tensor p = attention_probs(tape, s, {1, 2, 3}, {1, 1, 1}, hyper);
  CHECK(p.data()[0] == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
  CHECK(p.data()[1] == doctest::Approx(2.0 / 7.0).epsilon(1e-12));
  CHECK(p.data()[2] == doctest::Approx(1.0 / 7.0).epsilon(1e-12));

  // uniform scores and distances spread mass uniformly over kept tokens
  Tensor s4 = Tensor::from_values({4, 1}, {0.3, 0.3, 0.3, 0.3});
  Tensor pu = attention_probs(tape, s4, {2, 2, 2, 2}, {1, 1, 0, 1}, hyper);
  CHECK(pu.data()[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(pu.data()[2] == 0.0);
}

TEST_CASE("attention_probs is bitwise shift-invariant on representable translations") {
  Rng rng(15);
  for (AttentionVariant variant :
       {AttentionVariant::Standard, AttentionVariant::DepWeighted, AttentionVariant::SoftmaxNorm}) {
    HyperParams hyper = small_hyper();
    hyper.attention_variant = variant;
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 2 + rng.below_int(8);
      std::vector<double> base(n);
      for (double& v : base) v = static_cast<double>(rng.below_int(1 << 20)) / (1 << 16) - 8.0;
      std::vector<int> dist(n);
      for (int& d : dist) d = rng.below_int(9);
      std::vector<char> keep(n, 0);
      for (char& k : keep) k = rng.bernoulli(0.7);
      keep[rng.below_int(n)] = 1;
      const double shift = static_cast<double>(rng.below_int(1 << 12)) / (1 << 6) - 32.0;

      ad::Tape tape;
      Tensor s = Tensor::from_values({n, 1}, base);
      std::vector<double> shifted = base;
      for (double& v : shifted) v += shift;
      Tensor s2 = Tensor::from_values({n, 1}, shifted);
      Tensor p1 = attention_probs(tape, s, dist, keep, hyper);
      Tensor p2 = attention_probs(tape, s2, dist, keep, hyper);
      CHECK(std::memcmp(p1.data().data(), p2.data().data(), n * sizeof(double)) == 0);
    }
  }
}

TEST_CASE("standard variant ignores the mask, softmax_norm keeps it") {
  HyperParams hyper = small_hyper();
  ad::Tape tape;
  Tensor s = Tensor::from_values({3, 1}, {0.5, 0.1, -0.4});
  const std::vector<char> keep{1, 0, 1};

  hyper.attention_variant = AttentionVariant::Standard;
  Tensor ps = attention_probs(tape, s, {1, 2, 3}, keep, hyper);
  CHECK(ps.data()[1] > 0.0);

  hyper.attention_variant = AttentionVariant::SoftmaxNorm;
  Tensor pn = attention_probs(tape, s, {1, 2, 3}, keep, hyper);
  CHECK(pn.data()[1] == 0.0);

  // softmax_norm with the distance factor matches the linear route within fp
  hyper.attention_variant = AttentionVariant::DepWeighted;
  Tensor pd = attention_probs(tape, s, {1, 2, 3}, keep, hyper);
  for (int i = 0; i < 3; ++i) CHECK(pn.data()[i] == doctest::Approx(pd.data()[i]).epsilon(1e-12));

  // and without it, it is a plain masked softmax
  hyper.attention_variant = AttentionVariant::SoftmaxNorm;
  hyper.softmax_distance_factor = false;
  Tensor pp = attention_probs(tape, s, {1, 2, 3}, keep, hyper);
  const double z = std::exp(0.5) + std::exp(-0.4);
  CHECK(pp.data()[0] == doctest::Approx(std::exp(0.5) / z).epsilon(1e-12));
}

TEST_CASE("attention_vector selects, averages, and stays convex") {
  ad::Tape tape;
  Tensor H = Tensor::from_values({3, 2}, {1, 2, 3, 4, 5, 6});
  Tensor onehot = Tensor::from_values({3, 1}, {0, 1, 0});
  Tensor va = attention_vector(tape, H, onehot);
  CHECK(va.data() == std::vector<double>{3, 4});

  Tensor uniform = Tensor::full({3, 1}, 1.0 / 3.0);
  Tensor vu = attention_vector(tape, H, uniform);
  CHECK(vu.data()[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(vu.data()[1] == doctest::Approx(4.0).epsilon(1e-12));

  Rng rng(33);
  Tensor p = Tensor::zeros({3, 1});
  double sum = 0;
  for (double& v : p.data()) sum += (v = rng.uniform01());
  for (double& v : p.data()) v /= sum;
  Tensor vc = attention_vector(tape, H, p);
  for (int c = 0; c < 2; ++c) {
    double mx = 0;
    for (int r = 0; r < 3; ++r) mx = std::max(mx, std::abs(H.at(r, c)));
    CHECK(std::abs(vc.data()[c]) <= mx + 1e-15);
  }
}

TEST_CASE("multi_factor_features widths track m and the combine mode") {
  for (int m : {1, 3, 4}) {
    for (CombineMode combine : {CombineMode::Concat, CombineMode::MaxPool}) {
      HyperParams h = small_hyper();
      h.m = m;
      h.combine_mode = combine;
      Fixture f(h);
      ad::Tape tape;
      ForwardCtx ctx{tape, f.params, f.hyper, false, nullptr};
      Tensor H = encode_sequence(ctx, f.enc);
      Tensor v_e1 = entity_vector(ctx, f.enc, 1);
      Tensor v_e2 = entity_vector(ctx, f.enc, 2);
      Tensor v_ma = multi_factor_features(ctx, H, f.enc, v_e1, v_e2);
      CHECK(v_ma.shape() == std::vector<int>{1, f.hyper.v_ma_width()});
      const int expected =
          combine == CombineMode::Concat ? 4 * m * (h.d_w + h.d_z) : 4 * (h.d_w + h.d_z);
      CHECK(v_ma.dim(1) == expected);
    }
  }

  HyperParams h = small_hyper();
  h.m = 0;
  Fixture f(h);
  ad::Tape tape;
  ForwardCtx ctx{tape, f.params, f.hyper, false, nullptr};
  Tensor H = encode_sequence(ctx, f.enc);
  Tensor v_e1 = entity_vector(ctx, f.enc, 1);
  CHECK_THROWS_AS(multi_factor_features(ctx, H, f.enc, v_e1, v_e1), std::invalid_argument);
}

TEST_CASE("a 52-relation label set yields a 53-way distribution") {
  Fixture f;
  Vocab big = f.vocab;
  while (big.num_labels() < 53) big.add_label("rel_" + std::to_string(big.num_labels()));
  HyperParams h = small_hyper();
  h.num_labels = big.num_labels();
  CHECK(h.num_labels == 53);
  Rng rng(3);
  const ModelParams params = init_params(h, big, rng);
  ad::Tape tape;
  ForwardCtx ctx{tape, params, h, false, nullptr};
  CHECK(forward(ctx, f.enc).shape() == std::vector<int>{53});
}

TEST_CASE("forward emits a distribution over the label set") {
  Fixture f;
  ad::Tape tape;
  ForwardCtx ctx{tape, f.params, f.hyper, false, nullptr};
  Tensor probs = forward(ctx, f.enc);
  CHECK(probs.shape() == std::vector<int>{f.hyper.num_labels});
  double sum = 0.0;
  for (double v : probs.data()) {
    CHECK(v >= 0.0);
    sum += v;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("m = 0 routes to the no-attention baseline") {
  HyperParams h = small_hyper();
  h.m = 0;
  CHECK_FALSE(h.uses_attention());
  CHECK(h.classifier_input_width() == h.f_g + 2 * h.f_e);
  Fixture f(h);
  CHECK(f.params.attn.empty());
  ad::Tape tape;
  ForwardCtx ctx{tape, f.params, f.hyper, false, nullptr};
  Tensor probs = forward(ctx, f.enc);
  CHECK(probs.shape() == std::vector<int>{f.hyper.num_labels});
  double sum = 0.0;
  for (double v : probs.data()) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("eval-mode forward is bitwise deterministic") {
  Fixture f;
  const auto p1 = predict_probs(f.enc, f.params, f.hyper);
  const auto p2 = predict_probs(f.enc, f.params, f.hyper);
  CHECK(std::memcmp(p1.data(), p2.data(), p1.size() * sizeof(double)) == 0);
}

TEST_CASE("nll_batch of one equals the single-instance loss and duplication keeps the mean") {
  Fixture f;
  auto loss_of = [&](const std::vector<EncodedInstance>& batch) {
    ad::Tape tape;
    Rng rng(5);
    return nll_batch(tape, batch, f.params, f.hyper, rng).value();
  };
  HyperParams nodrop = f.hyper;
  nodrop.dropout = 0.0;
  auto loss_nodrop = [&](const std::vector<EncodedInstance>& batch) {
    ad::Tape tape;
    Rng rng(5);
    return nll_batch(tape, batch, f.params, nodrop, rng).value();
  };
  const double one = loss_nodrop({f.enc});
  const double two = loss_nodrop({f.enc, f.enc});
  CHECK(two == doctest::Approx(one).epsilon(1e-12));

  ad::Tape tape;
  ForwardCtx ctx{tape, f.params, nodrop, true, nullptr};
  Rng rng(5);
  ctx.rng = &rng;
  const double direct = tape.nll(forward(ctx, f.enc), f.enc.label_id).value();
  CHECK(one == doctest::Approx(direct).epsilon(1e-12));

  CHECK_THROWS_AS(loss_of({}), std::invalid_argument);
}

TEST_CASE("full-loss gradients match finite differences for the small model") {
  for (AttentionVariant variant : {AttentionVariant::DepWeighted, AttentionVariant::None}) {
    HyperParams h = small_hyper();
    h.attention_variant = variant;
    Fixture f(h);
    const std::vector<EncodedInstance> batch{f.enc};
    auto loss = [&]() {
      f.params.zero_grads();
      ad::Tape tape;
      Rng rng(31);
      ad::Tensor l = nll_batch(tape, batch, f.params, f.hyper, rng);
      tape.backward(l);
      return l.value();
    };
    const auto report = ad::finite_difference_check(loss, f.params.named(), 1e-5, 4, 77);
    CHECK(report.max_rel_err < 1e-4);
  }
}

TEST_CASE("init_params adopts a provided embedding table verbatim") {
  Fixture f;
  EmbeddingTable table;
  table.vocab_size = f.vocab.num_tokens();
  table.dim = f.hyper.d_w;
  table.matrix.assign(static_cast<std::size_t>(table.vocab_size) * table.dim, 0.0);
  for (std::size_t i = 0; i < table.matrix.size(); ++i)
    table.matrix[i] = static_cast<double>(i % 7) * 0.01;
  std::fill_n(table.matrix.begin(), table.dim, 0.0);

  Rng rng(2);
  const ModelParams params = init_params(f.hyper, f.vocab, rng, &table);
  CHECK(params.word_emb.data() == table.matrix);

  EmbeddingTable wrong = table;
  wrong.dim = f.hyper.d_w + 1;
  Rng rng2(2);
  CHECK_THROWS_WITH_AS(init_params(f.hyper, f.vocab, rng2, &wrong), doctest::Contains("d_w"),
                       std::invalid_argument);
}

TEST_CASE("separate entity banks double the convolution parameters") {
  HyperParams h = small_hyper();
  h.separate_entity_banks = true;
  Fixture f(h);
  bool found = false;
  for (const auto& [name, t] : f.params.named()) found = found || name == "conv_entity2.W";
  CHECK(found);

  ad::Tape tape;
  ForwardCtx ctx{tape, f.params, f.hyper, false, nullptr};
  Tensor v_e2 = entity_vector(ctx, f.enc, 2);
  CHECK(v_e2.shape() == std::vector<int>{1, h.f_e});
}
