#include "relex/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "relex/evaluator.hpp"

namespace relex {

void AdagradState::init(const ModelParams& params) {
  acc.clear();
  for (const auto& [name, t] : params.named()) acc[name].assign(t.size(), 0.0);
}

void adagrad_update(const ModelParams& params, AdagradState& state) {
  params.clear_frozen_grads();

  const auto named = params.named();
  if (state.max_grad_norm > 0.0) {
    double sq = 0.0;
    for (const auto& [name, t] : named)
      for (double g : t.grad()) sq += g * g;
    const double norm = std::sqrt(sq);
    if (norm > state.max_grad_norm) {
      const double scale = state.max_grad_norm / norm;
      for (const auto& [name, t] : named)
        for (double& g : t.grad()) g *= scale;
    }
  }

  for (const auto& [name, t] : named) {
    auto it = state.acc.find(name);
    if (it == state.acc.end() || it->second.size() != t.size())
      throw std::invalid_argument("adagrad_update: no accumulator of matching shape for " + name);
    std::vector<double>& acc = it->second;
    std::vector<double>& grad = t.grad();
    std::vector<double>& data = t.data();
    for (std::size_t i = 0; i < grad.size(); ++i) {
      const double g = grad[i];
      acc[i] += g * g;
      data[i] -= state.lr * g / (std::sqrt(acc[i]) + state.eps);
      grad[i] = 0.0;
    }
  }
}

std::vector<std::pair<std::size_t, std::size_t>> batch_ranges(std::size_t n, int batch_size) {
  if (batch_size < 1) throw std::invalid_argument("batch_ranges: batch_size must be >= 1");
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (std::size_t begin = 0; begin < n; begin += batch_size)
    ranges.emplace_back(begin, std::min(n, begin + batch_size));
  return ranges;
}

double train_epoch(const std::vector<EncodedInstance>& train, const ModelParams& params,
                   AdagradState& state, const HyperParams& hyper, int batch_size, Rng& rng) {
  if (train.empty()) throw std::invalid_argument("train_epoch: empty training set");
  if (batch_size < 1) throw std::invalid_argument("train_epoch: batch_size must be >= 1");

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  double total = 0.0;
  for (const auto& [begin, end] : batch_ranges(order.size(), batch_size)) {
    std::vector<EncodedInstance> batch;
    batch.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) batch.push_back(train[order[i]]);

    ad::Tape tape;
    ad::Tensor loss = nll_batch(tape, batch, params, hyper, rng);
    tape.backward(loss);
    total += loss.value() * static_cast<double>(batch.size());
    adagrad_update(params, state);
  }
  return total / static_cast<double>(train.size());
}

static std::vector<PredictionRecord> evaluate_records(const std::vector<EncodedInstance>& dev,
                                                      const ModelParams& params,
                                                      const HyperParams& hyper) {
  std::vector<PredictionRecord> records;
  records.reserve(dev.size());
  for (const EncodedInstance& enc : dev) {
    const std::vector<double> probs = predict_probs(enc, params, hyper);
    PredictionRecord rec;
    rec.pred_argmax = predict_label(probs, 0.0);
    rec.confidence = probs[rec.pred_argmax];
    rec.gold = enc.label_id;
    rec.sentence_length = enc.n();
    rec.entity_distance = std::abs(enc.entity_span(2).start - enc.entity_span(1).start);
    records.push_back(rec);
  }
  return records;
}

FitResult fit(const std::vector<EncodedInstance>& train, const std::vector<EncodedInstance>& dev,
              const TrainConfig& config, const HyperParams& hyper, const Vocab& vocab,
              const EmbeddingTable* embeddings) {
  if (train.empty() || dev.empty())
    throw std::invalid_argument("fit: train and dev sets must be non-empty");
  if (config.patience < 1) throw std::invalid_argument("fit: patience must be >= 1");

  Rng init_rng(config.seed);
  ModelParams params = init_params(hyper, vocab, init_rng, embeddings);
  AdagradState state;
  state.lr = config.lr;
  state.eps = config.eps;
  state.max_grad_norm = config.max_grad_norm;
  state.init(params);

  FitResult result;
  EarlyStopper stopper{config.patience};
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    Rng epoch_rng(config.seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(epoch));
    const double loss = train_epoch(train, params, state, hyper, config.batch_size, epoch_rng);

    const auto records = evaluate_records(dev, params, hyper);
    const double theta = tune_threshold(records);
    const Metrics m = prf1(records, theta);
    result.history.push_back({epoch, loss, m.precision, m.recall, m.f1, theta});

    if (stopper.observe(epoch, m.f1)) {
      result.best_f1 = m.f1;
      result.best_threshold = theta;
      result.best_epoch = epoch;
      result.params = params.clone();
    } else if (stopper.done()) {
      break;
    }
  }
  return result;
}

std::string history_csv(const std::vector<EpochStats>& history,
                        const std::vector<std::string>& header_comments) {
  std::string out;
  for (const std::string& c : header_comments) out += "# " + c + "\n";
  out += "epoch,loss,dev_p,dev_r,dev_f1,threshold\n";
  char buf[160];
  for (const EpochStats& e : history) {
    std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g,%.10g,%.10g\n", e.epoch, e.loss, e.dev_p,
                  e.dev_r, e.dev_f1, e.threshold);
    out += buf;
  }
  return out;
}

}  // namespace relex
