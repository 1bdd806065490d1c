#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "relex/corpus_types.hpp"
#include "relex/hyperparams.hpp"
#include "relex/network.hpp"
#include "relex/rng.hpp"

namespace relex {

// Per-parameter squared-gradient accumulators; coordinates never decrease.
struct AdagradState {
  double lr = 0.01;
  double eps = 1e-8;
  double max_grad_norm = 0.0;  // 0 disables clipping
  std::map<std::string, std::vector<double>> acc;

  void init(const ModelParams& params);
};

// acc += g^2; theta -= lr * g / (sqrt(acc) + eps); gradients zeroed after.
// The frozen PAD embedding row is cleared first.
void adagrad_update(const ModelParams& params, AdagradState& state);

// [begin, end) index ranges partitioning n instances into batches of at most
// batch_size; the last short batch is kept.
std::vector<std::pair<std::size_t, std::size_t>> batch_ranges(std::size_t n, int batch_size);

// One pass over the shuffled training set in batches of at most batch_size
// (the last short batch is kept). Returns the instance-weighted mean loss.
double train_epoch(const std::vector<EncodedInstance>& train, const ModelParams& params,
                   AdagradState& state, const HyperParams& hyper, int batch_size, Rng& rng);

struct TrainConfig {
  int batch_size = 50;
  int max_epochs = 100;
  int patience = 5;
  double lr = 0.01;
  double eps = 1e-8;
  double max_grad_norm = 0.0;
  std::uint64_t seed = 13;
  std::string checkpoint_path;
};

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  double dev_p = 0.0;
  double dev_r = 0.0;
  double dev_f1 = 0.0;
  double threshold = 0.0;
};

// Strict-improvement early stopping: observe() says whether this epoch is a
// new best; done() flips after `patience` consecutive non-improving epochs.
struct EarlyStopper {
  int patience = 5;
  double best = -1.0;
  int best_epoch = 0;
  int stale = 0;

  bool observe(int epoch, double score) {
    if (score > best) {
      best = score;
      best_epoch = epoch;
      stale = 0;
      return true;
    }
    ++stale;
    return false;
  }
  bool done() const { return stale >= patience; }
};

struct FitResult {
  ModelParams params;  // the best-dev-F1 snapshot
  double best_f1 = -1.0;
  double best_threshold = 0.0;
  int best_epoch = 0;
  std::vector<EpochStats> history;
};

// Adagrad training with per-epoch dev evaluation (threshold tuned each
// epoch), keeping the best-F1 snapshot and stopping after `patience` epochs
// without improvement.
FitResult fit(const std::vector<EncodedInstance>& train, const std::vector<EncodedInstance>& dev,
              const TrainConfig& config, const HyperParams& hyper, const Vocab& vocab,
              const EmbeddingTable* embeddings = nullptr);

std::string history_csv(const std::vector<EpochStats>& history,
                        const std::vector<std::string>& header_comments);

}  // namespace relex
