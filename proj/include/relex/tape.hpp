#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "relex/rng.hpp"
#include "relex/tensor.hpp"

namespace relex::ad {

enum class EwKind { Tanh, Sigmoid, Exp, Mul, Add };

struct ReduceMax {
  Tensor values;            // column maxima, rank 1
  std::vector<int> argmax;  // winning row per column, lowest index on ties
};

inline constexpr double kNllFloor = 1e-12;

// Reverse-mode tape. A tape is built fresh for every forward pass; ops append
// nodes in creation order and backward() replays them strictly in reverse.
// A tape and the tensors it produced are confined to one thread.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Tensor matmul(const Tensor& a, const Tensor& b);
  Tensor concat(const std::vector<Tensor>& parts, int axis);

  Tensor elementwise(EwKind kind, const Tensor& a, const Tensor* b = nullptr);
  Tensor tanh(const Tensor& a) { return elementwise(EwKind::Tanh, a); }
  Tensor sigmoid(const Tensor& a) { return elementwise(EwKind::Sigmoid, a); }
  Tensor exp(const Tensor& a) { return elementwise(EwKind::Exp, a); }
  Tensor mul(const Tensor& a, const Tensor& b) { return elementwise(EwKind::Mul, a, &b); }
  Tensor add(const Tensor& a, const Tensor& b) { return elementwise(EwKind::Add, a, &b); }

  ReduceMax reduce_max(const Tensor& t);
  Tensor softmax_rows(const Tensor& t);
  Tensor gather_rows(const Tensor& table, const std::vector<int>& ids);
  Tensor apply_dropout(const Tensor& t, double rate, Rng& rng, bool training);
  Tensor nll(const Tensor& probs, int label);
  Tensor reshape(const Tensor& t, std::vector<int> shape);

  // Attention normalizer over kept positions. Linear mode:
  //   p_i = keep_i * w_i * exp(s_i - max_kept(s)) / sum_j(...)
  // Logspace mode exponentiates s_i + log(w_i), shifted by the kept maximum.
  // Masked positions get p_i == 0 exactly. The max shift is subtracted before
  // anything else touches the scores, which keeps the output bitwise
  // invariant under exactly-representable score translations.
  Tensor attention_normalize(const Tensor& scores, const std::vector<double>& weights,
                             const std::vector<char>& keep, bool logspace);

  // coordinate-wise max over same-shaped tensors, ties to the lowest operand
  Tensor elementwise_max(const std::vector<Tensor>& parts);

  // p_i = t_i / sum(t); inputs must be non-negative with positive sum
  Tensor normalize_sum(const Tensor& t);

  // Seeds loss.grad with 1 and replays all nodes in reverse creation order.
  // Tensors used more than once accumulate every contribution.
  void backward(const Tensor& loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    const char* op;
    std::function<void()> backprop;
  };

  Tensor stamp(Tensor out, const char* op, std::function<void()> backprop);

  std::vector<Node> nodes_;
};

}  // namespace relex::ad
