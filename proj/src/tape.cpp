#include "relex/tape.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace relex::ad {

std::string shape_str(const std::vector<int>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

// ---------------------------------------------------------------- Tensor

Tensor::Impl& Tensor::ref() const {
  if (!impl_) throw std::logic_error("use of undefined Tensor");
  return *impl_;
}

static std::size_t shape_numel(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw std::invalid_argument("negative dimension in shape " + shape_str(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(std::vector<int> shape, double value, bool requires_grad) {
  auto impl = std::make_shared<Impl>();
  impl->data.assign(shape_numel(shape), value);
  impl->shape = std::move(shape);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::from_values(std::vector<int> shape, std::vector<double> values,
                           bool requires_grad) {
  if (shape_numel(shape) != values.size())
    throw std::invalid_argument("from_values: shape " + shape_str(shape) + " does not hold " +
                                std::to_string(values.size()) + " values");
  auto impl = std::make_shared<Impl>();
  impl->shape = std::move(shape);
  impl->data = std::move(values);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from_values({1}, {value}, requires_grad);
}

const std::vector<int>& Tensor::shape() const { return ref().shape; }
int Tensor::rank() const { return static_cast<int>(ref().shape.size()); }

int Tensor::dim(int axis) const {
  const auto& s = ref().shape;
  if (axis < 0 || axis >= static_cast<int>(s.size()))
    throw std::invalid_argument("dim axis " + std::to_string(axis) + " out of rank");
  return s[axis];
}

std::size_t Tensor::size() const { return ref().data.size(); }

std::vector<double>& Tensor::data() const { return ref().data; }

double Tensor::value() const {
  if (size() != 1) throw std::invalid_argument("value() on non-scalar tensor " + shape_str(shape()));
  return ref().data[0];
}

double Tensor::at(int i) const { return ref().data.at(static_cast<std::size_t>(i)); }

double Tensor::at(int r, int c) const {
  if (rank() != 2) throw std::invalid_argument("at(r,c) on tensor of rank " + std::to_string(rank()));
  return ref().data.at(static_cast<std::size_t>(r) * dim(1) + c);
}

bool Tensor::has_grad() const { return !ref().grad.empty() || ref().data.empty(); }

std::vector<double>& Tensor::grad() const {
  auto& im = ref();
  if (im.grad.size() != im.data.size()) im.grad.assign(im.data.size(), 0.0);
  return im.grad;
}

void Tensor::zero_grad() const {
  auto& im = ref();
  std::fill(im.grad.begin(), im.grad.end(), 0.0);
}

bool Tensor::requires_grad() const { return ref().requires_grad; }
void Tensor::set_requires_grad(bool v) const { ref().requires_grad = v; }
long Tensor::node_id() const { return ref().node_id; }
void Tensor::set_node_id(long id) const { ref().node_id = id; }

Tensor Tensor::clone() const {
  auto& im = ref();
  return from_values(im.shape, im.data, im.requires_grad);
}

// ------------------------------------------------------------------ Tape

Tensor Tape::stamp(Tensor out, const char* op, std::function<void()> backprop) {
  out.set_requires_grad(true);
  out.set_node_id(static_cast<long>(nodes_.size()));
  nodes_.push_back(Node{op, std::move(backprop)});
  return out;
}

Tensor Tape::matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2)
    throw std::invalid_argument("matmul: expected rank-2 operands, got " + shape_str(a.shape()) +
                                " x " + shape_str(b.shape()));
  const int n = a.dim(0), k = a.dim(1), m = b.dim(1);
  if (b.dim(0) != k)
    throw std::invalid_argument("matmul: inner dimensions disagree: " + shape_str(a.shape()) +
                                " x " + shape_str(b.shape()));
  Tensor out = Tensor::zeros({n, m});
  {
    const double* A = a.data().data();
    const double* B = b.data().data();
    double* C = out.data().data();
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < k; ++l) {
        const double av = A[i * k + l];
        if (av == 0.0) continue;
        const double* Brow = B + l * m;
        double* Crow = C + i * m;
        for (int j = 0; j < m; ++j) Crow[j] += av * Brow[j];
      }
  }
  if (!a.requires_grad() && !b.requires_grad()) return out;
  return stamp(out, "matmul", [a, b, out, n, k, m]() {
    if (!out.has_grad()) return;
    const double* G = out.grad().data();
    if (a.requires_grad()) {
      double* dA = a.grad().data();
      const double* B = b.data().data();
      for (int i = 0; i < n; ++i)
        for (int l = 0; l < k; ++l) {
          const double* Grow = G + i * m;
          const double* Brow = B + l * m;
          double s = 0.0;
          for (int j = 0; j < m; ++j) s += Grow[j] * Brow[j];
          dA[i * k + l] += s;
        }
    }
    if (b.requires_grad()) {
      double* dB = b.grad().data();
      const double* A = a.data().data();
      for (int i = 0; i < n; ++i)
        for (int l = 0; l < k; ++l) {
          const double av = A[i * k + l];
          if (av == 0.0) continue;
          const double* Grow = G + i * m;
          double* dBrow = dB + l * m;
          for (int j = 0; j < m; ++j) dBrow[j] += av * Grow[j];
        }
    }
  });
}

Tensor Tape::concat(const std::vector<Tensor>& parts, int axis) {
  if (parts.empty()) throw std::invalid_argument("concat: empty part list");
  const int rank = parts[0].rank();
  if (axis < 0 || axis >= rank)
    throw std::invalid_argument("concat: axis " + std::to_string(axis) + " out of rank " +
                                std::to_string(rank));
  for (const Tensor& p : parts) {
    if (p.rank() != rank)
      throw std::invalid_argument("concat: mixed ranks " + shape_str(parts[0].shape()) + " vs " +
                                  shape_str(p.shape()));
    for (int d = 0; d < rank; ++d)
      if (d != axis && p.dim(d) != parts[0].dim(d))
        throw std::invalid_argument("concat: side dimensions disagree: " +
                                    shape_str(parts[0].shape()) + " vs " + shape_str(p.shape()));
  }

  std::vector<int> shape = parts[0].shape();
  shape[axis] = 0;
  for (const Tensor& p : parts) shape[axis] += p.dim(axis);
  Tensor out = Tensor::zeros(shape);

  // rank <= 2 makes both layouts simple row-major copies
  if (rank == 1 || axis == 0) {
    double* dst = out.data().data();
    for (const Tensor& p : parts) {
      std::copy(p.data().begin(), p.data().end(), dst);
      dst += p.size();
    }
  } else {  // rank 2, axis 1
    const int rows = shape[0], cols = shape[1];
    double* C = out.data().data();
    int col0 = 0;
    for (const Tensor& p : parts) {
      const int pc = p.dim(1);
      const double* P = p.data().data();
      for (int r = 0; r < rows; ++r)
        std::copy(P + r * pc, P + (r + 1) * pc, C + r * cols + col0);
      col0 += pc;
    }
  }

  bool any = false;
  for (const Tensor& p : parts) any = any || p.requires_grad();
  if (!any) return out;

  return stamp(out, "concat", [parts, out, axis, rank]() {
    if (!out.has_grad()) return;
    const double* G = out.grad().data();
    if (rank == 1 || axis == 0) {
      std::size_t off = 0;
      for (const Tensor& p : parts) {
        if (p.requires_grad()) {
          double* d = p.grad().data();
          for (std::size_t i = 0; i < p.size(); ++i) d[i] += G[off + i];
        }
        off += p.size();
      }
    } else {
      const int rows = out.dim(0), cols = out.dim(1);
      int col0 = 0;
      for (const Tensor& p : parts) {
        const int pc = p.dim(1);
        if (p.requires_grad()) {
          double* d = p.grad().data();
          for (int r = 0; r < rows; ++r)
            for (int c = 0; c < pc; ++c) d[r * pc + c] += G[r * cols + col0 + c];
        }
        col0 += pc;
      }
    }
  });
}

Tensor Tape::elementwise(EwKind kind, const Tensor& a, const Tensor* b) {
  const bool binary = (kind == EwKind::Mul || kind == EwKind::Add);
  if (binary) {
    if (!b) throw std::invalid_argument("elementwise: binary kind needs two operands");
    if (a.shape() != b->shape())
      throw std::invalid_argument("elementwise: shape mismatch " + shape_str(a.shape()) + " vs " +
                                  shape_str(b->shape()));
  } else if (b) {
    throw std::invalid_argument("elementwise: unary kind given two operands");
  }

  const std::size_t n = a.size();
  Tensor out = Tensor::zeros(a.shape());
  const double* A = a.data().data();
  double* O = out.data().data();
  switch (kind) {
    case EwKind::Tanh:
      for (std::size_t i = 0; i < n; ++i) O[i] = std::tanh(A[i]);
      break;
    case EwKind::Sigmoid:
      for (std::size_t i = 0; i < n; ++i) O[i] = 1.0 / (1.0 + std::exp(-A[i]));
      break;
    case EwKind::Exp:
      for (std::size_t i = 0; i < n; ++i) O[i] = std::exp(A[i]);
      break;
    case EwKind::Mul: {
      const double* B = b->data().data();
      for (std::size_t i = 0; i < n; ++i) O[i] = A[i] * B[i];
      break;
    }
    case EwKind::Add: {
      const double* B = b->data().data();
      for (std::size_t i = 0; i < n; ++i) O[i] = A[i] + B[i];
      break;
    }
  }

  const bool need = a.requires_grad() || (binary && b->requires_grad());
  if (!need) return out;

  Tensor bt = binary ? *b : Tensor();
  return stamp(out, "elementwise", [kind, a, bt, out, n]() {
    if (!out.has_grad()) return;
    const double* G = out.grad().data();
    const double* O = out.data().data();
    switch (kind) {
      case EwKind::Tanh:
        if (a.requires_grad()) {
          double* dA = a.grad().data();
          for (std::size_t i = 0; i < n; ++i) dA[i] += G[i] * (1.0 - O[i] * O[i]);
        }
        break;
      case EwKind::Sigmoid:
        if (a.requires_grad()) {
          double* dA = a.grad().data();
          for (std::size_t i = 0; i < n; ++i) dA[i] += G[i] * O[i] * (1.0 - O[i]);
        }
        break;
      case EwKind::Exp:
        if (a.requires_grad()) {
          double* dA = a.grad().data();
          for (std::size_t i = 0; i < n; ++i) dA[i] += G[i] * O[i];
        }
        break;
      case EwKind::Mul: {
        if (a.requires_grad()) {
          double* dA = a.grad().data();
          const double* B = bt.data().data();
          for (std::size_t i = 0; i < n; ++i) dA[i] += G[i] * B[i];
        }
        if (bt.requires_grad()) {
          double* dB = bt.grad().data();
          const double* A = a.data().data();
          for (std::size_t i = 0; i < n; ++i) dB[i] += G[i] * A[i];
        }
        break;
      }
      case EwKind::Add: {
        if (a.requires_grad()) {
          double* dA = a.grad().data();
          for (std::size_t i = 0; i < n; ++i) dA[i] += G[i];
        }
        if (bt.requires_grad()) {
          double* dB = bt.grad().data();
          for (std::size_t i = 0; i < n; ++i) dB[i] += G[i];
        }
        break;
      }
    }
  });
}

ReduceMax Tape::reduce_max(const Tensor& t) {
  if (t.rank() != 2)
    throw std::invalid_argument("reduce_max: expected rank-2 input, got " + shape_str(t.shape()));
  const int n = t.dim(0), f = t.dim(1);
  if (n < 1) throw std::invalid_argument("reduce_max: empty reduction axis");

  Tensor out = Tensor::zeros({f});
  std::vector<int> argmax(f, 0);
  const double* X = t.data().data();
  double* O = out.data().data();
  for (int j = 0; j < f; ++j) {
    int best = 0;
    double bv = X[j];
    for (int i = 1; i < n; ++i) {
      const double v = X[i * f + j];
      if (v > bv) {  // strict: ties keep the lowest row
        bv = v;
        best = i;
      }
    }
    O[j] = bv;
    argmax[j] = best;
  }

  if (t.requires_grad()) {
    out = stamp(out, "reduce_max", [t, out, argmax, f]() {
      if (!out.has_grad()) return;
      const double* G = out.grad().data();
      double* dX = t.grad().data();
      for (int j = 0; j < f; ++j) dX[argmax[j] * f + j] += G[j];
    });
  }
  return ReduceMax{out, std::move(argmax)};
}

Tensor Tape::softmax_rows(const Tensor& t) {
  if (t.rank() != 2)
    throw std::invalid_argument("softmax_rows: expected rank-2 input, got " + shape_str(t.shape()));
  const int n = t.dim(0), c = t.dim(1);
  if (c < 1) throw std::invalid_argument("softmax_rows: empty rows");

  Tensor out = Tensor::zeros({n, c});
  const double* X = t.data().data();
  double* P = out.data().data();
  for (int i = 0; i < n; ++i) {
    const double* row = X + i * c;
    double mx = row[0];
    for (int j = 1; j < c; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (int j = 0; j < c; ++j) {
      const double e = std::exp(row[j] - mx);
      P[i * c + j] = e;
      sum += e;
    }
    for (int j = 0; j < c; ++j) P[i * c + j] /= sum;
  }

  if (!t.requires_grad()) return out;
  return stamp(out, "softmax_rows", [t, out, n, c]() {
    if (!out.has_grad()) return;
    const double* G = out.grad().data();
    const double* P = out.data().data();
    double* dX = t.grad().data();
    for (int i = 0; i < n; ++i) {
      double dot = 0.0;
      for (int j = 0; j < c; ++j) dot += G[i * c + j] * P[i * c + j];
      for (int j = 0; j < c; ++j) dX[i * c + j] += P[i * c + j] * (G[i * c + j] - dot);
    }
  });
}

Tensor Tape::gather_rows(const Tensor& table, const std::vector<int>& ids) {
  if (table.rank() != 2)
    throw std::invalid_argument("gather_rows: expected rank-2 table, got " +
                                shape_str(table.shape()));
  const int v = table.dim(0), d = table.dim(1);
  for (int id : ids)
    if (id < 0 || id >= v)
      throw std::out_of_range("gather_rows: id " + std::to_string(id) + " outside table of " +
                              std::to_string(v) + " rows");

  const int n = static_cast<int>(ids.size());
  Tensor out = Tensor::zeros({n, d});
  const double* T = table.data().data();
  double* O = out.data().data();
  for (int i = 0; i < n; ++i) std::copy(T + ids[i] * d, T + (ids[i] + 1) * d, O + i * d);

  if (!table.requires_grad()) return out;
  std::vector<int> ids_copy = ids;
  return stamp(out, "gather_rows", [table, out, ids_copy, d]() {
    if (!out.has_grad()) return;
    const double* G = out.grad().data();
    double* dT = table.grad().data();
    for (std::size_t i = 0; i < ids_copy.size(); ++i) {
      double* row = dT + static_cast<std::size_t>(ids_copy[i]) * d;
      const double* g = G + i * d;
      for (int j = 0; j < d; ++j) row[j] += g[j];  // repeated ids accumulate
    }
  });
}

Tensor Tape::apply_dropout(const Tensor& t, double rate, Rng& rng, bool training) {
  if (rate < 0.0 || rate >= 1.0)
    throw std::invalid_argument("apply_dropout: rate " + std::to_string(rate) +
                                " outside [0, 1)");
  if (!training || rate == 0.0) return t;  // evaluation is the identity

  const std::size_t n = t.size();
  const double scale = 1.0 / (1.0 - rate);
  std::vector<char> kept(n);
  Tensor out = Tensor::zeros(t.shape());
  const double* X = t.data().data();
  double* O = out.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    kept[i] = rng.uniform01() >= rate;
    O[i] = kept[i] ? X[i] * scale : 0.0;
  }

  if (!t.requires_grad()) return out;
  return stamp(out, "dropout", [t, out, kept = std::move(kept), scale, n]() {
    if (!out.has_grad()) return;
    const double* G = out.grad().data();
    double* dX = t.grad().data();
    for (std::size_t i = 0; i < n; ++i)
      if (kept[i]) dX[i] += G[i] * scale;
  });
}

Tensor Tape::nll(const Tensor& probs, int label) {
  if (probs.rank() != 1)
    throw std::invalid_argument("nll: expected rank-1 distribution, got " +
                                shape_str(probs.shape()));
  const int c = probs.dim(0);
  if (label < 0 || label >= c)
    throw std::out_of_range("nll: label " + std::to_string(label) + " outside " +
                            std::to_string(c) + " classes");

  const double p = std::max(probs.at(label), kNllFloor);
  Tensor out = Tensor::scalar(-std::log(p));
  if (!probs.requires_grad()) return out;
  return stamp(out, "nll", [probs, out, label, p]() {
    if (!out.has_grad()) return;
    probs.grad()[label] += out.grad()[0] * (-1.0 / p);
  });
}

Tensor Tape::reshape(const Tensor& t, std::vector<int> shape) {
  if (shape_numel(shape) != t.size())
    throw std::invalid_argument("reshape: " + shape_str(t.shape()) + " does not reshape to " +
                                shape_str(shape));
  Tensor out = Tensor::from_values(std::move(shape), t.data());
  if (!t.requires_grad()) return out;
  return stamp(out, "reshape", [t, out]() {
    if (!out.has_grad()) return;
    const double* G = out.grad().data();
    double* dX = t.grad().data();
    for (std::size_t i = 0; i < t.size(); ++i) dX[i] += G[i];
  });
}

Tensor Tape::attention_normalize(const Tensor& scores, const std::vector<double>& weights,
                                 const std::vector<char>& keep, bool logspace) {
  const std::size_t n = scores.size();
  if (weights.size() != n || keep.size() != n)
    throw std::invalid_argument("attention_normalize: lengths disagree (" + std::to_string(n) +
                                " scores, " + std::to_string(weights.size()) + " weights, " +
                                std::to_string(keep.size()) + " keep flags)");
  bool any_kept = false;
  for (char k : keep) any_kept = any_kept || k;
  if (!any_kept) throw std::invalid_argument("attention_normalize: all positions masked");

  const double* S = scores.data().data();
  Tensor out = Tensor::zeros(scores.shape());
  double* P = out.data().data();

  if (!logspace) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
      if (keep[i]) mx = std::max(mx, S[i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      P[i] = keep[i] ? weights[i] * std::exp(S[i] - mx) : 0.0;
      sum += P[i];
    }
    for (std::size_t i = 0; i < n; ++i) P[i] /= sum;
  } else {
    // shift by the raw kept maximum before the log weights touch the scores;
    // the shifted values then match the unshifted run bit for bit
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
      if (keep[i]) mx = std::max(mx, S[i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      P[i] = keep[i] ? std::exp((S[i] - mx) + std::log(weights[i])) : 0.0;
      sum += P[i];
    }
    for (std::size_t i = 0; i < n; ++i) P[i] /= sum;
  }

  if (!scores.requires_grad()) return out;
  // d p_i / d s_j = p_i (delta_ij - p_j); the saved max is constant in s
  return stamp(out, "attention_normalize", [scores, out, n]() {
    if (!out.has_grad()) return;
    const double* G = out.grad().data();
    const double* P = out.data().data();
    double* dS = scores.grad().data();
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += G[i] * P[i];
    for (std::size_t i = 0; i < n; ++i) dS[i] += P[i] * (G[i] - dot);
  });
}

Tensor Tape::elementwise_max(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("elementwise_max: empty part list");
  for (const Tensor& p : parts)
    if (p.shape() != parts[0].shape())
      throw std::invalid_argument("elementwise_max: shape mismatch " +
                                  shape_str(parts[0].shape()) + " vs " + shape_str(p.shape()));
  const std::size_t n = parts[0].size();
  Tensor out = Tensor::zeros(parts[0].shape());
  std::vector<int> winner(n, 0);
  double* O = out.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    double bv = parts[0].data()[i];
    int bt = 0;
    for (std::size_t t = 1; t < parts.size(); ++t) {
      const double v = parts[t].data()[i];
      if (v > bv) {
        bv = v;
        bt = static_cast<int>(t);
      }
    }
    O[i] = bv;
    winner[i] = bt;
  }

  bool any = false;
  for (const Tensor& p : parts) any = any || p.requires_grad();
  if (!any) return out;
  return stamp(out, "elementwise_max", [parts, out, winner = std::move(winner), n]() {
    if (!out.has_grad()) return;
    const double* G = out.grad().data();
    for (std::size_t i = 0; i < n; ++i) {
      const Tensor& w = parts[static_cast<std::size_t>(winner[i])];
      if (w.requires_grad()) w.grad()[i] += G[i];
    }
  });
}

Tensor Tape::normalize_sum(const Tensor& t) {
  const std::size_t n = t.size();
  const double* X = t.data().data();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (X[i] < 0.0) throw std::invalid_argument("normalize_sum: negative entry");
    sum += X[i];
  }
  if (sum <= 0.0) throw std::invalid_argument("normalize_sum: sum is not positive");

  Tensor out = Tensor::zeros(t.shape());
  double* P = out.data().data();
  for (std::size_t i = 0; i < n; ++i) P[i] = X[i] / sum;

  if (!t.requires_grad()) return out;
  return stamp(out, "normalize_sum", [t, out, sum, n]() {
    if (!out.has_grad()) return;
    const double* G = out.grad().data();
    const double* P = out.data().data();
    double* dX = t.grad().data();
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += G[i] * P[i];
    for (std::size_t i = 0; i < n; ++i) dX[i] += (G[i] - dot) / sum;
  });
}

void Tape::backward(const Tensor& loss) {
  if (!loss.is_scalar())
    throw std::invalid_argument("backward: loss must be scalar, got " + shape_str(loss.shape()));
  loss.grad()[0] += 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) it->backprop();
}

}  // namespace relex::ad
