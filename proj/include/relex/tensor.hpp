#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace relex::ad {

std::string shape_str(const std::vector<int>& shape);

// Dense fp64 tensor, rank 1 or 2, row-major. A Tensor is a shared handle:
// copies alias the same storage, so parameters can live across tapes while
// ops and the optimizer see one buffer. The gradient buffer is allocated on
// first access and always matches the data length.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor full(std::vector<int> shape, double value, bool requires_grad = false);
  static Tensor from_values(std::vector<int> shape, std::vector<double> values,
                            bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const std::vector<int>& shape() const;
  int rank() const;
  int dim(int axis) const;
  std::size_t size() const;
  bool is_scalar() const { return size() == 1; }

  std::vector<double>& data() const;
  double value() const;  // scalar tensors only
  double at(int i) const;
  double at(int r, int c) const;

  bool has_grad() const;
  std::vector<double>& grad() const;  // allocates zeros on first use
  void zero_grad() const;
  bool requires_grad() const;
  void set_requires_grad(bool v) const;

  // -1 marks a leaf; ops stamp the producing tape node otherwise
  long node_id() const;
  void set_node_id(long id) const;

  // deep copy of shape/data/flags; the copy is a leaf with no grad
  Tensor clone() const;

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  struct Impl {
    std::vector<int> shape;
    std::vector<double> data;
    std::vector<double> grad;
    bool requires_grad = false;
    long node_id = -1;
  };

  explicit Tensor(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}
  Impl& ref() const;

  std::shared_ptr<Impl> impl_;
};

}  // namespace relex::ad
