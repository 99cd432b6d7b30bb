#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gnncl/rng.hpp"

namespace gnncl {

class Tape;

namespace detail {

struct TensorNode {
  std::vector<std::size_t> shape;  // row-major; rank 2 throughout
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::uint64_t tape_id = 0;  // 0 = leaf, usable on any tape
};

}  // namespace detail

// Dense 64-bit float matrix participating in reverse-mode differentiation.
// A Tensor is a cheap shared handle: copies alias the same storage, which is
// what lets the tape's backward closures see gradients accumulate.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::size_t rows, std::size_t cols,
                      bool requires_grad = false);
  static Tensor from_data(std::size_t rows, std::size_t cols,
                          std::vector<double> data, bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);
  // uniform(-a, a) with a = sqrt(6 / (rows + cols))
  static Tensor glorot(std::size_t rows, std::size_t cols, Rng& rng);

  bool valid() const { return node_ != nullptr; }
  const std::vector<std::size_t>& shape() const { return node_->shape; }
  std::size_t rows() const { return node_->shape[0]; }
  std::size_t cols() const { return node_->shape[1]; }
  std::size_t size() const { return node_->value.size(); }

  // A Tensor is a handle: const-ness of the handle does not freeze the
  // shared storage, mirroring shared_ptr semantics. Backward closures rely
  // on this to accumulate into captured operands.
  std::vector<double>& data() const { return node_->value; }
  std::vector<double>& grad() const { return node_->grad; }

  double at(std::size_t r, std::size_t c) const {
    return node_->value[r * cols() + c];
  }
  double& at(std::size_t r, std::size_t c) {
    return node_->value[r * cols() + c];
  }

  // Value of a 1x1 tensor.
  double item() const;

  bool requires_grad() const { return node_->requires_grad; }
  void zero_grad() const;

  // Leaf copy of the current values, detached from any tape.
  Tensor detached() const;

  bool same_storage(const Tensor& other) const { return node_ == other.node_; }

 private:
  std::shared_ptr<detail::TensorNode> node_;
  friend class Tape;
};

// Sparse constant linear map used for normalized-adjacency products.
// Entries are (row, col, coefficient) over a square universe of m nodes.
struct SparseCoeffs {
  std::size_t size = 0;
  std::vector<std::size_t> row;
  std::vector<std::size_t> col;
  std::vector<double> coeff;

  void add(std::size_t r, std::size_t c, double v) {
    row.push_back(r);
    col.push_back(c);
    coeff.push_back(v);
  }
};

// Define-by-run record of primitive operations. Rebuilt per forward pass;
// backward() replays the record once, in reverse, then the tape is spent.
class Tape {
 public:
  Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Tensor matmul(const Tensor& a, const Tensor& b);
  Tensor add(const Tensor& a, const Tensor& b);
  Tensor sub(const Tensor& a, const Tensor& b);
  Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
  Tensor add_rowvec(const Tensor& x, const Tensor& row);
  Tensor scale(const Tensor& x, double c);
  Tensor relu(const Tensor& x);
  Tensor sigmoid(const Tensor& x);
  Tensor tanh(const Tensor& x);
  // Row-wise L1 norm: [m x n] -> [m x 1].
  Tensor l1_row_norm(const Tensor& x);
  Tensor concat_cols(const std::vector<Tensor>& parts);
  Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t count);
  Tensor gather_rows(const Tensor& x, const std::vector<std::size_t>& idx);
  Tensor sum_all(const Tensor& x);
  Tensor mean_all(const Tensor& x);
  // Same-length 1-D convolution with zero padding, no activation.
  // x: [m x d], kernels: [K x w] (w odd), bias: [1 x K] -> [m x K*d],
  // kernel-major blocks.
  Tensor conv1d_same(const Tensor& x, const Tensor& kernels, const Tensor& bias);
  // Non-overlapping max windows applied per block; final partial window kept.
  // x: [m x blocks*d] -> [m x blocks*ceil(d/window)]. Ties route the gradient
  // to the first index.
  Tensor max_pool_blocks(const Tensor& x, std::size_t blocks,
                         std::size_t window);
  // Mean binary cross-entropy of probabilities against {0,1} labels.
  // Probabilities are clamped to [1e-7, 1 - 1e-7] before the logs.
  Tensor bce_mean(const Tensor& probs, const std::vector<double>& labels);
  // y = C x for a constant sparse matrix C; gradient flows to x only.
  Tensor apply_coeffs(const SparseCoeffs& coeffs, const Tensor& x);

  // Populates grad on every tensor reachable from loss. Loss must be a 1x1
  // tensor produced by this tape; a tape can be consumed exactly once.
  void backward(const Tensor& loss);

  std::size_t op_count() const { return steps_.size(); }

 private:
  Tensor fresh(std::size_t rows, std::size_t cols);
  void use(const Tensor& t, const char* op) const;
  void record(std::function<void()> back);

  std::uint64_t id_;
  bool consumed_ = false;
  std::vector<std::function<void()>> steps_;
};

}  // namespace gnncl
