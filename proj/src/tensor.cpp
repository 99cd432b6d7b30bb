#include "gnncl/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

namespace gnncl {

namespace {

std::atomic<std::uint64_t> g_next_tape_id{1};

std::shared_ptr<detail::TensorNode> make_node(std::size_t rows,
                                              std::size_t cols,
                                              bool requires_grad) {
  auto node = std::make_shared<detail::TensorNode>();
  node->shape = {rows, cols};
  node->value.assign(rows * cols, 0.0);
  node->grad.assign(rows * cols, 0.0);
  node->requires_grad = requires_grad;
  return node;
}

}  // namespace

Tensor Tensor::zeros(std::size_t rows, std::size_t cols, bool requires_grad) {
  Tensor t;
  t.node_ = make_node(rows, cols, requires_grad);
  return t;
}

Tensor Tensor::from_data(std::size_t rows, std::size_t cols,
                         std::vector<double> data, bool requires_grad) {
  if (data.size() != rows * cols) {
    throw std::invalid_argument("Tensor::from_data: " +
                                std::to_string(data.size()) +
                                " values for shape " + std::to_string(rows) +
                                "x" + std::to_string(cols));
  }
  Tensor t;
  t.node_ = make_node(rows, cols, requires_grad);
  t.node_->value = std::move(data);
  return t;
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  return from_data(1, 1, {v}, requires_grad);
}

Tensor Tensor::glorot(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor t = zeros(rows, cols, true);
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (auto& v : t.data()) v = rng.uniform(-a, a);
  return t;
}

double Tensor::item() const {
  if (size() != 1) {
    throw std::invalid_argument("Tensor::item: tensor is not a scalar");
  }
  return node_->value[0];
}

void Tensor::zero_grad() const {
  std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::detached() const {
  Tensor t;
  t.node_ = make_node(rows(), cols(), false);
  t.node_->value = node_->value;
  return t;
}

Tape::Tape() : id_(g_next_tape_id.fetch_add(1)) {}

Tensor Tape::fresh(std::size_t rows, std::size_t cols) {
  Tensor t = Tensor::zeros(rows, cols, false);
  t.node_->tape_id = id_;
  return t;
}

void Tape::use(const Tensor& t, const char* op) const {
  if (!t.valid()) {
    throw std::invalid_argument(std::string(op) + ": empty tensor");
  }
  if (t.node_->tape_id != 0 && t.node_->tape_id != id_) {
    throw std::invalid_argument(std::string(op) +
                                ": tensor belongs to a different tape");
  }
}

void Tape::record(std::function<void()> back) {
  steps_.push_back(std::move(back));
}

Tensor Tape::matmul(const Tensor& a, const Tensor& b) {
  use(a, "matmul");
  use(b, "matmul");
  if (a.cols() != b.rows()) {
    throw std::invalid_argument(
        "matmul: inner dimensions differ (" + std::to_string(a.cols()) +
        " vs " + std::to_string(b.rows()) + ")");
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Tensor out = fresh(m, n);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t l = 0; l < k; ++l) {
      const double av = pa[i * k + l];
      if (av == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) po[i * n + j] += av * pb[l * n + j];
    }
  }
  record([a, b, out, m, k, n]() {
    const auto& go = out.grad();
    auto& ga = a.grad();
    auto& gb = b.grad();
    const auto& va = a.data();
    const auto& vb = b.data();
    // dA = dOut * B^T, dB = A^T * dOut
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t l = 0; l < k; ++l) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          acc += go[i * n + j] * vb[l * n + j];
        }
        ga[i * k + l] += acc;
      }
    }
    for (std::size_t l = 0; l < k; ++l) {
      for (std::size_t i = 0; i < m; ++i) {
        const double av = va[i * k + l];
        if (av == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) {
          gb[l * n + j] += av * go[i * n + j];
        }
      }
    }
  });
  return out;
}

namespace {
void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
  }
}
}  // namespace

Tensor Tape::add(const Tensor& a, const Tensor& b) {
  use(a, "add");
  use(b, "add");
  check_same_shape(a, b, "add");
  Tensor out = fresh(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.data()[i] = a.data()[i] + b.data()[i];
  }
  record([a, b, out]() {
    for (std::size_t i = 0; i < out.size(); ++i) {
      a.grad()[i] += out.grad()[i];
      b.grad()[i] += out.grad()[i];
    }
  });
  return out;
}

Tensor Tape::sub(const Tensor& a, const Tensor& b) {
  use(a, "sub");
  use(b, "sub");
  check_same_shape(a, b, "sub");
  Tensor out = fresh(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.data()[i] = a.data()[i] - b.data()[i];
  }
  record([a, b, out]() {
    for (std::size_t i = 0; i < out.size(); ++i) {
      a.grad()[i] += out.grad()[i];
      b.grad()[i] -= out.grad()[i];
    }
  });
  return out;
}

Tensor Tape::mul(const Tensor& a, const Tensor& b) {
  use(a, "mul");
  use(b, "mul");
  check_same_shape(a, b, "mul");
  Tensor out = fresh(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.data()[i] = a.data()[i] * b.data()[i];
  }
  record([a, b, out]() {
    for (std::size_t i = 0; i < out.size(); ++i) {
      a.grad()[i] += out.grad()[i] * b.data()[i];
      b.grad()[i] += out.grad()[i] * a.data()[i];
    }
  });
  return out;
}

Tensor Tape::add_rowvec(const Tensor& x, const Tensor& row) {
  use(x, "add_rowvec");
  use(row, "add_rowvec");
  if (row.rows() != 1 || row.cols() != x.cols()) {
    throw std::invalid_argument("add_rowvec: row vector must be 1x" +
                                std::to_string(x.cols()));
  }
  const std::size_t m = x.rows(), n = x.cols();
  Tensor out = fresh(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out.data()[i * n + j] = x.data()[i * n + j] + row.data()[j];
    }
  }
  record([x, row, out, m, n]() {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        x.grad()[i * n + j] += out.grad()[i * n + j];
        row.grad()[j] += out.grad()[i * n + j];
      }
    }
  });
  return out;
}

Tensor Tape::scale(const Tensor& x, double c) {
  use(x, "scale");
  Tensor out = fresh(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) out.data()[i] = c * x.data()[i];
  record([x, out, c]() {
    for (std::size_t i = 0; i < out.size(); ++i) {
      x.grad()[i] += c * out.grad()[i];
    }
  });
  return out;
}

Tensor Tape::relu(const Tensor& x) {
  use(x, "relu");
  Tensor out = fresh(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.data()[i] = x.data()[i] > 0.0 ? x.data()[i] : 0.0;
  }
  record([x, out]() {
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (x.data()[i] > 0.0) {
        x.grad()[i] += out.grad()[i];
      }
    }
  });
  return out;
}

Tensor Tape::sigmoid(const Tensor& x) {
  use(x, "sigmoid");
  Tensor out = fresh(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.data()[i] = 1.0 / (1.0 + std::exp(-x.data()[i]));
  }
  record([x, out]() {
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double s = out.data()[i];
      x.grad()[i] += out.grad()[i] * s * (1.0 - s);
    }
  });
  return out;
}

Tensor Tape::tanh(const Tensor& x) {
  use(x, "tanh");
  Tensor out = fresh(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.data()[i] = std::tanh(x.data()[i]);
  }
  record([x, out]() {
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double t = out.data()[i];
      x.grad()[i] += out.grad()[i] * (1.0 - t * t);
    }
  });
  return out;
}

Tensor Tape::l1_row_norm(const Tensor& x) {
  use(x, "l1_row_norm");
  const std::size_t m = x.rows(), n = x.cols();
  Tensor out = fresh(m, 1);
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += std::abs(x.data()[i * n + j]);
    out.data()[i] = acc;
  }
  record([x, out, m, n]() {
    // subgradient: sign(x), 0 at the kink
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double v = x.data()[i * n + j];
        const double s = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
        x.grad()[i * n + j] += s * out.grad()[i];
      }
    }
  });
  return out;
}

Tensor Tape::concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) {
    throw std::invalid_argument("concat_cols: no tensors given");
  }
  const std::size_t m = parts.front().rows();
  std::size_t total = 0;
  for (const auto& p : parts) {
    use(p, "concat_cols");
    if (p.rows() != m) {
      throw std::invalid_argument("concat_cols: row count mismatch");
    }
    total += p.cols();
  }
  Tensor out = fresh(m, total);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const std::size_t n = p.cols();
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        out.data()[i * total + offset + j] = p.data()[i * n + j];
      }
    }
    offset += n;
  }
  record([parts, out, m, total]() {
    std::size_t off = 0;
    for (const auto& p : parts) {
      const std::size_t n = p.cols();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          p.grad()[i * n + j] +=
              out.grad()[i * total + off + j];
        }
      }
      off += n;
    }
  });
  return out;
}

Tensor Tape::slice_cols(const Tensor& x, std::size_t begin, std::size_t count) {
  use(x, "slice_cols");
  if (begin + count > x.cols()) {
    throw std::invalid_argument("slice_cols: range out of bounds");
  }
  const std::size_t m = x.rows(), n = x.cols();
  Tensor out = fresh(m, count);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < count; ++j) {
      out.data()[i * count + j] = x.data()[i * n + begin + j];
    }
  }
  record([x, out, begin, count, m, n]() {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < count; ++j) {
        x.grad()[i * n + begin + j] +=
            out.grad()[i * count + j];
      }
    }
  });
  return out;
}

Tensor Tape::gather_rows(const Tensor& x, const std::vector<std::size_t>& idx) {
  use(x, "gather_rows");
  const std::size_t n = x.cols();
  for (std::size_t r : idx) {
    if (r >= x.rows()) {
      throw std::invalid_argument("gather_rows: index out of range");
    }
  }
  Tensor out = fresh(idx.size(), n);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out.data()[i * n + j] = x.data()[idx[i] * n + j];
    }
  }
  record([x, out, idx, n]() {
    for (std::size_t i = 0; i < idx.size(); ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        x.grad()[idx[i] * n + j] += out.grad()[i * n + j];
      }
    }
  });
  return out;
}

Tensor Tape::sum_all(const Tensor& x) {
  use(x, "sum_all");
  Tensor out = fresh(1, 1);
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  out.data()[0] = acc;
  record([x, out]() {
    for (std::size_t i = 0; i < x.size(); ++i) {
      x.grad()[i] += out.grad()[0];
    }
  });
  return out;
}

Tensor Tape::mean_all(const Tensor& x) {
  use(x, "mean_all");
  if (x.size() == 0) throw std::invalid_argument("mean_all: empty tensor");
  Tensor out = fresh(1, 1);
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  const double inv = 1.0 / static_cast<double>(x.size());
  out.data()[0] = acc * inv;
  record([x, out, inv]() {
    for (std::size_t i = 0; i < x.size(); ++i) {
      x.grad()[i] += inv * out.grad()[0];
    }
  });
  return out;
}

Tensor Tape::conv1d_same(const Tensor& x, const Tensor& kernels,
                         const Tensor& bias) {
  use(x, "conv1d_same");
  use(kernels, "conv1d_same");
  use(bias, "conv1d_same");
  const std::size_t m = x.rows(), d = x.cols();
  const std::size_t kcount = kernels.rows(), w = kernels.cols();
  if (w % 2 == 0) {
    throw std::invalid_argument("conv1d_same: kernel window must be odd");
  }
  if (bias.rows() != 1 || bias.cols() != kcount) {
    throw std::invalid_argument("conv1d_same: bias must be 1x" +
                                std::to_string(kcount));
  }
  if (d < w) {
    throw std::invalid_argument("conv1d_same: input shorter than window");
  }
  const std::size_t half = w / 2;
  Tensor out = fresh(m, kcount * d);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t kk = 0; kk < kcount; ++kk) {
      for (std::size_t i = 0; i < d; ++i) {
        double acc = bias.data()[kk];
        for (std::size_t o = 0; o < w; ++o) {
          const std::ptrdiff_t src =
              static_cast<std::ptrdiff_t>(i + o) -
              static_cast<std::ptrdiff_t>(half);
          if (src < 0 || src >= static_cast<std::ptrdiff_t>(d)) continue;
          acc += kernels.data()[kk * w + o] * x.data()[r * d + src];
        }
        out.data()[r * kcount * d + kk * d + i] = acc;
      }
    }
  }
  record([x, kernels, bias, out, m, d, kcount, w, half]() {
    auto& gx = x.grad();
    auto& gk = kernels.grad();
    auto& gb = bias.grad();
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t kk = 0; kk < kcount; ++kk) {
        for (std::size_t i = 0; i < d; ++i) {
          const double go = out.grad()[r * kcount * d + kk * d + i];
          if (go == 0.0) continue;
          gb[kk] += go;
          for (std::size_t o = 0; o < w; ++o) {
            const std::ptrdiff_t src =
                static_cast<std::ptrdiff_t>(i + o) -
                static_cast<std::ptrdiff_t>(half);
            if (src < 0 || src >= static_cast<std::ptrdiff_t>(d)) continue;
            gk[kk * w + o] += go * x.data()[r * d + src];
            gx[r * d + src] += go * kernels.data()[kk * w + o];
          }
        }
      }
    }
  });
  return out;
}

Tensor Tape::max_pool_blocks(const Tensor& x, std::size_t blocks,
                             std::size_t window) {
  use(x, "max_pool_blocks");
  if (window == 0) throw std::invalid_argument("max_pool_blocks: window == 0");
  if (blocks == 0 || x.cols() % blocks != 0) {
    throw std::invalid_argument("max_pool_blocks: columns not divisible into " +
                                std::to_string(blocks) + " blocks");
  }
  const std::size_t m = x.rows();
  const std::size_t d = x.cols() / blocks;
  if (d == 0) throw std::invalid_argument("max_pool_blocks: empty feature map");
  const std::size_t pd = (d + window - 1) / window;
  Tensor out = fresh(m, blocks * pd);
  auto argmax = std::make_shared<std::vector<std::size_t>>(m * blocks * pd);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t b = 0; b < blocks; ++b) {
      for (std::size_t p = 0; p < pd; ++p) {
        const std::size_t lo = p * window;
        const std::size_t hi = std::min(lo + window, d);
        std::size_t best = lo;
        double best_v = x.data()[r * blocks * d + b * d + lo];
        for (std::size_t j = lo + 1; j < hi; ++j) {
          const double v = x.data()[r * blocks * d + b * d + j];
          if (v > best_v) {
            best_v = v;
            best = j;
          }
        }
        out.data()[r * blocks * pd + b * pd + p] = best_v;
        (*argmax)[r * blocks * pd + b * pd + p] = best;
      }
    }
  }
  record([x, out, argmax, m, blocks, d, pd]() {
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t b = 0; b < blocks; ++b) {
        for (std::size_t p = 0; p < pd; ++p) {
          const std::size_t src = (*argmax)[r * blocks * pd + b * pd + p];
          x.grad()[r * blocks * d + b * d + src] +=
              out.grad()[r * blocks * pd + b * pd + p];
        }
      }
    }
  });
  return out;
}

Tensor Tape::bce_mean(const Tensor& probs, const std::vector<double>& labels) {
  use(probs, "bce_mean");
  if (probs.size() == 0) throw std::invalid_argument("bce_mean: empty batch");
  if (probs.cols() != 1 || probs.rows() != labels.size()) {
    throw std::invalid_argument("bce_mean: expected [" +
                                std::to_string(labels.size()) +
                                " x 1] probabilities");
  }
  constexpr double kLo = 1e-7;
  constexpr double kHi = 1.0 - 1e-7;
  const std::size_t m = probs.rows();
  Tensor out = fresh(1, 1);
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double q = std::clamp(probs.data()[i], kLo, kHi);
    const double y = labels[i];
    acc -= y * std::log(q) + (1.0 - y) * std::log(1.0 - q);
  }
  out.data()[0] = acc / static_cast<double>(m);
  record([probs, out, labels, m]() {
    const double inv = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double raw = probs.data()[i];
      if (raw <= kLo || raw >= kHi) continue;  // clamp saturates
      const double y = labels[i];
      const double g = (raw - y) / (raw * (1.0 - raw));
      probs.grad()[i] += inv * g * out.grad()[0];
    }
  });
  return out;
}

Tensor Tape::apply_coeffs(const SparseCoeffs& coeffs, const Tensor& x) {
  use(x, "apply_coeffs");
  if (x.rows() != coeffs.size) {
    throw std::invalid_argument("apply_coeffs: universe size mismatch");
  }
  const std::size_t n = x.cols();
  Tensor out = fresh(coeffs.size, n);
  for (std::size_t e = 0; e < coeffs.coeff.size(); ++e) {
    const std::size_t r = coeffs.row[e], c = coeffs.col[e];
    const double w = coeffs.coeff[e];
    for (std::size_t j = 0; j < n; ++j) {
      out.data()[r * n + j] += w * x.data()[c * n + j];
    }
  }
  auto entries = std::make_shared<SparseCoeffs>(coeffs);
  record([x, out, entries, n]() {
    for (std::size_t e = 0; e < entries->coeff.size(); ++e) {
      const std::size_t r = entries->row[e], c = entries->col[e];
      const double w = entries->coeff[e];
      for (std::size_t j = 0; j < n; ++j) {
        x.grad()[c * n + j] += w * out.grad()[r * n + j];
      }
    }
  });
  return out;
}

void Tape::backward(const Tensor& loss) {
  if (!loss.valid() || loss.size() != 1) {
    throw std::invalid_argument("backward: loss must be a scalar tensor");
  }
  if (loss.node_->tape_id != id_) {
    throw std::invalid_argument(
        "backward: loss was not produced by operations on this tape");
  }
  if (consumed_) {
    throw std::logic_error("backward: tape already consumed");
  }
  consumed_ = true;
  loss.node_->grad[0] = 1.0;
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
}

}  // namespace gnncl
