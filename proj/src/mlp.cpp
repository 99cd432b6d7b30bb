#include "gnncl/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gnncl {

Mlp::Mlp(const std::vector<std::size_t>& dims, Rng& rng) {
  if (dims.size() < 2) throw std::invalid_argument("Mlp: need at least input and output dims");
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    Layer layer;
    layer.weight = Tensor::glorot(dims[i], dims[i + 1], rng);
    layer.bias = Tensor::zeros(1, dims[i + 1], true);
    layers_.push_back(layer);
  }
}

std::size_t Mlp::input_width() const { return layers_.front().weight.rows(); }
std::size_t Mlp::output_width() const { return layers_.back().weight.cols(); }

Tensor Mlp::forward(Tape& tape, const Tensor& h) const {
  Tensor cur = h;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    cur = tape.add_rowvec(tape.matmul(cur, layers_[i].weight), layers_[i].bias);
    cur = (i + 1 == layers_.size()) ? tape.sigmoid(cur) : tape.relu(cur);
  }
  return cur;
}

std::vector<double> Mlp::predict(const std::vector<double>& x, std::size_t rows) const {
  const std::size_t in = input_width();
  if (x.size() != rows * in) throw std::invalid_argument("Mlp::predict: size mismatch");
  std::vector<double> cur = x;
  std::size_t width = in;
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const Layer& layer = layers_[li];
    const std::size_t out = layer.weight.cols();
    const std::vector<double>& w = layer.weight.data();
    const std::vector<double>& b = layer.bias.data();
    std::vector<double> next(rows * out);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < out; ++c) {
        double acc = b[c];
        for (std::size_t k = 0; k < width; ++k) acc += cur[r * width + k] * w[k * out + c];
        next[r * out + c] = (li + 1 == layers_.size())
                                ? 1.0 / (1.0 + std::exp(-acc))
                                : std::max(acc, 0.0);
      }
    }
    cur = std::move(next);
    width = out;
  }
  return cur;
}

std::vector<Tensor> Mlp::parameters() const {
  std::vector<Tensor> out;
  for (const Layer& layer : layers_) {
    out.push_back(layer.weight);
    out.push_back(layer.bias);
  }
  return out;
}

void Mlp::collect_named(const std::string& prefix,
                        std::vector<std::pair<std::string, Tensor>>& out) const {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    out.emplace_back(prefix + ".w" + std::to_string(i), layers_[i].weight);
    out.emplace_back(prefix + ".b" + std::to_string(i), layers_[i].bias);
  }
}

}  // namespace gnncl
