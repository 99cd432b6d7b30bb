#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gnncl/tensor.hpp"

namespace gnncl {

// Multi-layer perceptron with ReLU hidden activations and a sigmoid output,
// so forward() always lands in (0, 1) per component.
class Mlp {
 public:
  Mlp() = default;
  // dims = {input, hidden..., output}; weights glorot-uniform, biases zero.
  Mlp(const std::vector<std::size_t>& dims, Rng& rng);

  std::size_t input_width() const;
  std::size_t output_width() const;

  // sigma(MLP(h)) recorded on the tape; h is [batch x input_width].
  Tensor forward(Tape& tape, const Tensor& h) const;

  // Tape-free evaluation for similarity scoring; rows-major input of
  // `rows` x input_width values, returns rows x output_width.
  std::vector<double> predict(const std::vector<double>& x,
                              std::size_t rows) const;

  std::vector<Tensor> parameters() const;
  void collect_named(const std::string& prefix,
                     std::vector<std::pair<std::string, Tensor>>& out) const;

 private:
  struct Layer {
    Tensor weight;  // [in x out]
    Tensor bias;    // [1 x out]
  };
  std::vector<Layer> layers_;
};

}  // namespace gnncl
