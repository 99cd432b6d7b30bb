#pragma once

#include <cstddef>
#include <vector>

#include "gnncl/tensor.hpp"

namespace gnncl {

// Adam with bias correction. One optimizer instance owns the moment
// buffers for a fixed parameter list; step() consumes .grad() in place.
class Adam {
 public:
  explicit Adam(std::vector<Tensor> params, double lr = 0.01,
                double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step();
  void zero_grad();

  std::size_t t() const { return t_; }
  // Moment buffers in parameter order, for checkpointing.
  const std::vector<std::vector<double>>& m() const { return m_; }
  const std::vector<std::vector<double>>& v() const { return v_; }
  void restore(std::size_t t, std::vector<std::vector<double>> m,
               std::vector<std::vector<double>> v);

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
};

}  // namespace gnncl
