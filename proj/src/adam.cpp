#include "gnncl/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace gnncl {

Adam::Adam(std::vector<Tensor> params, double lr, double beta1, double beta2,
           double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const Tensor& p : params_) {
    m_.emplace_back(p.size(), 0.0);
    v_.emplace_back(p.size(), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    std::vector<double>& w = params_[i].data();
    const std::vector<double>& g = params_[i].grad();
    std::vector<double>& m = m_[i];
    std::vector<double>& v = v_[i];
    for (std::size_t k = 0; k < w.size(); ++k) {
      m[k] = beta1_ * m[k] + (1.0 - beta1_) * g[k];
      v[k] = beta2_ * v[k] + (1.0 - beta2_) * g[k] * g[k];
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      w[k] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

void Adam::zero_grad() {
  for (Tensor& p : params_) p.zero_grad();
}

void Adam::restore(std::size_t t, std::vector<std::vector<double>> m,
                   std::vector<std::vector<double>> v) {
  if (m.size() != m_.size() || v.size() != v_.size())
    throw std::invalid_argument("Adam::restore: buffer count mismatch");
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i].size() != m_[i].size() || v[i].size() != v_[i].size())
      throw std::invalid_argument("Adam::restore: buffer size mismatch");
  t_ = t;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace gnncl
