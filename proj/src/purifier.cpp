#include "gnncl/purifier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gnncl {

double pairwise_distance(const Mlp& mlp, const double* h_v, const double* h_u) {
  const std::size_t in = mlp.input_width();
  std::vector<double> both(2 * in);
  std::copy(h_v, h_v + in, both.begin());
  std::copy(h_u, h_u + in, both.begin() + in);
  const std::vector<double> pred = mlp.predict(both, 2);
  const std::size_t out = mlp.output_width();
  double d = 0.0;
  for (std::size_t c = 0; c < out; ++c) d += std::abs(pred[c] - pred[out + c]);
  return d;
}

double similarity(double distance) {
  if (distance < 0.0)
    throw std::invalid_argument("similarity: negative distance");
  return 1.0 / (1.0 + distance);
}

Tensor purifier_loss(Tape& tape, const Mlp& mlp,
                     const std::vector<Tensor>& per_relation,
                     const std::vector<double>& labels) {
  if (per_relation.empty())
    throw std::invalid_argument("purifier_loss: no relations");
  if (labels.empty())
    throw std::invalid_argument("purifier_loss: empty batch");
  Tensor total;
  for (const Tensor& h : per_relation) {
    Tensor term = tape.bce_mean(mlp.forward(tape, h), labels);
    total = total.valid() ? tape.add(total, term) : term;
  }
  return total;
}

std::size_t sample_count(double p, std::size_t neighbor_count) {
  if (!(p > 0.0 && p <= 1.0))
    throw std::invalid_argument("sample_count: p must lie in (0,1]");
  if (neighbor_count == 0) return 0;
  const auto wanted = static_cast<std::size_t>(
      std::ceil(p * static_cast<double>(neighbor_count)));
  return std::min(wanted, neighbor_count);
}

std::vector<std::uint32_t> select_neighbors(
    const std::vector<std::pair<std::uint32_t, double>>& distances,
    std::size_t count) {
  if (count > distances.size())
    throw std::invalid_argument("select_neighbors: count exceeds neighborhood");
  std::vector<std::pair<std::uint32_t, double>> order = distances;
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second < b.second : a.first < b.first;
  });
  std::vector<std::uint32_t> chosen;
  chosen.reserve(count);
  for (std::size_t i = 0; i < count; ++i) chosen.push_back(order[i].first);
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

}  // namespace gnncl
