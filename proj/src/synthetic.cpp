#include "gnncl/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gnncl/rng.hpp"

namespace gnncl {

void SyntheticConfig::validate() const {
  if (num_nodes < 10)
    throw std::invalid_argument("synthetic: num_nodes must be >= 10");
  if (feature_dim == 0)
    throw std::invalid_argument("synthetic: feature_dim must be positive");
  if (relation_count == 0)
    throw std::invalid_argument("synthetic: relation_count must be positive");
  for (double p : {fraud_ratio, intra_prob, camouflage_rate})
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("synthetic: probabilities must lie in [0,1]");
  const auto fraud = static_cast<std::size_t>(
      std::lround(fraud_ratio * static_cast<double>(num_nodes)));
  if (fraud == 0)
    throw std::invalid_argument("synthetic: fraud_ratio yields 0 fraud nodes");
  if (fraud >= num_nodes)
    throw std::invalid_argument("synthetic: fraud_ratio yields 0 benign nodes");
}

MultiRelationGraph generate_synthetic(const SyntheticConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const std::size_t n = cfg.num_nodes;
  const std::size_t d = cfg.feature_dim;
  const auto n_fraud = static_cast<std::size_t>(
      std::lround(cfg.fraud_ratio * static_cast<double>(n)));

  MultiRelationGraph g;
  g.num_nodes = n;
  g.feature_dim = d;

  std::vector<std::uint32_t> order(n);
  for (std::uint32_t v = 0; v < n; ++v) order[v] = v;
  rng.shuffle(order);
  g.labels.assign(n, 0);
  for (std::size_t i = 0; i < n_fraud; ++i) g.labels[order[i]] = 1;

  std::vector<std::uint32_t> benign;
  for (std::uint32_t v = 0; v < n; ++v)
    if (!g.labels[v]) benign.push_back(v);

  // Class means 2.0 apart in Euclidean distance, spread over all dimensions.
  const double shift = 2.0 / std::sqrt(static_cast<double>(d));
  g.features.resize(n * d);
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t c = 0; c < d; ++c)
      g.features[v * d + c] = rng.normal() + (g.labels[v] ? shift : 0.0);

  const double inter_prob = cfg.intra_prob / 10.0;
  for (std::size_t r = 0; r < cfg.relation_count; ++r) {
    Relation rel;
    rel.name = "r" + std::to_string(r);
    for (std::uint32_t u = 0; u + 1 < n; ++u) {
      for (std::uint32_t v = u + 1; v < n; ++v) {
        const double p =
            g.labels[u] == g.labels[v] ? cfg.intra_prob : inter_prob;
        if (rng.bernoulli(p)) rel.edges.emplace_back(u, v);
      }
    }
    for (Edge& e : rel.edges) {
      const bool u_fraud = g.labels[e.first] != 0;
      const bool v_fraud = g.labels[e.second] != 0;
      if (!u_fraud && !v_fraud) continue;
      if (!rng.bernoulli(cfg.camouflage_rate)) continue;
      const std::uint32_t kept = u_fraud ? e.first : e.second;
      e = {kept, benign[rng.below(benign.size())]};
    }
    canonicalize_edges(rel.edges);
    g.relations.push_back(std::move(rel));
  }

  g.validate();
  return g;
}

}  // namespace gnncl
