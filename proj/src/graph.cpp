#include "gnncl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gnncl/rng.hpp"

namespace gnncl {

std::size_t MultiRelationGraph::total_edges() const {
  std::size_t n = 0;
  for (const Relation& r : relations) n += r.edges.size();
  return n;
}

void MultiRelationGraph::validate() const {
  if (features.size() != num_nodes * feature_dim)
    throw std::invalid_argument("graph: feature matrix size mismatch");
  if (labels.size() != num_nodes)
    throw std::invalid_argument("graph: label count mismatch");
  for (std::uint8_t y : labels)
    if (y > 1) throw std::invalid_argument("graph: label outside {0,1}");
  for (const Relation& rel : relations) {
    const Edge* prev = nullptr;
    for (const Edge& e : rel.edges) {
      if (e.first >= e.second)
        throw std::invalid_argument("relation " + rel.name +
                                    ": edge not canonical (u < v)");
      if (e.second >= num_nodes)
        throw std::invalid_argument("relation " + rel.name +
                                    ": endpoint out of range");
      if (prev && !(*prev < e))
        throw std::invalid_argument("relation " + rel.name +
                                    ": edges not sorted unique");
      prev = &e;
    }
  }
}

void canonicalize_edges(std::vector<Edge>& edges) {
  for (Edge& e : edges) {
    if (e.first == e.second)
      throw std::invalid_argument("self-loop edge " + std::to_string(e.first));
    if (e.first > e.second) std::swap(e.first, e.second);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

std::vector<std::vector<std::uint32_t>> neighbor_lists(
    const MultiRelationGraph& g, std::size_t relation) {
  const Relation& rel = g.relations.at(relation);
  std::vector<std::vector<std::uint32_t>> out(g.num_nodes);
  for (const Edge& e : rel.edges) {
    out[e.first].push_back(e.second);
    out[e.second].push_back(e.first);
  }
  for (std::vector<std::uint32_t>& nbrs : out)
    std::sort(nbrs.begin(), nbrs.end());
  return out;
}

std::vector<Edge> union_edges(const MultiRelationGraph& g) {
  std::vector<Edge> all;
  for (const Relation& rel : g.relations)
    all.insert(all.end(), rel.edges.begin(), rel.edges.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return all;
}

void standardize_features(MultiRelationGraph& g) {
  if (g.num_nodes == 0) return;
  const std::size_t d = g.feature_dim;
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0.0;
    for (std::size_t v = 0; v < g.num_nodes; ++v) mean += g.features[v * d + c];
    mean /= static_cast<double>(g.num_nodes);
    double var = 0.0;
    for (std::size_t v = 0; v < g.num_nodes; ++v) {
      const double x = g.features[v * d + c] - mean;
      var += x * x;
    }
    var /= static_cast<double>(g.num_nodes);
    const double sd = std::sqrt(var);
    for (std::size_t v = 0; v < g.num_nodes; ++v) {
      double& x = g.features[v * d + c];
      x = sd > 0.0 ? (x - mean) / sd : 0.0;
    }
  }
}

DataSplit split_stratified(const MultiRelationGraph& g, double train_ratio,
                           std::uint64_t seed) {
  if (!(train_ratio > 0.0 && train_ratio < 1.0))
    throw std::invalid_argument("split: train_ratio must be in (0,1)");
  std::vector<std::uint32_t> fraud, benign;
  for (std::uint32_t v = 0; v < g.num_nodes; ++v)
    (g.labels[v] ? fraud : benign).push_back(v);
  if (fraud.empty() || benign.empty())
    throw std::invalid_argument("split: both classes must be present");

  const auto take = [&](double x) {
    return static_cast<std::size_t>(std::lround(x));
  };
  std::size_t train_total = std::clamp<std::size_t>(
      take(train_ratio * static_cast<double>(g.num_nodes)), 1, g.num_nodes - 1);
  std::size_t train_fraud = std::min(
      take(train_ratio * static_cast<double>(fraud.size())), fraud.size());
  std::size_t train_benign = train_total - std::min(train_fraud, train_total);
  if (train_benign > benign.size()) {
    train_fraud += train_benign - benign.size();
    train_benign = benign.size();
    train_fraud = std::min(train_fraud, fraud.size());
  }

  Rng rng(seed);
  rng.shuffle(fraud);
  rng.shuffle(benign);

  DataSplit split;
  split.train.assign(fraud.begin(), fraud.begin() + train_fraud);
  split.train.insert(split.train.end(), benign.begin(),
                     benign.begin() + train_benign);
  split.test.assign(fraud.begin() + train_fraud, fraud.end());
  split.test.insert(split.test.end(), benign.begin() + train_benign,
                    benign.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  for (std::uint32_t v : split.train)
    if (g.labels[v]) split.train_pos.push_back(v);
  return split;
}

}  // namespace gnncl
