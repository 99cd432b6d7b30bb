#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace gnncl {

using Edge = std::pair<std::uint32_t, std::uint32_t>;

struct Relation {
  std::string name;
  std::vector<Edge> edges;  // canonical: u < v, sorted, unique
};

// Undirected multi-relation attributed graph. Self-loops are never stored;
// aggregation adds them analytically.
struct MultiRelationGraph {
  std::size_t num_nodes = 0;
  std::size_t feature_dim = 0;
  std::vector<double> features;       // num_nodes x feature_dim, row-major
  std::vector<std::uint8_t> labels;   // 1 = fraud
  std::vector<Relation> relations;

  const double* feature_row(std::size_t v) const {
    return features.data() + v * feature_dim;
  }
  std::size_t total_edges() const;
  // Throws std::invalid_argument on any structural violation.
  void validate() const;
};

// Canonicalize an edge list in place: swap to u < v, sort, deduplicate.
// Throws on self-loops.
void canonicalize_edges(std::vector<Edge>& edges);

// Sorted neighbor ids per node for one relation.
std::vector<std::vector<std::uint32_t>> neighbor_lists(
    const MultiRelationGraph& g, std::size_t relation);

// Deduplicated union of all relations' edges.
std::vector<Edge> union_edges(const MultiRelationGraph& g);

// Per-column zero mean, unit variance; constant columns become zero.
void standardize_features(MultiRelationGraph& g);

struct DataSplit {
  std::vector<std::uint32_t> train;      // sorted
  std::vector<std::uint32_t> test;       // sorted
  std::vector<std::uint32_t> train_pos;  // fraud subset of train, sorted
};

// Deterministic stratified split: the train set preserves the global fraud
// ratio within one node.
DataSplit split_stratified(const MultiRelationGraph& g, double train_ratio,
                           std::uint64_t seed);

}  // namespace gnncl
