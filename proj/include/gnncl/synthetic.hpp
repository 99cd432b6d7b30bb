#pragma once

#include <cstdint>

#include "gnncl/graph.hpp"

namespace gnncl {

struct SyntheticConfig {
  std::size_t num_nodes = 1000;
  std::size_t feature_dim = 16;
  double fraud_ratio = 0.1;
  std::size_t relation_count = 3;
  double intra_prob = 0.01;      // same-class edge probability
  double camouflage_rate = 0.0;  // chance a fraud-incident edge is rewired
  std::uint64_t seed = 1;

  void validate() const;
};

// Two Gaussian class blobs (unit variance, class means 2.0 apart), homophilous
// edges per relation (cross-class pairs connect at intra_prob / 10), then each
// fraud-incident edge is rewired to a random benign endpoint with probability
// camouflage_rate.
MultiRelationGraph generate_synthetic(const SyntheticConfig& cfg);

}  // namespace gnncl
