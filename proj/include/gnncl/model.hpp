#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gnncl/mlp.hpp"
#include "gnncl/sequence.hpp"
#include "gnncl/tensor.hpp"

namespace gnncl {

struct ModelConfig {
  std::string kind = "gnn-cl";  // gnn-cl | gcn
  std::size_t feature_dim = 0;
  std::size_t relations = 1;
  std::size_t layers = 1;
  std::size_t hidden_dim = 64;
  std::size_t purifier_hidden = 64;
  std::size_t num_kernels = 4;
  std::size_t conv_half_width = 1;
  std::size_t chunks = 4;
  std::size_t rnn_hidden = 16;
  std::string cell = "paper-rnn";

  // Embedding width entering layer l (1-based); layer 0 is the raw features.
  std::size_t layer_input_width(std::size_t l) const {
    return l <= 1 ? feature_dim : hidden_dim;
  }
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

// Parameter container for both the full pipeline and the plain-GCN baseline.
// Construction order is fixed so a seed fully determines the weights.
class Model {
 public:
  Model(ModelConfig cfg, Rng& rng);

  const ModelConfig& config() const { return cfg_; }
  bool is_gcn() const { return cfg_.kind == "gcn"; }

  // gnn-cl: similarity scorer per layer (absent for gcn).
  const Mlp& purifier(std::size_t l) const;
  // Per-layer graph-convolution weight, shared across relations.
  const Tensor& agg_weight(std::size_t l) const;
  // gnn-cl: per-layer cross-relation fusion weight (absent for gcn).
  const Tensor& fusion_weight(std::size_t l) const;
  // gnn-cl: final prediction head (absent for gcn).
  const SequenceHead& head() const;
  // Classifier on the top embedding: auxiliary loss for gnn-cl, the entire
  // prediction for gcn.
  const Mlp& classifier() const;

  std::vector<Tensor> parameters() const;
  std::vector<std::pair<std::string, Tensor>> named_parameters() const;

 private:
  ModelConfig cfg_;
  std::vector<Mlp> purifiers_;
  std::vector<Tensor> agg_weights_;
  std::vector<Tensor> fusion_weights_;
  std::vector<SequenceHead> head_;  // 0 or 1 elements
  Mlp classifier_;
};

}  // namespace gnncl
