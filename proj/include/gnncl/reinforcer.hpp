#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gnncl/tensor.hpp"

namespace gnncl {

// Symmetric-normalized adjacency with a weighted self-loop:
// entries of M^{-1/2} (A + I(1+boost)) M^{-1/2}, M = diag(row sums).
// boost = 0 reproduces the plain GCN propagation matrix A~ = A + I.
// Edges are undirected pairs over a universe of m nodes, no self-loops.
SparseCoeffs normalized_adjacency(
    std::size_t m, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
    double boost);

// ReLU(coeffs * h * w), the shared body of graph convolution.
Tensor gcn_aggregate(Tape& tape, const SparseCoeffs& coeffs, const Tensor& h,
                     const Tensor& w);

// Sum of fraud-to-selected-neighbor distances divided by the train-set size.
double average_fraud_distance(const std::vector<double>& selected_distances,
                              std::size_t train_size);

// Per-(layer, relation) filtering threshold driven by the epoch-level
// fraud-distance signal: +tau when the distance fell (or held), -tau when it
// rose, clamped to [kMinThreshold, 1]. A cell stops moving once the last 10
// actions nearly cancel or the epoch bound is reached.
class ThresholdController {
 public:
  static constexpr double kMinThreshold = 0.05;

  struct Cell {
    double p = 0.5;
    bool terminated = false;
    bool has_prev = false;
    double prev_dbar = 0.0;
    std::vector<double> actions;
  };

  ThresholdController(std::size_t layers, std::size_t relations, double init_p,
                      double tau, std::size_t epoch_bound);

  std::size_t layers() const { return layers_; }
  std::size_t relations() const { return relations_; }
  double tau() const { return tau_; }
  std::size_t epoch_bound() const { return epoch_bound_; }
  std::size_t epochs_observed() const { return epoch_; }

  double threshold(std::size_t l, std::size_t r) const;
  bool terminated(std::size_t l, std::size_t r) const;
  bool all_terminated() const;
  std::vector<std::vector<double>> thresholds() const;

  // Feeds one epoch's average fraud distance per cell. The first call only
  // records; later calls act, clamp, then test termination.
  void observe_epoch(const std::vector<std::vector<double>>& dbar);

  void freeze_all();

  const Cell& cell(std::size_t l, std::size_t r) const;
  void restore(std::size_t epochs_observed, std::vector<Cell> cells);

 private:
  Cell& at(std::size_t l, std::size_t r);
  const Cell& at(std::size_t l, std::size_t r) const;

  std::size_t layers_;
  std::size_t relations_;
  double tau_;
  std::size_t epoch_bound_;
  std::size_t epoch_ = 0;
  std::vector<Cell> cells_;
};

}  // namespace gnncl
