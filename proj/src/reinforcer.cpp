#include "gnncl/reinforcer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gnncl {

SparseCoeffs normalized_adjacency(
    std::size_t m, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
    double boost) {
  std::vector<double> rowsum(m, 1.0 + boost);
  for (const auto& [u, v] : edges) {
    if (u >= m || v >= m)
      throw std::invalid_argument("normalized_adjacency: endpoint out of range");
    if (u == v)
      throw std::invalid_argument("normalized_adjacency: self-loop edge");
    rowsum[u] += 1.0;
    rowsum[v] += 1.0;
  }
  std::vector<double> inv_sqrt(m);
  for (std::size_t i = 0; i < m; ++i) inv_sqrt[i] = 1.0 / std::sqrt(rowsum[i]);

  SparseCoeffs coeffs;
  coeffs.size = m;
  for (std::size_t i = 0; i < m; ++i)
    coeffs.add(i, i, (1.0 + boost) * inv_sqrt[i] * inv_sqrt[i]);
  for (const auto& [u, v] : edges) {
    const double w = inv_sqrt[u] * inv_sqrt[v];
    coeffs.add(u, v, w);
    coeffs.add(v, u, w);
  }
  return coeffs;
}

Tensor gcn_aggregate(Tape& tape, const SparseCoeffs& coeffs, const Tensor& h,
                     const Tensor& w) {
  return tape.relu(tape.matmul(tape.apply_coeffs(coeffs, h), w));
}

double average_fraud_distance(const std::vector<double>& selected_distances,
                              std::size_t train_size) {
  if (train_size == 0)
    throw std::invalid_argument("average_fraud_distance: empty train set");
  const double total =
      std::accumulate(selected_distances.begin(), selected_distances.end(), 0.0);
  return total / static_cast<double>(train_size);
}

ThresholdController::ThresholdController(std::size_t layers,
                                         std::size_t relations, double init_p,
                                         double tau, std::size_t epoch_bound)
    : layers_(layers),
      relations_(relations),
      tau_(tau),
      epoch_bound_(epoch_bound) {
  if (layers == 0 || relations == 0)
    throw std::invalid_argument("controller: empty cell grid");
  if (!(init_p >= kMinThreshold && init_p <= 1.0))
    throw std::invalid_argument("controller: init threshold outside [0.05, 1]");
  if (!(tau > 0.0)) throw std::invalid_argument("controller: tau must be > 0");
  if (epoch_bound == 0)
    throw std::invalid_argument("controller: epoch bound must be >= 1");
  cells_.resize(layers * relations);
  for (Cell& c : cells_) c.p = init_p;
}

ThresholdController::Cell& ThresholdController::at(std::size_t l,
                                                   std::size_t r) {
  if (l >= layers_ || r >= relations_)
    throw std::out_of_range("controller: cell index");
  return cells_[l * relations_ + r];
}

const ThresholdController::Cell& ThresholdController::at(std::size_t l,
                                                         std::size_t r) const {
  if (l >= layers_ || r >= relations_)
    throw std::out_of_range("controller: cell index");
  return cells_[l * relations_ + r];
}

double ThresholdController::threshold(std::size_t l, std::size_t r) const {
  return at(l, r).p;
}

bool ThresholdController::terminated(std::size_t l, std::size_t r) const {
  return at(l, r).terminated;
}

bool ThresholdController::all_terminated() const {
  return std::all_of(cells_.begin(), cells_.end(),
                     [](const Cell& c) { return c.terminated; });
}

std::vector<std::vector<double>> ThresholdController::thresholds() const {
  std::vector<std::vector<double>> out(layers_, std::vector<double>(relations_));
  for (std::size_t l = 0; l < layers_; ++l)
    for (std::size_t r = 0; r < relations_; ++r) out[l][r] = at(l, r).p;
  return out;
}

void ThresholdController::observe_epoch(
    const std::vector<std::vector<double>>& dbar) {
  if (dbar.size() != layers_)
    throw std::invalid_argument("controller: dbar layer count mismatch");
  for (const auto& row : dbar)
    if (row.size() != relations_)
      throw std::invalid_argument("controller: dbar relation count mismatch");

  ++epoch_;
  for (std::size_t l = 0; l < layers_; ++l) {
    for (std::size_t r = 0; r < relations_; ++r) {
      Cell& c = at(l, r);
      if (c.terminated) continue;
      const double current = dbar[l][r];
      if (!c.has_prev) {
        c.has_prev = true;
        c.prev_dbar = current;
      } else {
        const double action = (c.prev_dbar - current >= 0.0) ? tau_ : -tau_;
        c.actions.push_back(action);
        c.p = std::clamp(c.p + action, kMinThreshold, 1.0);
        c.prev_dbar = current;
        if (c.actions.size() >= 10) {
          const double window = std::accumulate(c.actions.end() - 10,
                                                c.actions.end(), 0.0);
          if (std::abs(window) <= 2.0 * tau_ + 1e-15) c.terminated = true;
        }
      }
      if (epoch_ >= epoch_bound_) c.terminated = true;
    }
  }
}

void ThresholdController::freeze_all() {
  for (Cell& c : cells_) c.terminated = true;
}

const ThresholdController::Cell& ThresholdController::cell(std::size_t l,
                                                           std::size_t r) const {
  return at(l, r);
}

void ThresholdController::restore(std::size_t epochs_observed,
                                  std::vector<Cell> cells) {
  if (cells.size() != cells_.size())
    throw std::invalid_argument("controller: restore cell count mismatch");
  for (const Cell& c : cells)
    if (!(c.p >= kMinThreshold && c.p <= 1.0))
      throw std::invalid_argument("controller: restored threshold out of range");
  epoch_ = epochs_observed;
  cells_ = std::move(cells);
}

}  // namespace gnncl
