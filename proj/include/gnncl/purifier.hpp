#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gnncl/mlp.hpp"

namespace gnncl {

// L1 distance between the sigmoid MLP predictions of two embeddings.
// Evaluated without gradients; only the purifier loss trains the MLP.
double pairwise_distance(const Mlp& mlp, const double* h_v, const double* h_u);

// 1 / (1 + d); strictly decreasing, 1 at d = 0.
double similarity(double distance);

// Sum over relations of the mean binary cross-entropy of the MLP's
// predictions against the labels.
Tensor purifier_loss(Tape& tape, const Mlp& mlp,
                     const std::vector<Tensor>& per_relation,
                     const std::vector<double>& labels);

// 0 when the neighborhood is empty, else ceil(p * count) capped at count.
std::size_t sample_count(double p, std::size_t neighbor_count);

// The `count` neighbors with smallest distance, ties broken by ascending id.
// Returned ids are sorted ascending.
std::vector<std::uint32_t> select_neighbors(
    const std::vector<std::pair<std::uint32_t, double>>& distances,
    std::size_t count);

}  // namespace gnncl
