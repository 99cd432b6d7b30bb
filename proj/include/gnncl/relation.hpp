#pragma once

#include <vector>

#include "gnncl/mlp.hpp"
#include "gnncl/tensor.hpp"

namespace gnncl {

// ReLU(concat(prev, h_1, ..., h_R) * W), no bias; fuses the previous layer's
// embedding with every relation's aggregated embedding.
Tensor cross_relation_aggregate(Tape& tape, const Tensor& prev,
                                const std::vector<Tensor>& per_relation,
                                const Tensor& fusion_weight);

// Mean binary cross-entropy of the classifier's prediction on the top-layer
// embedding; the auxiliary supervision on the GNN trunk.
Tensor gnn_loss(Tape& tape, const Mlp& classifier, const Tensor& h_top,
                const std::vector<double>& labels);

// head + gnn + lambda * purifier, the training objective.
double total_loss(double head_loss, double gnn_loss_value,
                  double purifier_loss_sum, double lambda);

}  // namespace gnncl
