#include "gnncl/relation.hpp"

#include <stdexcept>

namespace gnncl {

Tensor cross_relation_aggregate(Tape& tape, const Tensor& prev,
                                const std::vector<Tensor>& per_relation,
                                const Tensor& fusion_weight) {
  if (per_relation.empty())
    throw std::invalid_argument("cross_relation_aggregate: no relations");
  std::size_t width = prev.cols();
  for (const Tensor& h : per_relation) width += h.cols();
  if (fusion_weight.rows() != width)
    throw std::invalid_argument(
        "cross_relation_aggregate: fusion weight rows do not match "
        "concatenated width");
  std::vector<Tensor> parts;
  parts.reserve(per_relation.size() + 1);
  parts.push_back(prev);
  for (const Tensor& h : per_relation) parts.push_back(h);
  return tape.relu(tape.matmul(tape.concat_cols(parts), fusion_weight));
}

Tensor gnn_loss(Tape& tape, const Mlp& classifier, const Tensor& h_top,
                const std::vector<double>& labels) {
  if (labels.empty()) throw std::invalid_argument("gnn_loss: empty batch");
  return tape.bce_mean(classifier.forward(tape, h_top), labels);
}

double total_loss(double head_loss, double gnn_loss_value,
                  double purifier_loss_sum, double lambda) {
  return head_loss + gnn_loss_value + lambda * purifier_loss_sum;
}

}  // namespace gnncl
