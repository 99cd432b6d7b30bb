#include "gnncl/model.hpp"

#include <stdexcept>

namespace gnncl {

void ModelConfig::validate() const {
  if (kind != "gnn-cl" && kind != "gcn")
    throw std::invalid_argument("model: kind must be gnn-cl or gcn");
  if (feature_dim == 0) throw std::invalid_argument("model: feature_dim == 0");
  if (relations == 0) throw std::invalid_argument("model: no relations");
  if (layers == 0) throw std::invalid_argument("model: layers == 0");
  if (hidden_dim == 0) throw std::invalid_argument("model: hidden_dim == 0");
  parse_cell_kind(cell);
}

Model::Model(ModelConfig cfg, Rng& rng) : cfg_(std::move(cfg)) {
  cfg_.validate();
  for (std::size_t l = 1; l <= cfg_.layers; ++l) {
    const std::size_t in = cfg_.layer_input_width(l);
    if (!is_gcn()) {
      purifiers_.emplace_back(
          std::vector<std::size_t>{in, cfg_.purifier_hidden, 1}, rng);
    }
    agg_weights_.push_back(Tensor::glorot(in, cfg_.hidden_dim, rng));
    if (!is_gcn()) {
      fusion_weights_.push_back(Tensor::glorot(
          in + cfg_.relations * cfg_.hidden_dim, cfg_.hidden_dim, rng));
    }
  }
  if (!is_gcn()) {
    head_.emplace_back(cfg_.hidden_dim, cfg_.num_kernels, cfg_.conv_half_width,
                       cfg_.chunks, cfg_.rnn_hidden, parse_cell_kind(cfg_.cell),
                       rng);
  }
  classifier_ = Mlp({cfg_.hidden_dim, cfg_.purifier_hidden, 1}, rng);
}

const Mlp& Model::purifier(std::size_t l) const {
  if (is_gcn()) throw std::logic_error("model: gcn has no purifier");
  return purifiers_.at(l - 1);
}

const Tensor& Model::agg_weight(std::size_t l) const {
  return agg_weights_.at(l - 1);
}

const Tensor& Model::fusion_weight(std::size_t l) const {
  if (is_gcn()) throw std::logic_error("model: gcn has no fusion weight");
  return fusion_weights_.at(l - 1);
}

const SequenceHead& Model::head() const {
  if (is_gcn()) throw std::logic_error("model: gcn has no sequence head");
  return head_.front();
}

const Mlp& Model::classifier() const { return classifier_; }

std::vector<Tensor> Model::parameters() const {
  std::vector<Tensor> out;
  for (const auto& [name, t] : named_parameters()) out.push_back(t);
  return out;
}

std::vector<std::pair<std::string, Tensor>> Model::named_parameters() const {
  std::vector<std::pair<std::string, Tensor>> out;
  for (std::size_t l = 1; l <= cfg_.layers; ++l) {
    const std::string layer = std::to_string(l);
    if (!is_gcn())
      purifiers_[l - 1].collect_named("purifier" + layer, out);
    out.emplace_back("agg" + layer, agg_weights_[l - 1]);
    if (!is_gcn())
      out.emplace_back("fusion" + layer, fusion_weights_[l - 1]);
  }
  if (!is_gcn()) head_.front().collect_named("head", out);
  classifier_.collect_named("classifier", out);
  return out;
}

}  // namespace gnncl
