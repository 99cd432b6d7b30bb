#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gnncl/adam.hpp"
#include "gnncl/graph.hpp"
#include "gnncl/metrics.hpp"
#include "gnncl/model.hpp"
#include "gnncl/reinforcer.hpp"

namespace gnncl {

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t layers = 1;
  double lambda = 2.0;
  double tau = 0.02;
  double lr = 0.01;
  std::size_t batch_size = 1024;
  double init_threshold = 0.5;
  std::size_t hidden_dim = 64;
  double train_ratio = 0.4;
  std::uint64_t seed = 1;
  std::string model = "gnn-cl";  // gnn-cl | gcn
  bool no_reinforcer = false;    // freeze thresholds at init_threshold
  std::optional<double> fixed_weight;  // fixed self-loop weight ablation
  bool standardize_features = false;
  std::size_t purifier_hidden = 64;
  std::size_t num_kernels = 4;
  std::size_t conv_half_width = 1;
  std::size_t chunks = 4;
  std::size_t rnn_hidden = 16;
  std::string cell = "paper-rnn";

  void validate() const;
};

ModelConfig make_model_config(const TrainConfig& cfg, std::size_t feature_dim,
                              std::size_t relations);

struct EpochLog {
  std::size_t epoch = 0;
  double loss_total = 0.0;
  double loss_head = 0.0;
  double loss_gnn = 0.0;
  double loss_purifier = 0.0;
  std::vector<std::vector<double>> p;     // [layers][relations]; empty for gcn
  std::vector<std::vector<double>> dbar;  // [layers][relations]; empty for gcn
  double seconds = 0.0;
};

// Batched forward over a fixed graph. Owns the adjacency indexes; reads the
// model's parameters but never mutates them.
class Pipeline {
 public:
  Pipeline(const MultiRelationGraph& g, const Model& model);

  struct BatchTensors {
    Tensor probs;   // final prediction, [batch x 1]
    Tensor h_top;   // top-layer embedding, [batch x hidden]
    // Per layer: detached previous-layer rows for the batch, the purifier
    // loss input.
    std::vector<Tensor> purifier_inputs;
    std::vector<double> labels;
  };

  // batch must be sorted and unique. thresholds is [layers][relations]
  // (ignored for gcn). boost_override replaces the threshold as the
  // self-loop weight when set. fraud_sums, when non-null, accumulates the
  // selected-neighbor distance sums of batch members flagged in
  // fraud_mask, per (layer, relation).
  BatchTensors forward_batch(
      Tape& tape, const std::vector<std::uint32_t>& batch,
      const std::vector<std::vector<double>>& thresholds,
      std::optional<double> boost_override,
      const std::vector<std::uint8_t>& fraud_mask,
      std::vector<std::vector<double>>* fraud_sums) const;

  std::vector<double> predict(
      const std::vector<std::uint32_t>& batch,
      const std::vector<std::vector<double>>& thresholds,
      std::optional<double> boost_override) const;

 private:
  const MultiRelationGraph& graph_;
  const Model& model_;
  // [relation][node] -> sorted neighbor ids; single union entry for gcn.
  std::vector<std::vector<std::vector<std::uint32_t>>> nbrs_;
};

class Trainer {
 public:
  Trainer(const MultiRelationGraph& g, DataSplit split, TrainConfig cfg);
  // Wraps restored parameters for evaluation or continued inspection.
  Trainer(const MultiRelationGraph& g, DataSplit split, TrainConfig cfg,
          Model model, std::optional<ThresholdController> controller);

  EpochLog run_epoch();
  std::vector<EpochLog> run_all();

  // nodes must be sorted and unique; thresholds stay frozen.
  std::vector<double> predict(const std::vector<std::uint32_t>& nodes) const;
  MetricsReport evaluate(const std::vector<std::uint32_t>& nodes) const;
  MetricsReport evaluate_test() const;

  Model& model() { return model_; }
  const Model& model() const { return model_; }
  const ThresholdController* controller() const {
    return controller_ ? &*controller_ : nullptr;
  }
  const TrainConfig& config() const { return cfg_; }
  const DataSplit& split() const { return split_; }

 private:
  std::vector<std::vector<double>> thresholds() const;

  const MultiRelationGraph& graph_;
  DataSplit split_;
  TrainConfig cfg_;
  Rng rng_;
  Model model_;
  std::optional<ThresholdController> controller_;
  Pipeline pipeline_;
  Adam opt_;
  std::vector<std::uint8_t> fraud_mask_;  // node is train-set fraud
  std::size_t epochs_run_ = 0;
};

}  // namespace gnncl
