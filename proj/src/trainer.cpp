#include "gnncl/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

#include "gnncl/purifier.hpp"
#include "gnncl/relation.hpp"

namespace gnncl {

namespace {

// Positions of each element of `subset` within the sorted vector `universe`.
std::vector<std::size_t> positions_in(
    const std::vector<std::uint32_t>& subset,
    const std::vector<std::uint32_t>& universe) {
  std::vector<std::size_t> pos(subset.size());
  for (std::size_t i = 0; i < subset.size(); ++i) {
    auto it = std::lower_bound(universe.begin(), universe.end(), subset[i]);
    pos[i] = static_cast<std::size_t>(it - universe.begin());
  }
  return pos;
}

bool contains(const std::vector<std::uint32_t>& sorted, std::uint32_t v) {
  return std::binary_search(sorted.begin(), sorted.end(), v);
}

Tensor gather_feature_rows(const MultiRelationGraph& g,
                           const std::vector<std::uint32_t>& nodes) {
  std::vector<double> data;
  data.reserve(nodes.size() * g.feature_dim);
  for (std::uint32_t v : nodes)
    data.insert(data.end(), g.feature_row(v), g.feature_row(v) + g.feature_dim);
  return Tensor::from_data(nodes.size(), g.feature_dim, std::move(data));
}

// Leaf copy of selected rows of a (possibly taped) tensor.
Tensor detached_rows(const Tensor& src, const std::vector<std::size_t>& rows) {
  std::vector<double> data;
  data.reserve(rows.size() * src.cols());
  for (std::size_t r : rows) {
    const double* begin = src.data().data() + r * src.cols();
    data.insert(data.end(), begin, begin + src.cols());
  }
  return Tensor::from_data(rows.size(), src.cols(), std::move(data));
}

TrainConfig validated(TrainConfig cfg) {
  cfg.validate();
  return cfg;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs == 0) throw std::invalid_argument("config: epochs must be >= 1");
  if (layers == 0) throw std::invalid_argument("config: layers must be >= 1");
  if (lambda < 0.0) throw std::invalid_argument("config: lambda must be >= 0");
  if (!(tau > 0.0)) throw std::invalid_argument("config: tau must be > 0");
  if (!(lr > 0.0)) throw std::invalid_argument("config: lr must be > 0");
  if (batch_size == 0)
    throw std::invalid_argument("config: batch_size must be >= 1");
  if (!(init_threshold >= ThresholdController::kMinThreshold &&
        init_threshold <= 1.0))
    throw std::invalid_argument("config: init_threshold outside [0.05, 1]");
  if (hidden_dim == 0)
    throw std::invalid_argument("config: hidden_dim must be >= 1");
  if (!(train_ratio > 0.0 && train_ratio < 1.0))
    throw std::invalid_argument("config: train_ratio must be in (0,1)");
  if (model != "gnn-cl" && model != "gcn")
    throw std::invalid_argument("config: model must be gnn-cl or gcn");
  if (fixed_weight && !(*fixed_weight >= 0.0))
    throw std::invalid_argument("config: fixed_weight must be >= 0");
  parse_cell_kind(cell);
}

ModelConfig make_model_config(const TrainConfig& cfg, std::size_t feature_dim,
                              std::size_t relations) {
  ModelConfig mc;
  mc.kind = cfg.model;
  mc.feature_dim = feature_dim;
  mc.relations = relations;
  mc.layers = cfg.layers;
  mc.hidden_dim = cfg.hidden_dim;
  mc.purifier_hidden = cfg.purifier_hidden;
  mc.num_kernels = cfg.num_kernels;
  mc.conv_half_width = cfg.conv_half_width;
  mc.chunks = cfg.chunks;
  mc.rnn_hidden = cfg.rnn_hidden;
  mc.cell = cfg.cell;
  return mc;
}

Pipeline::Pipeline(const MultiRelationGraph& g, const Model& model)
    : graph_(g), model_(model) {
  if (model.config().feature_dim != g.feature_dim)
    throw std::invalid_argument("pipeline: feature width mismatch");
  if (model.is_gcn()) {
    std::vector<std::vector<std::uint32_t>> nbrs(g.num_nodes);
    for (const Edge& e : union_edges(g)) {
      nbrs[e.first].push_back(e.second);
      nbrs[e.second].push_back(e.first);
    }
    for (auto& list : nbrs) std::sort(list.begin(), list.end());
    nbrs_.push_back(std::move(nbrs));
  } else {
    if (model.config().relations != g.relations.size())
      throw std::invalid_argument("pipeline: relation count mismatch");
    for (std::size_t r = 0; r < g.relations.size(); ++r)
      nbrs_.push_back(neighbor_lists(g, r));
  }
}

Pipeline::BatchTensors Pipeline::forward_batch(
    Tape& tape, const std::vector<std::uint32_t>& batch,
    const std::vector<std::vector<double>>& thresholds,
    std::optional<double> boost_override,
    const std::vector<std::uint8_t>& fraud_mask,
    std::vector<std::vector<double>>* fraud_sums) const {
  if (batch.empty()) throw std::invalid_argument("pipeline: empty batch");
  if (!std::is_sorted(batch.begin(), batch.end()) ||
      std::adjacent_find(batch.begin(), batch.end()) != batch.end())
    throw std::invalid_argument("pipeline: batch must be sorted unique");

  const std::size_t layers = model_.config().layers;

  // universes[l]: nodes whose layer-l embedding is materialized;
  // universes[layers] is the batch, and each lower universe adds the full
  // 1-hop neighborhood so neighbor scoring has every candidate's embedding.
  std::vector<std::vector<std::uint32_t>> universes(layers + 1);
  universes[layers] = batch;
  for (std::size_t l = layers; l-- > 0;) {
    std::vector<std::uint32_t> u = universes[l + 1];
    for (std::uint32_t v : universes[l + 1])
      for (const auto& rel_nbrs : nbrs_)
        u.insert(u.end(), rel_nbrs[v].begin(), rel_nbrs[v].end());
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    universes[l] = std::move(u);
  }

  BatchTensors out;
  Tensor h_prev = gather_feature_rows(graph_, universes[0]);

  for (std::size_t l = 1; l <= layers; ++l) {
    const std::vector<std::uint32_t>& lower = universes[l - 1];
    const std::vector<std::uint32_t>& upper = universes[l];
    const std::vector<std::size_t> upper_pos = positions_in(upper, lower);

    if (model_.is_gcn()) {
      // Same center-incident construction as the full pipeline, minus the
      // neighbor selection.
      std::vector<std::pair<std::size_t, std::size_t>> edges;
      for (std::size_t ci = 0; ci < upper.size(); ++ci) {
        const std::size_t v_pos = upper_pos[ci];
        for (std::uint32_t u : nbrs_[0][upper[ci]]) {
          auto it = std::lower_bound(lower.begin(), lower.end(), u);
          const auto u_pos = static_cast<std::size_t>(it - lower.begin());
          edges.emplace_back(std::min(v_pos, u_pos), std::max(v_pos, u_pos));
        }
      }
      std::sort(edges.begin(), edges.end());
      edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
      const SparseCoeffs coeffs = normalized_adjacency(lower.size(), edges, 0.0);
      Tensor full = gcn_aggregate(tape, coeffs, h_prev, model_.agg_weight(l));
      h_prev = tape.gather_rows(full, upper_pos);
      continue;
    }

    // Similarity predictions over the whole lower universe, gradient-free.
    const std::vector<double> q =
        model_.purifier(l).predict(h_prev.data(), lower.size());

    out.purifier_inputs.push_back(detached_rows(
        h_prev, positions_in(batch, lower)));

    std::vector<Tensor> per_relation;
    for (std::size_t r = 0; r < nbrs_.size(); ++r) {
      const double p = thresholds.at(l - 1).at(r);
      std::vector<std::pair<std::size_t, std::size_t>> edges;
      for (std::size_t ci = 0; ci < upper.size(); ++ci) {
        const std::uint32_t v = upper[ci];
        const std::vector<std::uint32_t>& candidates = nbrs_[r][v];
        if (candidates.empty()) continue;
        const std::size_t v_pos = upper_pos[ci];
        std::vector<std::pair<std::uint32_t, double>> dist;
        dist.reserve(candidates.size());
        for (std::uint32_t u : candidates) {
          auto it = std::lower_bound(lower.begin(), lower.end(), u);
          const auto u_pos = static_cast<std::size_t>(it - lower.begin());
          dist.emplace_back(u, std::abs(q[v_pos] - q[u_pos]));
        }
        const std::size_t count = sample_count(p, candidates.size());
        const std::vector<std::uint32_t> chosen = select_neighbors(dist, count);
        if (fraud_sums && fraud_mask[v] && contains(batch, v)) {
          double sum = 0.0;
          for (std::uint32_t u : chosen) {
            auto it = std::lower_bound(lower.begin(), lower.end(), u);
            sum += std::abs(q[v_pos] - q[it - lower.begin()]);
          }
          (*fraud_sums)[l - 1][r] += sum;
        }
        for (std::uint32_t u : chosen) {
          auto it = std::lower_bound(lower.begin(), lower.end(), u);
          const auto u_pos = static_cast<std::size_t>(it - lower.begin());
          edges.emplace_back(std::min(v_pos, u_pos), std::max(v_pos, u_pos));
        }
      }
      std::sort(edges.begin(), edges.end());
      edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

      const double boost = boost_override.value_or(p);
      const SparseCoeffs coeffs =
          normalized_adjacency(lower.size(), edges, boost);
      Tensor full = gcn_aggregate(tape, coeffs, h_prev, model_.agg_weight(l));
      per_relation.push_back(tape.gather_rows(full, upper_pos));
    }

    Tensor prev_rows = tape.gather_rows(h_prev, upper_pos);
    h_prev = cross_relation_aggregate(tape, prev_rows, per_relation,
                                      model_.fusion_weight(l));
  }

  out.h_top = h_prev;
  out.labels.reserve(batch.size());
  for (std::uint32_t v : batch)
    out.labels.push_back(static_cast<double>(graph_.labels[v]));
  out.probs = model_.is_gcn()
                  ? model_.classifier().forward(tape, out.h_top)
                  : model_.head().forward(tape, out.h_top);
  return out;
}

std::vector<double> Pipeline::predict(
    const std::vector<std::uint32_t>& batch,
    const std::vector<std::vector<double>>& thresholds,
    std::optional<double> boost_override) const {
  Tape tape;
  static const std::vector<std::uint8_t> kNoMask;
  BatchTensors bt =
      forward_batch(tape, batch, thresholds, boost_override, kNoMask, nullptr);
  return bt.probs.data();
}

Trainer::Trainer(const MultiRelationGraph& g, DataSplit split, TrainConfig cfg)
    : graph_(g),
      split_(std::move(split)),
      cfg_(validated(std::move(cfg))),
      rng_(cfg_.seed),
      model_(make_model_config(cfg_, g.feature_dim, g.relations.size()), rng_),
      pipeline_(g, model_),
      opt_(model_.parameters(), cfg_.lr) {
  if (cfg_.model == "gnn-cl") {
    controller_.emplace(cfg_.layers, g.relations.size(), cfg_.init_threshold,
                        cfg_.tau, cfg_.epochs);
    if (cfg_.no_reinforcer || cfg_.fixed_weight || split_.train_pos.empty())
      controller_->freeze_all();
  }
  fraud_mask_.assign(g.num_nodes, 0);
  for (std::uint32_t v : split_.train_pos) fraud_mask_[v] = 1;
}

Trainer::Trainer(const MultiRelationGraph& g, DataSplit split, TrainConfig cfg,
                 Model model, std::optional<ThresholdController> controller)
    : graph_(g),
      split_(std::move(split)),
      cfg_(validated(std::move(cfg))),
      rng_(cfg_.seed),
      model_(std::move(model)),
      controller_(std::move(controller)),
      pipeline_(g, model_),
      opt_(model_.parameters(), cfg_.lr) {
  fraud_mask_.assign(g.num_nodes, 0);
  for (std::uint32_t v : split_.train_pos) fraud_mask_[v] = 1;
}

std::vector<std::vector<double>> Trainer::thresholds() const {
  if (controller_) return controller_->thresholds();
  return std::vector<std::vector<double>>(
      cfg_.layers, std::vector<double>(
                       model_.is_gcn() ? 1 : graph_.relations.size(), 0.0));
}

EpochLog Trainer::run_epoch() {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t relations = graph_.relations.size();

  std::vector<std::uint32_t> order = split_.train;
  rng_.shuffle(order);

  std::vector<std::vector<double>> sums(cfg_.layers,
                                        std::vector<double>(relations, 0.0));
  double total = 0.0, head = 0.0, gnn = 0.0, pur = 0.0;
  std::size_t counted = 0;

  for (std::size_t begin = 0; begin < order.size();
       begin += cfg_.batch_size) {
    const std::size_t end = std::min(begin + cfg_.batch_size, order.size());
    std::vector<std::uint32_t> batch(order.begin() + begin,
                                     order.begin() + end);
    std::sort(batch.begin(), batch.end());

    Tape tape;
    Pipeline::BatchTensors bt =
        pipeline_.forward_batch(tape, batch, thresholds(), cfg_.fixed_weight,
                                fraud_mask_, model_.is_gcn() ? nullptr : &sums);

    Tensor loss;
    double batch_head = 0.0, batch_gnn = 0.0, batch_pur = 0.0;
    if (model_.is_gcn()) {
      loss = tape.bce_mean(bt.probs, bt.labels);
      batch_gnn = loss.item();
    } else {
      Tensor head_loss = tape.bce_mean(bt.probs, bt.labels);
      Tensor gnn_term = gnn_loss(tape, model_.classifier(), bt.h_top, bt.labels);
      Tensor pur_sum;
      for (std::size_t l = 1; l <= cfg_.layers; ++l) {
        std::vector<Tensor> per_relation(relations,
                                         bt.purifier_inputs[l - 1]);
        Tensor term = purifier_loss(tape, model_.purifier(l), per_relation,
                                    bt.labels);
        pur_sum = pur_sum.valid() ? tape.add(pur_sum, term) : term;
      }
      loss = tape.add(tape.add(head_loss, gnn_term),
                      tape.scale(pur_sum, cfg_.lambda));
      batch_head = head_loss.item();
      batch_gnn = gnn_term.item();
      batch_pur = pur_sum.item();
    }

    const double batch_total = loss.item();
    const std::size_t weight = batch.size();
    total += batch_total * weight;
    head += batch_head * weight;
    gnn += batch_gnn * weight;
    pur += batch_pur * weight;
    counted += weight;

    opt_.zero_grad();
    tape.backward(loss);
    opt_.step();
  }

  EpochLog log;
  log.epoch = ++epochs_run_;
  if (counted > 0) {
    total /= counted;
    head /= counted;
    gnn /= counted;
    pur /= counted;
  }
  log.loss_total = total;
  log.loss_head = head;
  log.loss_gnn = gnn;
  log.loss_purifier = pur;

  if (!model_.is_gcn()) {
    std::vector<std::vector<double>> dbar(cfg_.layers,
                                          std::vector<double>(relations, 0.0));
    for (std::size_t l = 0; l < cfg_.layers; ++l)
      for (std::size_t r = 0; r < relations; ++r)
        dbar[l][r] =
            average_fraud_distance({sums[l][r]}, split_.train.size());
    if (controller_) controller_->observe_epoch(dbar);
    log.p = thresholds();
    log.dbar = dbar;
  }

  log.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return log;
}

std::vector<EpochLog> Trainer::run_all() {
  std::vector<EpochLog> logs;
  logs.reserve(cfg_.epochs);
  for (std::size_t e = 0; e < cfg_.epochs; ++e) logs.push_back(run_epoch());
  return logs;
}

std::vector<double> Trainer::predict(
    const std::vector<std::uint32_t>& nodes) const {
  std::vector<double> out;
  out.reserve(nodes.size());
  for (std::size_t begin = 0; begin < nodes.size(); begin += cfg_.batch_size) {
    const std::size_t end = std::min(begin + cfg_.batch_size, nodes.size());
    std::vector<std::uint32_t> batch(nodes.begin() + begin,
                                     nodes.begin() + end);
    const std::vector<double> probs =
        pipeline_.predict(batch, thresholds(), cfg_.fixed_weight);
    out.insert(out.end(), probs.begin(), probs.end());
  }
  return out;
}

MetricsReport Trainer::evaluate(const std::vector<std::uint32_t>& nodes) const {
  const std::vector<double> scores = predict(nodes);
  std::vector<std::uint8_t> labels;
  labels.reserve(nodes.size());
  for (std::uint32_t v : nodes) labels.push_back(graph_.labels[v]);
  return compute_metrics(scores, labels);
}

MetricsReport Trainer::evaluate_test() const { return evaluate(split_.test); }

}  // namespace gnncl
