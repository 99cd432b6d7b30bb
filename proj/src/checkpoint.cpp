#include "gnncl/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace gnncl {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json config_to_json(const TrainConfig& c) {
  json j;
  j["epochs"] = c.epochs;
  j["layers"] = c.layers;
  j["lambda"] = c.lambda;
  j["tau"] = c.tau;
  j["lr"] = c.lr;
  j["batch_size"] = c.batch_size;
  j["init_threshold"] = c.init_threshold;
  j["hidden_dim"] = c.hidden_dim;
  j["train_ratio"] = c.train_ratio;
  j["seed"] = c.seed;
  j["model"] = c.model;
  j["no_reinforcer"] = c.no_reinforcer;
  if (c.fixed_weight)
    j["fixed_weight"] = *c.fixed_weight;
  else
    j["fixed_weight"] = nullptr;
  j["standardize_features"] = c.standardize_features;
  j["purifier_hidden"] = c.purifier_hidden;
  j["num_kernels"] = c.num_kernels;
  j["conv_half_width"] = c.conv_half_width;
  j["chunks"] = c.chunks;
  j["rnn_hidden"] = c.rnn_hidden;
  j["cell"] = c.cell;
  return j;
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.epochs = j.at("epochs").get<std::size_t>();
  c.layers = j.at("layers").get<std::size_t>();
  c.lambda = j.at("lambda").get<double>();
  c.tau = j.at("tau").get<double>();
  c.lr = j.at("lr").get<double>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.init_threshold = j.at("init_threshold").get<double>();
  c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  c.train_ratio = j.at("train_ratio").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.model = j.at("model").get<std::string>();
  c.no_reinforcer = j.at("no_reinforcer").get<bool>();
  if (!j.at("fixed_weight").is_null())
    c.fixed_weight = j.at("fixed_weight").get<double>();
  c.standardize_features = j.at("standardize_features").get<bool>();
  c.purifier_hidden = j.at("purifier_hidden").get<std::size_t>();
  c.num_kernels = j.at("num_kernels").get<std::size_t>();
  c.conv_half_width = j.at("conv_half_width").get<std::size_t>();
  c.chunks = j.at("chunks").get<std::size_t>();
  c.rnn_hidden = j.at("rnn_hidden").get<std::size_t>();
  c.cell = j.at("cell").get<std::string>();
  c.validate();
  return c;
}

json model_config_to_json(const ModelConfig& m) {
  json j;
  j["kind"] = m.kind;
  j["feature_dim"] = m.feature_dim;
  j["relations"] = m.relations;
  j["layers"] = m.layers;
  j["hidden_dim"] = m.hidden_dim;
  j["purifier_hidden"] = m.purifier_hidden;
  j["num_kernels"] = m.num_kernels;
  j["conv_half_width"] = m.conv_half_width;
  j["chunks"] = m.chunks;
  j["rnn_hidden"] = m.rnn_hidden;
  j["cell"] = m.cell;
  return j;
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig m;
  m.kind = j.at("kind").get<std::string>();
  m.feature_dim = j.at("feature_dim").get<std::size_t>();
  m.relations = j.at("relations").get<std::size_t>();
  m.layers = j.at("layers").get<std::size_t>();
  m.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  m.purifier_hidden = j.at("purifier_hidden").get<std::size_t>();
  m.num_kernels = j.at("num_kernels").get<std::size_t>();
  m.conv_half_width = j.at("conv_half_width").get<std::size_t>();
  m.chunks = j.at("chunks").get<std::size_t>();
  m.rnn_hidden = j.at("rnn_hidden").get<std::size_t>();
  m.cell = j.at("cell").get<std::string>();
  m.validate();
  return m;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const ThresholdController* controller,
                     const TrainConfig& config) {
  json j;
  j["format_version"] = kFormatVersion;
  j["config"] = config_to_json(config);
  j["model"] = model_config_to_json(model.config());

  json params = json::object();
  for (const auto& [name, t] : model.named_parameters()) {
    json entry;
    entry["rows"] = t.rows();
    entry["cols"] = t.cols();
    entry["data"] = t.data();
    params[name] = std::move(entry);
  }
  j["params"] = std::move(params);

  if (controller) {
    json c;
    c["tau"] = controller->tau();
    c["epoch_bound"] = controller->epoch_bound();
    c["epochs_observed"] = controller->epochs_observed();
    c["layers"] = controller->layers();
    c["relations"] = controller->relations();
    json cells = json::array();
    for (std::size_t l = 0; l < controller->layers(); ++l) {
      for (std::size_t r = 0; r < controller->relations(); ++r) {
        const ThresholdController::Cell& cell = controller->cell(l, r);
        json e;
        e["p"] = cell.p;
        e["terminated"] = cell.terminated;
        e["has_prev"] = cell.has_prev;
        e["prev_dbar"] = cell.prev_dbar;
        e["actions"] = cell.actions;
        cells.push_back(std::move(e));
      }
    }
    c["cells"] = std::move(cells);
    j["controller"] = std::move(c);
  } else {
    j["controller"] = nullptr;
  }

  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write checkpoint: " + path.string());
  out << j.dump(1) << "\n";
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing checkpoint: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("corrupt checkpoint: " + std::string(e.what()));
  }

  try {
    if (!j.contains("format_version") ||
        j.at("format_version").get<int>() != kFormatVersion)
      throw std::runtime_error("checkpoint format version mismatch");

    TrainConfig config = config_from_json(j.at("config"));
    const ModelConfig mc = model_config_from_json(j.at("model"));
    Rng scratch(0);
    Model model(mc, scratch);

    const json& params = j.at("params");
    auto named = model.named_parameters();
    if (params.size() != named.size())
      throw std::runtime_error("checkpoint parameter set mismatch");
    for (auto& [name, t] : named) {
      if (!params.contains(name))
        throw std::runtime_error("checkpoint missing parameter: " + name);
      const json& entry = params.at(name);
      if (entry.at("rows").get<std::size_t>() != t.rows() ||
          entry.at("cols").get<std::size_t>() != t.cols())
        throw std::runtime_error("checkpoint shape mismatch for " + name);
      auto values = entry.at("data").get<std::vector<double>>();
      if (values.size() != t.size())
        throw std::runtime_error("checkpoint size mismatch for " + name);
      t.data() = std::move(values);
    }

    std::optional<ThresholdController> controller;
    if (!j.at("controller").is_null()) {
      const json& c = j.at("controller");
      const auto layers = c.at("layers").get<std::size_t>();
      const auto relations = c.at("relations").get<std::size_t>();
      controller.emplace(layers, relations, config.init_threshold,
                         c.at("tau").get<double>(),
                         c.at("epoch_bound").get<std::size_t>());
      std::vector<ThresholdController::Cell> cells;
      for (const json& e : c.at("cells")) {
        ThresholdController::Cell cell;
        cell.p = e.at("p").get<double>();
        cell.terminated = e.at("terminated").get<bool>();
        cell.has_prev = e.at("has_prev").get<bool>();
        cell.prev_dbar = e.at("prev_dbar").get<double>();
        cell.actions = e.at("actions").get<std::vector<double>>();
        cells.push_back(std::move(cell));
      }
      controller->restore(c.at("epochs_observed").get<std::size_t>(),
                          std::move(cells));
    }

    return Checkpoint{std::move(config), std::move(model),
                      std::move(controller)};
  } catch (const json::exception& e) {
    throw std::runtime_error("corrupt checkpoint: " + std::string(e.what()));
  }
}

}  // namespace gnncl
