#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gnncl/checkpoint.hpp"
#include "gnncl/dataset.hpp"
#include "gnncl/metrics.hpp"
#include "gnncl/synthetic.hpp"
#include "gnncl/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

std::string timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json config_json(const gnncl::TrainConfig& c) {
  json j;
  j["model"] = c.model;
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
  j["no_reinforcer"] = c.no_reinforcer;
  j["fixed_weight"] = c.fixed_weight ? json(*c.fixed_weight) : json(nullptr);
  j["standardize_features"] = c.standardize_features;
  j["purifier_hidden"] = c.purifier_hidden;
  j["num_kernels"] = c.num_kernels;
  j["conv_half_width"] = c.conv_half_width;
  j["chunks"] = c.chunks;
  j["rnn_hidden"] = c.rnn_hidden;
  j["cell"] = c.cell;
  return j;
}

void write_json_file(const fs::path& path, const json& j) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

// Run provenance: enough to re-issue the exact command later.
void write_run_manifest(const fs::path& out_dir, const std::string& command,
                        const fs::path& data_dir, std::uint64_t fingerprint,
                        const json& config) {
  json j;
  j["command"] = command;
  j["timestamp"] = timestamp_utc();
  j["output_dir"] = out_dir.string();
  j["dataset"] = {{"path", data_dir.string()},
                  {"fingerprint", hex64(fingerprint)}};
  j["config"] = config;
  write_json_file(out_dir / "manifest.json", j);
}

// Everything the trainer needs, wired to flags once and reused per command.
struct TrainOptions {
  std::string data;
  std::string out;
  std::string config_help;  // consumed before parsing; kept for --help only
  gnncl::TrainConfig cfg;
};

// Later occurrences win, so values injected from a config file are
// overridden by explicit command-line flags.
CLI::Option* last_wins(CLI::Option* opt) {
  return opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

void add_model_flags(CLI::App* cmd, TrainOptions& o) {
  last_wins(cmd->add_option("--data", o.data, "dataset directory")
                ->required());
  last_wins(cmd->add_option("--out", o.out, "output directory")->required());
  cmd->add_option("--config", o.config_help,
                  "key=value file; flags take precedence");
  last_wins(cmd->add_option("--model", o.cfg.model, "gnn-cl | gcn")
                ->check(CLI::IsMember({"gnn-cl", "gcn"})));
  last_wins(cmd->add_option("--epochs", o.cfg.epochs));
  last_wins(cmd->add_option("--layers", o.cfg.layers));
  last_wins(cmd->add_option("--lambda", o.cfg.lambda, "purifier loss weight"));
  last_wins(cmd->add_option("--tau", o.cfg.tau, "controller step size"));
  last_wins(cmd->add_option("--lr", o.cfg.lr));
  last_wins(cmd->add_option("--batch-size", o.cfg.batch_size));
  last_wins(cmd->add_option("--init-threshold", o.cfg.init_threshold));
  last_wins(cmd->add_option("--hidden-dim", o.cfg.hidden_dim));
  last_wins(cmd->add_option("--train-ratio", o.cfg.train_ratio));
  last_wins(cmd->add_option("--seed", o.cfg.seed));
  last_wins(cmd->add_flag("--no-reinforcer", o.cfg.no_reinforcer,
                          "freeze thresholds at their initial value"));
  last_wins(cmd->add_option("--fixed-weight", o.cfg.fixed_weight,
                            "fixed self-loop weight (disables the "
                            "controller)"));
  last_wins(cmd->add_flag("--standardize-features",
                          o.cfg.standardize_features));
  last_wins(cmd->add_option("--purifier-hidden", o.cfg.purifier_hidden));
  last_wins(cmd->add_option("--num-kernels", o.cfg.num_kernels));
  last_wins(cmd->add_option("--conv-half-width", o.cfg.conv_half_width));
  last_wins(cmd->add_option("--chunks", o.cfg.chunks));
  last_wins(cmd->add_option("--rnn-hidden", o.cfg.rnn_hidden));
  last_wins(cmd->add_option("--cell", o.cfg.cell,
                            "paper-rnn | standard-lstm"));
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Turns `--config file` into `--key=value` tokens injected right after the
// subcommand name, so the regular parser applies them with command-line
// flags taking precedence (they come later and options take the last value).
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size())
        throw std::invalid_argument("--config needs a file argument");
      path = args[i + 1];
      args.erase(args.begin() + i, args.begin() + i + 2);
      break;
    }
    if (args[i].starts_with("--config=")) {
      path = args[i].substr(9);
      args.erase(args.begin() + i);
      break;
    }
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file: " + path);
  std::vector<std::string> tokens;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": expected key=value");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": empty key");
    tokens.push_back("--" + key + "=" + value);
  }
  if (args.empty()) return tokens;
  args.insert(args.begin() + 1, tokens.begin(), tokens.end());
  return args;
}

gnncl::MultiRelationGraph load_for_run(const TrainOptions& o) {
  gnncl::MultiRelationGraph g = gnncl::load_graph(o.data);
  if (o.cfg.standardize_features) gnncl::standardize_features(g);
  return g;
}

std::string epochs_header(std::size_t layers, std::size_t relations,
                          bool with_thresholds) {
  std::string h = "epoch,loss_total,loss_head,loss_gnn,loss_purifier";
  if (with_thresholds) {
    for (std::size_t l = 1; l <= layers; ++l)
      for (std::size_t r = 1; r <= relations; ++r)
        h += ",p_" + std::to_string(l) + "_" + std::to_string(r);
    for (std::size_t l = 1; l <= layers; ++l)
      for (std::size_t r = 1; r <= relations; ++r)
        h += ",dbar_" + std::to_string(l) + "_" + std::to_string(r);
  }
  return h + ",seconds";
}

std::string epochs_row(const gnncl::EpochLog& log) {
  std::string row = std::to_string(log.epoch);
  row += "," + fmt(log.loss_total);
  row += "," + fmt(log.loss_head);
  row += "," + fmt(log.loss_gnn);
  row += "," + fmt(log.loss_purifier);
  for (const auto& layer : log.p)
    for (double p : layer) row += "," + fmt(p);
  for (const auto& layer : log.dbar)
    for (double d : layer) row += "," + fmt(d);
  row += "," + fmt(log.seconds);
  return row;
}

json metrics_json(const gnncl::MetricsReport& m) {
  json j;
  j["tp"] = m.tp;
  j["tn"] = m.tn;
  j["fp"] = m.fp;
  j["fn"] = m.fn;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f"] = m.f;
  j["accuracy"] = m.accuracy;
  j["auc"] = m.auc ? json(*m.auc) : json(nullptr);
  return j;
}

std::string summary_line(const std::string& split,
                         const gnncl::MetricsReport& m, std::size_t n) {
  std::string line = split + ": n=" + std::to_string(n);
  line += " auc=" + (m.auc ? fmt(*m.auc) : std::string("n/a"));
  line += " f=" + fmt(m.f);
  line += " precision=" + fmt(m.precision);
  line += " recall=" + fmt(m.recall);
  line += " accuracy=" + fmt(m.accuracy);
  return line;
}

int cmd_generate(const gnncl::SyntheticConfig& cfg, const std::string& out) {
  cfg.validate();
  gnncl::MultiRelationGraph g = gnncl::generate_synthetic(cfg);
  gnncl::save_graph(g, out);

  // No timestamp: regenerating with the same flags must be byte-identical.
  json j;
  j["command"] = "generate";
  j["config"] = {{"num_nodes", cfg.num_nodes},
                 {"feature_dim", cfg.feature_dim},
                 {"fraud_ratio", cfg.fraud_ratio},
                 {"relation_count", cfg.relation_count},
                 {"intra_prob", cfg.intra_prob},
                 {"camouflage_rate", cfg.camouflage_rate},
                 {"seed", cfg.seed}};
  j["fingerprint"] = hex64(gnncl::fingerprint_dataset(out));
  write_json_file(fs::path(out) / "manifest.json", j);

  std::cout << "wrote " << out << ": " << g.num_nodes << " nodes, "
            << g.total_edges() << " edges across " << g.relations.size()
            << " relations\n";
  return 0;
}

int cmd_train(const TrainOptions& o) {
  o.cfg.validate();
  gnncl::MultiRelationGraph g = load_for_run(o);
  const std::uint64_t fingerprint = gnncl::fingerprint_dataset(o.data);
  fs::create_directories(o.out);
  write_run_manifest(o.out, "train", o.data, fingerprint, config_json(o.cfg));

  gnncl::DataSplit split =
      gnncl::split_stratified(g, o.cfg.train_ratio, o.cfg.seed);
  gnncl::Trainer trainer(g, split, o.cfg);

  std::ofstream csv(fs::path(o.out) / "epochs.csv", std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write epochs.csv");
  const bool gnn_cl = o.cfg.model == "gnn-cl";
  csv << epochs_header(o.cfg.layers, g.relations.size(), gnn_cl) << "\n";
  for (std::size_t e = 0; e < o.cfg.epochs; ++e) {
    gnncl::EpochLog log = trainer.run_epoch();
    csv << epochs_row(log) << "\n";
    std::cout << "epoch " << log.epoch << " loss " << fmt(log.loss_total)
              << "\n";
  }
  csv.flush();

  gnncl::save_checkpoint(fs::path(o.out) / "checkpoint", trainer.model(),
                         trainer.controller(), trainer.config());

  gnncl::MetricsReport m = trainer.evaluate_test();
  std::cout << summary_line("test", m, split.test.size()) << "\n";
  return 0;
}

int cmd_evaluate(const std::string& ckpt_path, const std::string& data,
                 const std::string& out, const std::string& split_name,
                 bool dump_scores) {
  gnncl::Checkpoint ckpt = gnncl::load_checkpoint(ckpt_path);
  gnncl::MultiRelationGraph g = gnncl::load_graph(data);
  if (ckpt.config.standardize_features) gnncl::standardize_features(g);

  gnncl::DataSplit split =
      gnncl::split_stratified(g, ckpt.config.train_ratio, ckpt.config.seed);
  gnncl::Trainer trainer(g, split, ckpt.config, std::move(ckpt.model),
                         std::move(ckpt.controller));

  const std::vector<std::uint32_t>& nodes =
      split_name == "train" ? trainer.split().train : trainer.split().test;
  gnncl::MetricsReport m = trainer.evaluate(nodes);

  json j = metrics_json(m);
  j["split"] = split_name;
  j["n"] = nodes.size();
  j["config"] = config_json(ckpt.config);
  j["dataset"] = {{"path", data},
                  {"fingerprint", hex64(gnncl::fingerprint_dataset(data))}};
  fs::create_directories(out);
  write_json_file(fs::path(out) / "metrics.json", j);

  if (dump_scores) {
    std::vector<double> scores = trainer.predict(nodes);
    std::ofstream csv(fs::path(out) / "scores.csv", std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write scores.csv");
    csv << "node_id,label,score\n";
    for (std::size_t i = 0; i < nodes.size(); ++i)
      csv << nodes[i] << ',' << int(g.labels[nodes[i]]) << ','
          << fmt(scores[i]) << "\n";
  }

  std::cout << summary_line(split_name, m, nodes.size()) << "\n";
  return 0;
}

int cmd_sweep(const TrainOptions& o, const std::string& param,
              const std::vector<double>& values,
              const std::vector<std::uint64_t>& seeds) {
  const auto apply = [&](gnncl::TrainConfig& cfg, double v) {
    if (param == "lambda")
      cfg.lambda = v;
    else if (param == "train-ratio")
      cfg.train_ratio = v;
    else if (param == "tau")
      cfg.tau = v;
    else if (param == "init-threshold")
      cfg.init_threshold = v;
    else
      throw std::invalid_argument("sweep: unknown parameter '" + param +
                                  "'; expected lambda, train-ratio, tau, or "
                                  "init-threshold");
  };
  if (values.empty())
    throw std::invalid_argument("sweep: --values must not be empty");
  // Validate the whole grid before any training starts.
  for (double v : values) {
    gnncl::TrainConfig probe = o.cfg;
    apply(probe, v);
    probe.validate();
  }

  gnncl::MultiRelationGraph g = load_for_run(o);
  const std::uint64_t fingerprint = gnncl::fingerprint_dataset(o.data);
  fs::create_directories(o.out);
  {
    json config = config_json(o.cfg);
    config["sweep"] = {{"param", param},
                       {"values", values},
                       {"seeds", seeds}};
    write_run_manifest(o.out, "sweep", o.data, fingerprint, config);
  }

  const fs::path csv_path = fs::path(o.out) / "sweep.csv";
  const bool fresh = !fs::exists(csv_path);
  std::ofstream csv(csv_path, std::ios::binary | std::ios::app);
  if (!csv) throw std::runtime_error("cannot write sweep.csv");
  if (fresh) csv << "param,value,seed,auc,f,recall\n";

  for (double v : values) {
    for (std::uint64_t seed : seeds) {
      gnncl::TrainConfig cfg = o.cfg;
      apply(cfg, v);
      cfg.seed = seed;
      gnncl::DataSplit split =
          gnncl::split_stratified(g, cfg.train_ratio, seed);
      gnncl::Trainer trainer(g, split, cfg);
      trainer.run_all();
      gnncl::MetricsReport m = trainer.evaluate_test();
      const std::string auc = m.auc ? fmt(*m.auc) : std::string("nan");
      csv << param << ',' << fmt(v) << ',' << seed << ',' << auc << ','
          << fmt(m.f) << ',' << fmt(m.recall) << "\n";
      csv.flush();
      std::cout << param << "=" << fmt(v) << " seed=" << seed
                << " auc=" << auc << " f=" << fmt(m.f)
                << " recall=" << fmt(m.recall) << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GNN-CL fraud-detection pipeline"};
  app.require_subcommand(1);

  gnncl::SyntheticConfig gen_cfg;
  std::string gen_out;
  std::string gen_config_help;
  CLI::App* generate =
      app.add_subcommand("generate", "write a synthetic camouflage dataset");
  last_wins(generate->add_option("--out", gen_out, "dataset directory")
                ->required());
  generate->add_option("--config", gen_config_help,
                       "key=value file; flags take precedence");
  last_wins(generate->add_option("--nodes", gen_cfg.num_nodes));
  last_wins(generate->add_option("--features", gen_cfg.feature_dim));
  last_wins(generate->add_option("--relations", gen_cfg.relation_count));
  last_wins(generate->add_option("--fraud-ratio", gen_cfg.fraud_ratio));
  last_wins(generate->add_option("--intra-prob", gen_cfg.intra_prob));
  last_wins(generate->add_option("--camouflage", gen_cfg.camouflage_rate));
  last_wins(generate->add_option("--seed", gen_cfg.seed));

  TrainOptions train_opts;
  CLI::App* train = app.add_subcommand("train", "train a model");
  add_model_flags(train, train_opts);

  std::string eval_ckpt, eval_data, eval_out, eval_split = "test";
  bool eval_dump = false;
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "score a checkpoint on a dataset split");
  std::string eval_config_help;
  last_wins(evaluate->add_option("--checkpoint", eval_ckpt)->required());
  last_wins(evaluate->add_option("--data", eval_data)->required());
  last_wins(evaluate->add_option("--out", eval_out)->required());
  evaluate->add_option("--config", eval_config_help,
                       "key=value file; flags take precedence");
  last_wins(evaluate->add_option("--split", eval_split)
                ->check(CLI::IsMember({"train", "test"})));
  last_wins(evaluate->add_flag("--dump-scores", eval_dump,
                               "write per-node scores next to metrics.json"));

  TrainOptions sweep_opts;
  std::string sweep_param;
  std::vector<double> sweep_values;
  std::vector<std::uint64_t> sweep_seeds = {1, 2, 3, 4, 5};
  CLI::App* sweep =
      app.add_subcommand("sweep", "grid of runs over one parameter");
  add_model_flags(sweep, sweep_opts);
  last_wins(sweep->add_option("--param", sweep_param,
                              "lambda | train-ratio | tau | init-threshold")
                ->required());
  sweep->add_option("--values", sweep_values, "comma-separated values")
      ->required()
      ->delimiter(',');
  sweep->add_option("--seeds", sweep_seeds, "comma-separated seeds")
      ->delimiter(',');

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());  // parse() takes reversed tokens
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (generate->parsed()) return cmd_generate(gen_cfg, gen_out);
    if (train->parsed()) return cmd_train(train_opts);
    if (evaluate->parsed())
      return cmd_evaluate(eval_ckpt, eval_data, eval_out, eval_split,
                          eval_dump);
    if (sweep->parsed())
      return cmd_sweep(sweep_opts, sweep_param, sweep_values, sweep_seeds);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    // Bad values reaching the library are usage errors, except during
    // evaluation where they signal checkpoint/dataset mismatch.
    return evaluate->parsed() ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
