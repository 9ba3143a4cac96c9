// SPDX-License-Identifier: Apache-2.0
//
// Batch command-line front end: extract, train, eval, hpo, compile.
// Structured JSON goes to stdout; human-readable summaries go to stderr.
// Exit codes: 0 ok, 1 internal, 2 parse, 3 I/O, 4 config.

#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "config_file.hpp"
#include "dln/circuit.hpp"
#include "dln/data.hpp"
#include "dln/errors.hpp"
#include "dln/hpo.hpp"
#include "dln/network.hpp"

#ifndef DLN_VERSION
#define DLN_VERSION "0.0.0"
#endif

namespace {

using nlohmann::json;

constexpr int kExitInternal = 1;
constexpr int kExitParse = 2;
constexpr int kExitIo = 3;
constexpr int kExitConfig = 4;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw dln::io_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw dln::io_error("cannot open " + path + " for writing");
  out << content;
  if (!out) throw dln::io_error("failed writing " + path);
}

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// Every command records what it did next to its outputs.
void write_manifest(const std::string& out_path, const std::string& command,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs, const json& config,
                    std::uint64_t seed) {
  json m{{"command", command}, {"inputs", inputs},       {"outputs", outputs},
         {"config", config},  {"seed", seed},            {"timestamp", iso_timestamp()},
         {"version", DLN_VERSION}};
  write_file(out_path + ".manifest.json", m.dump(2) + "\n");
}

std::string feature_csv_text(const dln::feature_matrix& m) {
  std::string out;
  for (const auto& col : m.columns) out += col.name + ",";
  out += "label\n";
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      out += shortest(m.at(r, c));
      out += ',';
    }
    out += std::to_string(m.labels[static_cast<std::size_t>(r)]);
    out += '\n';
  }
  return out;
}

double hard_balanced_accuracy(const dln::dln_model& model, const dln::feature_matrix& data) {
  std::vector<int> y_true, y_pred;
  for (int r = 0; r < data.rows; ++r) {
    y_true.push_back(static_cast<int>(data.labels[static_cast<std::size_t>(r)]));
    y_pred.push_back(dln::hard_predict(model, data.row(r)).label);
  }
  return dln::balanced_accuracy(y_true, y_pred);
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct extract_args {
  std::string in_path, out_path;
};

int cmd_extract(const extract_args& args) {
  const dln::sequence_dataset ds = dln::load_sequences(args.in_path);
  const dln::feature_matrix features = dln::extract_basic_features(ds);
  write_file(args.out_path, feature_csv_text(features));
  write_manifest(args.out_path, "extract", {args.in_path}, {args.out_path}, nullptr, 0);

  json doc{{"command", "extract"},
           {"samples", features.rows},
           {"features", features.cols()},
           {"output", args.out_path}};
  std::cout << doc.dump() << "\n";
  std::cerr << "extracted " << features.cols() << " features for " << features.rows
            << " sequences -> " << args.out_path << "\n";
  return 0;
}

struct train_args {
  std::string train_path, test_path, config_path, out_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::optional<double> learning_rate;
  std::optional<std::vector<int>> hidden;
  std::optional<int> group_size;
  std::optional<int> batch_size;
  int categorical_max_unique = dln::kDefaultCategoricalMaxUnique;
};

int cmd_train(const train_args& args) {
  dln::train_config cfg;
  if (!args.config_path.empty()) cfg = dln::tools::load_config_file(args.config_path);
  if (args.seed) cfg.seed = *args.seed;
  if (args.epochs) cfg.epochs = *args.epochs;
  if (args.learning_rate) cfg.learning_rate = *args.learning_rate;
  if (args.hidden) cfg.hidden_sizes = *args.hidden;
  if (args.group_size) cfg.group_size = *args.group_size;
  if (args.batch_size) cfg.batch_size = *args.batch_size;
  cfg.validate();

  const dln::feature_matrix raw_train = dln::load_feature_csv(args.train_path);
  const dln::feature_matrix raw_test = dln::load_feature_csv(args.test_path);
  const dln::preprocessor pre =
      dln::fit_preprocessor(raw_train, raw_test, args.categorical_max_unique);
  auto [train_m, test_m] = dln::preprocess(raw_train, raw_test, args.categorical_max_unique);

  dln::dln_model model = dln::build(cfg, train_m);
  dln::train(model, train_m);
  write_file(args.out_path, dln::save_bundle(model, pre));

  const double train_acc = hard_balanced_accuracy(model, train_m);
  const double test_acc = hard_balanced_accuracy(model, test_m);
  const dln::circuit_model circuit =
      dln::simplify_rules(dln::fold_constants(dln::discretize(model)));
  const dln::cost_report cost = dln::count_ops(circuit);

  write_manifest(args.out_path, "train", {args.train_path, args.test_path},
                 {args.out_path}, json::parse(dln::config_to_json(cfg)), cfg.seed);

  json doc{{"command", "train"},
           {"train_balanced_accuracy", train_acc},
           {"test_balanced_accuracy", test_acc},
           {"total_ops", cost.total_ops},
           {"gate_ops", cost.gate_ops},
           {"comparator_ops", cost.comparator_ops},
           {"live_features", cost.live_feature_count},
           {"final_loss", model.train_loss.empty() ? json(nullptr)
                                                   : json(model.train_loss.back())},
           {"model", args.out_path},
           {"seed", cfg.seed}};
  std::cout << doc.dump() << "\n";
  std::cerr << "train balanced accuracy " << train_acc << ", test " << test_acc << ", "
            << cost.total_ops << " OPs -> " << args.out_path << "\n";
  return 0;
}

struct eval_args {
  std::string model_path, data_path;
};

int cmd_eval(const eval_args& args) {
  auto [model, pre] = dln::load_bundle(read_file(args.model_path));
  const dln::feature_matrix raw = dln::load_feature_csv(args.data_path);
  const dln::feature_matrix data = pre.apply(raw);
  const double acc = hard_balanced_accuracy(model, data);

  json doc{{"command", "eval"},
           {"balanced_accuracy", acc},
           {"samples", data.rows},
           {"model", args.model_path}};
  std::cout << doc.dump() << "\n";
  std::cerr << "balanced accuracy " << acc << " on " << data.rows << " samples\n";
  return 0;
}

struct hpo_args {
  std::string train_path, out_path, history_path;
  int trials = 16;
  std::uint64_t seed = 0;
  int workers = 1;
  int categorical_max_unique = dln::kDefaultCategoricalMaxUnique;
};

int cmd_hpo(const hpo_args& args) {
  const dln::feature_matrix raw_train = dln::load_feature_csv(args.train_path);
  auto [train_m, ignored] = dln::preprocess(raw_train, raw_train, args.categorical_max_unique);

  const dln::search_space space = dln::default_search_space(train_m.cols());
  const dln::search_result result =
      dln::run_search(space, train_m, args.trials, args.seed, args.workers);

  write_file(args.out_path, dln::tools::config_to_text(result.best));

  std::string history;
  for (const auto& rec : result.history) history += dln::trial_record_json(rec) + "\n";
  const std::string history_path =
      args.history_path.empty() ? args.out_path + ".history.jsonl" : args.history_path;
  write_file(history_path, history);

  write_manifest(args.out_path, "hpo", {args.train_path}, {args.out_path, history_path},
                 json::parse(dln::config_to_json(result.best)), args.seed);

  const auto& best = result.history[static_cast<std::size_t>(result.best_index)];
  json doc{{"command", "hpo"},
           {"trials", args.trials},
           {"best_index", result.best_index},
           {"best_cv_score", best.cv_score},
           {"config", args.out_path},
           {"history", history_path},
           {"seed", args.seed}};
  std::cout << doc.dump() << "\n";

  std::vector<dln::train_config> winners{result.best};
  std::cerr << "best trial " << result.best_index << " cv score " << best.cv_score << "\n"
            << dln::format_config_stats(dln::compute_config_stats(winners));
  return 0;
}

struct compile_args {
  std::string model_path, out_prefix;
};

int cmd_compile(const compile_args& args) {
  auto [model, pre] = dln::load_bundle(read_file(args.model_path));
  dln::circuit_model circuit = dln::discretize(model);
  circuit = dln::fold_constants(std::move(circuit));
  circuit = dln::simplify_rules(std::move(circuit));
  dln::validate(circuit);
  const dln::cost_report cost = dln::count_ops(circuit);

  const std::string rules_path = args.out_prefix + ".rules.txt";
  const std::string graph_path = args.out_prefix + ".dot";
  const std::string cost_path = args.out_prefix + ".cost.json";
  write_file(rules_path, dln::export_text(circuit));
  write_file(graph_path, dln::export_graph(circuit));
  write_file(cost_path, dln::cost_report_json(cost));
  write_manifest(args.out_prefix, "compile", {args.model_path},
                 {rules_path, graph_path, cost_path}, nullptr, 0);

  json doc{{"command", "compile"},
           {"total_ops", cost.total_ops},
           {"gate_ops", cost.gate_ops},
           {"comparator_ops", cost.comparator_ops},
           {"live_features", cost.live_feature_count},
           {"rules", rules_path},
           {"graph", graph_path},
           {"cost", cost_path}};
  std::cout << doc.dump() << "\n";
  std::cerr << "compiled circuit: " << cost.total_ops << " OPs (" << cost.gate_ops
            << " gate + " << cost.comparator_ops << " comparator), rules -> " << rules_path
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentiable logic network toolkit"};
  app.set_version_flag("--version", DLN_VERSION);
  app.require_subcommand(1);

  extract_args ex;
  CLI::App* extract = app.add_subcommand("extract", "Sequence file -> feature CSV");
  extract->add_option("--in", ex.in_path, "Input sequence file")->required();
  extract->add_option("--out", ex.out_path, "Output feature CSV")->required();

  train_args tr;
  std::string hidden_list;
  std::uint64_t seed_flag = 0;
  int epochs_flag = 0;
  double lr_flag = 0.0;
  int group_flag = 0, batch_flag = 0;
  CLI::App* train = app.add_subcommand("train", "Preprocess, train and save a model");
  train->add_option("--train", tr.train_path, "Training CSV")->required();
  train->add_option("--test", tr.test_path, "Test CSV")->required();
  train->add_option("--config", tr.config_path, "Config file (key = value)");
  train->add_option("--out", tr.out_path, "Output model path")->required();
  auto* tr_seed = train->add_option("--seed", seed_flag, "Run seed");
  auto* tr_epochs = train->add_option("--epochs", epochs_flag, "Override epochs");
  auto* tr_lr = train->add_option("--learning-rate", lr_flag, "Override learning rate");
  auto* tr_hidden = train->add_option("--hidden", hidden_list, "Override hidden sizes, e.g. 16,8");
  auto* tr_group = train->add_option("--group-size", group_flag, "Override group size");
  auto* tr_batch = train->add_option("--batch-size", batch_flag, "Override batch size");
  train->add_option("--categorical-max-unique", tr.categorical_max_unique,
                    "One-hot threshold on distinct values");

  eval_args ev;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a saved model on a CSV");
  eval_cmd->add_option("--model", ev.model_path, "Model file")->required();
  eval_cmd->add_option("--data", ev.data_path, "CSV to score")->required();

  hpo_args hp;
  CLI::App* hpo = app.add_subcommand("hpo", "Random search over training configs");
  hpo->add_option("--train", hp.train_path, "Training CSV")->required();
  hpo->add_option("--trials", hp.trials, "Number of trials")->required();
  hpo->add_option("--seed", hp.seed, "Search seed");
  hpo->add_option("--workers", hp.workers, "Parallel trial workers");
  hpo->add_option("--out", hp.out_path, "Best-config output path")->required();
  hpo->add_option("--history", hp.history_path, "Trial history JSONL path");
  hpo->add_option("--categorical-max-unique", hp.categorical_max_unique,
                  "One-hot threshold on distinct values");

  compile_args cp;
  CLI::App* compile = app.add_subcommand("compile", "Model -> rules, graph and cost report");
  compile->add_option("--model", cp.model_path, "Model file")->required();
  compile->add_option("--out", cp.out_prefix, "Output prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return kExitParse;
  }

  try {
    if (*extract) return cmd_extract(ex);
    if (*train) {
      if (*tr_seed) tr.seed = seed_flag;
      if (*tr_epochs) tr.epochs = epochs_flag;
      if (*tr_lr) tr.learning_rate = lr_flag;
      if (*tr_group) tr.group_size = group_flag;
      if (*tr_batch) tr.batch_size = batch_flag;
      if (*tr_hidden) {
        std::vector<int> hidden;
        std::istringstream hs(hidden_list);
        std::string item;
        while (std::getline(hs, item, ',')) hidden.push_back(std::stoi(item));
        tr.hidden = hidden;
      }
      return cmd_train(tr);
    }
    if (*eval_cmd) return cmd_eval(ev);
    if (*hpo) return cmd_hpo(hp);
    if (*compile) return cmd_compile(cp);
  } catch (const dln::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const dln::invalid_temperature_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const dln::io_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const dln::format_error& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const dln::schema_error& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kExitParse;
  } catch (const dln::parse_error& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const dln::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
