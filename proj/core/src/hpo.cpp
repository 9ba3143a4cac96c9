// SPDX-License-Identifier: Apache-2.0
#include "dln/hpo.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include <json.hpp>

#include "dln/data.hpp"
#include "dln/errors.hpp"

namespace dln {

namespace {

int pick(const std::vector<int>& options, std::mt19937_64& rng) {
  if (options.empty()) throw config_error("search space axis has no options");
  if (options.size() == 1) return options[0];
  std::uniform_int_distribution<std::size_t> dist(0, options.size() - 1);
  return options[dist(rng)];
}

feature_matrix subset_rows(const feature_matrix& m, const std::vector<int>& rows) {
  feature_matrix out;
  out.columns = m.columns;
  out.scaling = m.scaling;
  out.num_classes = m.num_classes;
  out.class_values = m.class_values;
  out.rows = static_cast<int>(rows.size());
  out.values.reserve(rows.size() * static_cast<std::size_t>(m.cols()));
  for (int r : rows) {
    for (int c = 0; c < m.cols(); ++c) out.values.push_back(m.at(r, c));
    out.labels.push_back(m.labels[static_cast<std::size_t>(r)]);
  }
  return out;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 over the combined state
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

search_space default_search_space(int input_dim) {
  if (input_dim < 1) throw config_error("input_dim must be >= 1");
  search_space space;
  space.input_dim = input_dim;
  for (int mult : {2, 4, 8}) {
    const int w = std::min(512, std::max(2, mult * input_dim));
    space.hidden_templates.push_back({w});
    space.hidden_templates.push_back({w, std::max(2, w / 2)});
  }
  return space;
}

train_config sample_config(const search_space& space, std::mt19937_64& rng) {
  train_config cfg;
  cfg.group_size = pick(space.group_size_options, rng);
  cfg.phase_unified = pick(space.phase_unified_options, rng) != 0;
  cfg.ste.threshold = pick(space.ste_threshold_options, rng) != 0;
  cfg.ste.logic = pick(space.ste_logic_options, rng) != 0;
  cfg.ste.sum = pick(space.ste_sum_options, rng) != 0;
  cfg.subset_gate_num = pick(space.subset_gate_options, rng);
  cfg.subset_link_num = pick(space.subset_link_options, rng);
  cfg.concat_input = pick(space.concat_input_options, rng) != 0;

  if (space.hidden_templates.empty()) throw config_error("no hidden-size templates");
  std::uniform_int_distribution<std::size_t> hidden_dist(0, space.hidden_templates.size() - 1);
  cfg.hidden_sizes = space.hidden_templates[hidden_dist(rng)];

  cfg.epochs = pick(space.epoch_options, rng);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double lo = std::log(space.lr_log_min);
  const double hi = std::log(space.lr_log_max);
  cfg.learning_rate = std::exp(lo + (hi - lo) * unit(rng));

  cfg.batch_size = space.batch_size;
  cfg.tau_start = space.tau_start;
  cfg.tau_end = space.tau_end;
  cfg.validate();
  return cfg;
}

int choose_folds(int train_size) {
  if (train_size < 4) {
    throw range_error("choose_folds: need at least 4 samples, got " +
                      std::to_string(train_size));
  }
  if (train_size <= 200) return 4;
  if (train_size <= 1000) return 3;
  return 2;
}

std::vector<int> stratified_folds(const feature_matrix& data, int folds, std::uint64_t seed) {
  if (folds < 2) throw config_error("stratified_folds: folds must be >= 2");
  if (data.num_classes < 2) throw config_error("stratified_folds: need contiguous class ids");

  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(data.num_classes));
  for (int r = 0; r < data.rows; ++r) {
    const long long lbl = data.labels[static_cast<std::size_t>(r)];
    if (lbl < 0 || lbl >= data.num_classes) {
      throw range_error("stratified_folds: labels must be contiguous class ids");
    }
    by_class[static_cast<std::size_t>(lbl)].push_back(r);
  }
  std::mt19937_64 rng(derive_seed(seed, 0xf01dULL));
  std::vector<int> fold_of(static_cast<std::size_t>(data.rows), 0);
  for (auto& members : by_class) {
    if (static_cast<int>(members.size()) < folds) {
      throw stratification_error("a class has fewer samples than folds");
    }
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t i = 0; i < members.size(); ++i) {
      fold_of[static_cast<std::size_t>(members[i])] = static_cast<int>(i % folds);
    }
  }
  return fold_of;
}

trial_record cross_validate(const train_config& config, const feature_matrix& data, int folds,
                            std::uint64_t seed) {
  const std::vector<int> fold_of = stratified_folds(data, folds, seed);

  trial_record rec;
  rec.config = config;
  rec.seed = seed;
  for (int f = 0; f < folds; ++f) {
    std::vector<int> train_rows, val_rows;
    for (int r = 0; r < data.rows; ++r) {
      (fold_of[static_cast<std::size_t>(r)] == f ? val_rows : train_rows).push_back(r);
    }
    const feature_matrix train_m = subset_rows(data, train_rows);
    const feature_matrix val_m = subset_rows(data, val_rows);

    train_config fold_cfg = config;
    fold_cfg.seed = derive_seed(seed, static_cast<std::uint64_t>(f) + 1);
    dln_model model = build(fold_cfg, train_m);
    train(model, train_m);

    std::vector<int> y_true, y_pred;
    for (int r = 0; r < val_m.rows; ++r) {
      y_true.push_back(static_cast<int>(val_m.labels[static_cast<std::size_t>(r)]));
      y_pred.push_back(hard_predict(model, val_m.row(r)).label);
    }
    rec.fold_scores.push_back(balanced_accuracy(y_true, y_pred));
  }
  double total = 0.0;
  for (double s : rec.fold_scores) total += s;
  rec.cv_score = total / static_cast<double>(rec.fold_scores.size());
  return rec;
}

search_result run_search(const search_space& space, const feature_matrix& data, int n_trials,
                         std::uint64_t seed, int workers) {
  if (n_trials < 1) throw config_error("run_search: n_trials must be >= 1");
  const int folds = choose_folds(data.rows);

  std::vector<trial_record> history(static_cast<std::size_t>(n_trials));
  auto run_trial = [&](int t) {
    const std::uint64_t trial_seed = derive_seed(seed, static_cast<std::uint64_t>(t));
    const auto started = std::chrono::steady_clock::now();
    trial_record rec;
    try {
      std::mt19937_64 rng(trial_seed);
      train_config cfg = sample_config(space, rng);
      cfg.seed = trial_seed;
      rec = cross_validate(cfg, data, folds, trial_seed);
    } catch (const error& e) {
      rec.failed = true;
      rec.error = e.what();
      rec.cv_score = -std::numeric_limits<double>::infinity();
      rec.seed = trial_seed;
    }
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    history[static_cast<std::size_t>(t)] = std::move(rec);
  };

  workers = std::max(1, std::min(workers, n_trials));
  if (workers == 1) {
    for (int t = 0; t < n_trials; ++t) run_trial(t);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int t = next.fetch_add(1); t < n_trials; t = next.fetch_add(1)) run_trial(t);
      });
    }
    for (auto& th : pool) th.join();
  }

  search_result result;
  result.best_index = 0;
  for (int t = 1; t < n_trials; ++t) {
    if (history[static_cast<std::size_t>(t)].cv_score >
        history[static_cast<std::size_t>(result.best_index)].cv_score) {
      result.best_index = t;
    }
  }
  result.best = history[static_cast<std::size_t>(result.best_index)].config;
  result.history = std::move(history);
  return result;
}

namespace {

std::string hidden_to_string(const std::vector<int>& hidden) {
  std::string s;
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(hidden[i]);
  }
  return s;
}

}  // namespace

config_stats compute_config_stats(const std::vector<train_config>& selected) {
  if (selected.empty()) throw range_error("config_stats: no configurations");
  config_stats stats;
  for (const auto& cfg : selected) {
    stats.counts["phase_unified"][cfg.phase_unified ? "unified" : "alternate"] += 1;
    stats.counts["ste_threshold_layer"][cfg.ste.threshold ? "on" : "off"] += 1;
    stats.counts["ste_logic_layer"][cfg.ste.logic ? "on" : "off"] += 1;
    stats.counts["ste_sum_layer"][cfg.ste.sum ? "on" : "off"] += 1;
    stats.counts["subset_gate_num"][std::to_string(cfg.subset_gate_num)] += 1;
    stats.counts["subset_link_num"][std::to_string(cfg.subset_link_num)] += 1;
    stats.counts["concat_input"][cfg.concat_input ? "on" : "off"] += 1;
    stats.counts["group_size"][std::to_string(cfg.group_size)] += 1;
    stats.counts["hidden_sizes"][hidden_to_string(cfg.hidden_sizes)] += 1;
    stats.counts["gate_x_link"][std::to_string(cfg.subset_gate_num) + "x" +
                                std::to_string(cfg.subset_link_num)] += 1;
  }
  return stats;
}

std::string format_config_stats(const config_stats& stats) {
  std::string out;
  for (const auto& [axis, options] : stats.counts) {
    out += axis + ":\n";
    for (const auto& [option, count] : options) {
      out += "  " + option + ": " + std::to_string(count) + "\n";
    }
  }
  return out;
}

std::string trial_record_json(const trial_record& rec) {
  nlohmann::json j{{"seed", rec.seed},
                   {"cv_score", rec.failed ? nlohmann::json(nullptr) : nlohmann::json(rec.cv_score)},
                   {"fold_scores", rec.fold_scores},
                   {"wall_seconds", rec.wall_seconds},
                   {"failed", rec.failed}};
  if (rec.failed) j["error"] = rec.error;
  j["config"] = nlohmann::json::parse(config_to_json(rec.config));
  return j.dump();
}

}  // namespace dln
