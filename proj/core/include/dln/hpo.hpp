// SPDX-License-Identifier: Apache-2.0
#ifndef DLN_HPO_HPP
#define DLN_HPO_HPP

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "dln/network.hpp"

namespace dln {

// ---------------------------------------------------------------------------
// Random search over the training-configuration space, selected by
// cross-validated balanced accuracy.
// ---------------------------------------------------------------------------

struct search_space {
  int input_dim = 1;  // feature columns after preprocessing

  std::vector<int> group_size_options{10, 14};
  std::vector<int> phase_unified_options{0, 1};
  std::vector<int> ste_threshold_options{0, 1};
  std::vector<int> ste_logic_options{0, 1};
  std::vector<int> ste_sum_options{0, 1};
  std::vector<int> subset_gate_options{16, 8, 4};
  std::vector<int> subset_link_options{16, 8, 4, 2, 1};
  std::vector<int> concat_input_options{0, 1};
  std::vector<std::vector<int>> hidden_templates;  // widths scaled by input_dim
  std::vector<int> epoch_options{50, 100, 200};

  double lr_log_min = 1e-3;  // log-uniform learning-rate range
  double lr_log_max = 1e-1;
  int batch_size = 64;
  double tau_start = 1.0;
  double tau_end = 0.05;
};

// One or two logic layers with widths from {2x, 4x, 8x} the input dimension,
// capped at 512.
search_space default_search_space(int input_dim);

// Independent uniform draw per categorical axis; log-uniform learning rate.
train_config sample_config(const search_space& space, std::mt19937_64& rng);

// More folds for smaller training sets: <=200 samples -> 4, 201..1000 -> 3,
// >1000 -> 2. Requires at least 4 samples.
int choose_folds(int train_size);

// Fold id per row: per-class shuffle, then round-robin dealing. Throws
// stratification_error when a class has fewer samples than folds.
std::vector<int> stratified_folds(const feature_matrix& data, int folds, std::uint64_t seed);

struct trial_record {
  train_config config;
  double cv_score = 0.0;
  std::vector<double> fold_scores;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  bool failed = false;
  std::string error;
};

// Stratified cross-validation of one configuration; scores hard-inference
// balanced accuracy on each held-out fold.
trial_record cross_validate(const train_config& config, const feature_matrix& data, int folds,
                            std::uint64_t seed);

struct search_result {
  train_config best;
  int best_index = 0;
  std::vector<trial_record> history;
};

// n_trials independent draws, each cross-validated; ties go to the earliest
// trial and failed trials score -infinity. Trials may run on `workers`
// threads; per-trial seeds keep the outcome identical either way.
search_result run_search(const search_space& space, const feature_matrix& data, int n_trials,
                         std::uint64_t seed, int workers = 1);

// Frequency table of the options picked across a set of selected configs.
struct config_stats {
  std::map<std::string, std::map<std::string, int>> counts;  // axis -> option -> count
};

config_stats compute_config_stats(const std::vector<train_config>& selected);
std::string format_config_stats(const config_stats& stats);

// One-line JSON record for the search history log.
std::string trial_record_json(const trial_record& rec);

// Deterministic per-trial seed derivation.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace dln

#endif  // DLN_HPO_HPP
