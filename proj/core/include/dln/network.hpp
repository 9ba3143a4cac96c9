// SPDX-License-Identifier: Apache-2.0
#ifndef DLN_NETWORK_HPP
#define DLN_NETWORK_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dln/data.hpp"
#include "dln/layers.hpp"

namespace dln {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct train_config {
  std::vector<int> hidden_sizes{32};
  int group_size = 10;  // threshold neurons per continuous feature (10 or 14)
  bool phase_unified = true;
  ste_flags ste;
  int subset_gate_num = 16;  // {16, 8, 4}
  int subset_link_num = 16;  // {16, 8, 4, 2, 1}
  bool concat_input = false;
  double learning_rate = 0.05;
  int epochs = 100;
  int batch_size = 64;
  double tau_start = 1.0;
  double tau_end = 0.05;
  std::uint64_t seed = 0;

  void validate() const;  // throws config_error

  bool operator==(const train_config&) const = default;
};

// Temperature at epoch e of an `epochs`-long run: exponential decay from
// tau_start to tau_end, hitting tau_end exactly at the last epoch.
double tau_at_epoch(const train_config& cfg, int epoch);

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

struct dln_model {
  std::vector<column_info> features;      // expected input schema
  std::vector<int> continuous_columns;    // feature columns routed to thresholds
  std::vector<int> passthrough_columns;   // one-hot columns entering as bits
  threshold_layer threshold;
  std::vector<logic_layer> layers;
  sum_layer sum;
  train_config config;
  double final_tau = 1.0;
  std::vector<double> train_loss;  // per-epoch mean loss

  int num_classes() const { return sum.num_classes; }
  int num_features() const { return static_cast<int>(features.size()); }
  // Width of the binarized input: threshold outputs then passthrough bits.
  int binarized_width() const {
    return threshold.width() + static_cast<int>(passthrough_columns.size());
  }

  bool operator==(const dln_model&) const = default;
};

// Constructs the layer stack for preprocessed training data: group_size
// threshold neurons per continuous feature initialized from decision trees,
// logic layers of the configured widths with seeded candidate masks, and the
// class sum layer. One-hot columns bypass thresholding.
dln_model build(const train_config& config, const feature_matrix& train_data);

// ---------------------------------------------------------------------------
// Prediction
// ---------------------------------------------------------------------------

// Differentiable forward chain at temperature tau.
std::vector<double> soft_predict(const dln_model& model, const std::vector<double>& x,
                                 double tau);

struct hard_result {
  int label = 0;                 // argmax class, ties to the lowest id
  std::vector<int> scores;       // per-class active-rule counts
};

hard_result hard_predict(const dln_model& model, const std::vector<double>& x);

// Binarized input for x: hard threshold outputs then passthrough bits.
std::vector<std::uint8_t> binarize_input(const dln_model& model, const std::vector<double>& x);

// Discrete forward chain starting from an explicit binarized input.
hard_result hard_predict_bits(const dln_model& model, const std::vector<std::uint8_t>& bits);

// ---------------------------------------------------------------------------
// Loss
// ---------------------------------------------------------------------------

// Softmax cross-entropy of class scores against the label.
double loss(const std::vector<double>& scores, int label);
std::vector<double> loss_grad(const std::vector<double>& scores, int label);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

// Mini-batch Adam over the soft forward pass with exponential temperature
// decay. In two-phase mode even epochs update function parameters (gate
// weights, threshold bias/slope) and odd epochs update connection parameters
// (links, sum weights). Records per-epoch loss and the final temperature.
void train(dln_model& model, const feature_matrix& data);

// Analytic gradient of loss(soft_predict(model, x, tau), label) with respect
// to every trainable tensor.
struct model_grads {
  threshold_grads threshold;
  std::vector<logic_grads> layers;
  sum_grads sum;
};

model_grads loss_gradients(const dln_model& model, const std::vector<double>& x, int label,
                           double tau);

// ---------------------------------------------------------------------------
// Serialization (canonical JSON, versioned)
// ---------------------------------------------------------------------------

std::string save_model(const dln_model& model);
dln_model load_model(const std::string& bytes);

std::string save_bundle(const dln_model& model, const preprocessor& pre);
std::pair<dln_model, preprocessor> load_bundle(const std::string& bytes);

// Single-line JSON object mirroring the config fields.
std::string config_to_json(const train_config& config);

}  // namespace dln

#endif  // DLN_NETWORK_HPP
