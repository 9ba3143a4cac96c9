// SPDX-License-Identifier: Apache-2.0
#include "dln/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "dln/errors.hpp"
#include "dln/logic.hpp"

namespace dln {

namespace {

bool one_of(int v, std::initializer_list<int> options) {
  return std::find(options.begin(), options.end(), v) != options.end();
}

// Sample `count` distinct ints from [0, domain) and return them sorted.
std::vector<int> sample_subset(int domain, int count, std::mt19937_64& rng) {
  std::vector<int> pool(static_cast<std::size_t>(domain));
  std::iota(pool.begin(), pool.end(), 0);
  count = std::min(count, domain);
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, domain - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(count));
  std::sort(pool.begin(), pool.end());
  return pool;
}

matrix gaussian_matrix(int rows, int cols, std::mt19937_64& rng, double stddev = 0.1) {
  matrix m(rows, cols);
  std::normal_distribution<double> dist(0.0, stddev);
  for (double& v : m.data()) v = dist(rng);
  return m;
}

}  // namespace

void train_config::validate() const {
  if (hidden_sizes.empty()) {
    throw config_error("hidden_sizes must not be empty");
  }
  for (int w : hidden_sizes) {
    if (w <= 0) throw config_error("hidden layer width must be positive");
  }
  if (group_size < 1) {
    throw config_error("group_size must be >= 1");
  }
  if (!one_of(subset_gate_num, {16, 8, 4})) {
    throw config_error("subset_gate_num must be one of {16, 8, 4}");
  }
  if (!one_of(subset_link_num, {16, 8, 4, 2, 1})) {
    throw config_error("subset_link_num must be one of {16, 8, 4, 2, 1}");
  }
  if (!(learning_rate > 0.0)) {
    throw config_error("learning_rate must be positive");
  }
  if (epochs < 0) {
    throw config_error("epochs must be >= 0");
  }
  if (batch_size < 1) {
    throw config_error("batch_size must be >= 1");
  }
  if (!(tau_start > 0.0) || !(tau_end > 0.0) || tau_start < tau_end) {
    throw config_error("temperatures must satisfy tau_start >= tau_end > 0");
  }
}

double tau_at_epoch(const train_config& cfg, int epoch) {
  if (cfg.epochs <= 1 || epoch >= cfg.epochs - 1) return cfg.tau_end;
  if (epoch <= 0) return cfg.tau_start;
  const double t = static_cast<double>(epoch) / (cfg.epochs - 1);
  return cfg.tau_start * std::pow(cfg.tau_end / cfg.tau_start, t);
}

dln_model build(const train_config& config, const feature_matrix& train_data) {
  config.validate();
  if (train_data.cols() < 1) {
    throw config_error("build: need at least one feature");
  }
  if (train_data.num_classes < 2) {
    throw config_error("build: need at least two classes");
  }

  for (long long lbl : train_data.labels) {
    if (lbl < 0 || lbl >= train_data.num_classes) {
      throw range_error("build: labels must be contiguous class ids");
    }
  }

  dln_model model;
  model.config = config;
  model.features = train_data.columns;
  model.sum.num_classes = train_data.num_classes;
  model.final_tau = config.tau_start;

  for (int c = 0; c < train_data.cols(); ++c) {
    if (train_data.columns[static_cast<std::size_t>(c)].kind == column_kind::continuous) {
      model.continuous_columns.push_back(c);
    } else {
      model.passthrough_columns.push_back(c);
    }
  }

  // Threshold neurons, biases from per-feature decision trees.
  model.threshold.group_size = config.group_size;
  std::vector<int> labels(train_data.labels.begin(), train_data.labels.end());
  for (int col : model.continuous_columns) {
    std::vector<double> column(static_cast<std::size_t>(train_data.rows));
    for (int r = 0; r < train_data.rows; ++r) column[static_cast<std::size_t>(r)] = train_data.at(r, col);
    const threshold_init init =
        threshold_init_from_tree(column, labels, config.group_size, train_data.num_classes);
    for (int g = 0; g < config.group_size; ++g) {
      model.threshold.bias.push_back(init.bias[static_cast<std::size_t>(g)]);
      model.threshold.slope.push_back(init.slope[static_cast<std::size_t>(g)]);
      model.threshold.input_index.push_back(col);
    }
  }

  const int bin_width = model.binarized_width();
  if (bin_width < 1) {
    throw config_error("build: binarized input width is zero");
  }

  std::mt19937_64 rng(config.seed);

  int prev_width = bin_width;
  for (std::size_t l = 0; l < config.hidden_sizes.size(); ++l) {
    const int out = config.hidden_sizes[l];
    const int in = (l == 0) ? bin_width
                            : (config.concat_input ? prev_width + bin_width : prev_width);
    logic_layer layer;
    layer.in_width = in;
    layer.gate_w = gaussian_matrix(out, kOperatorCount, rng);
    layer.link_a_w = gaussian_matrix(out, in, rng);
    layer.link_b_w = gaussian_matrix(out, in, rng);
    layer.gate_mask.resize(static_cast<std::size_t>(out));
    layer.link_mask_a.resize(static_cast<std::size_t>(out));
    layer.link_mask_b.resize(static_cast<std::size_t>(out));
    for (int i = 0; i < out; ++i) {
      layer.gate_mask[static_cast<std::size_t>(i)] =
          sample_subset(kOperatorCount, config.subset_gate_num, rng);
      layer.link_mask_a[static_cast<std::size_t>(i)] =
          sample_subset(in, config.subset_link_num, rng);
      layer.link_mask_b[static_cast<std::size_t>(i)] =
          sample_subset(in, config.subset_link_num, rng);
    }
    model.layers.push_back(std::move(layer));
    prev_width = out;
  }

  model.sum.link_w = gaussian_matrix(prev_width, train_data.num_classes, rng);
  return model;
}

std::vector<double> soft_predict(const dln_model& model, const std::vector<double>& x,
                                 double tau) {
  if (static_cast<int>(x.size()) != model.num_features()) {
    throw structure_error("soft_predict: feature count mismatch");
  }
  std::vector<double> z0 = threshold_soft_forward(model.threshold, x, tau, model.config.ste.threshold);
  z0.reserve(static_cast<std::size_t>(model.binarized_width()));
  for (int col : model.passthrough_columns) z0.push_back(x[static_cast<std::size_t>(col)]);

  std::vector<double> h = z0;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    std::vector<double> input;
    if (l == 0) {
      input = z0;
    } else if (model.config.concat_input) {
      input = h;
      input.insert(input.end(), z0.begin(), z0.end());
    } else {
      input = h;
    }
    h = logic_soft_forward(model.layers[l], input, tau, model.config.ste.logic);
  }
  return sum_soft_forward(model.sum, h, tau, model.config.ste.sum);
}

std::vector<std::uint8_t> binarize_input(const dln_model& model, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != model.num_features()) {
    throw structure_error("binarize_input: feature count mismatch");
  }
  std::vector<std::uint8_t> bits = threshold_hard_forward(model.threshold, x);
  for (int col : model.passthrough_columns) {
    bits.push_back(x[static_cast<std::size_t>(col)] >= 0.5 ? 1 : 0);
  }
  return bits;
}

hard_result hard_predict_bits(const dln_model& model, const std::vector<std::uint8_t>& bits) {
  if (static_cast<int>(bits.size()) != model.binarized_width()) {
    throw structure_error("hard_predict_bits: width mismatch");
  }
  std::vector<std::uint8_t> h = bits;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    std::vector<std::uint8_t> input;
    if (l == 0) {
      input = bits;
    } else if (model.config.concat_input) {
      input = h;
      input.insert(input.end(), bits.begin(), bits.end());
    } else {
      input = h;
    }
    h = logic_hard_forward(model.layers[l], input);
  }
  hard_result res;
  res.scores = sum_hard_forward(model.sum, h, model.final_tau);
  res.label = 0;
  for (int c = 1; c < model.num_classes(); ++c) {
    if (res.scores[static_cast<std::size_t>(c)] > res.scores[static_cast<std::size_t>(res.label)]) {
      res.label = c;
    }
  }
  return res;
}

hard_result hard_predict(const dln_model& model, const std::vector<double>& x) {
  return hard_predict_bits(model, binarize_input(model, x));
}

double loss(const std::vector<double>& scores, int label) {
  if (label < 0 || label >= static_cast<int>(scores.size())) {
    throw range_error("loss: label out of range");
  }
  const double hi = *std::max_element(scores.begin(), scores.end());
  double total = 0.0;
  for (double s : scores) total += std::exp(s - hi);
  return hi + std::log(total) - scores[static_cast<std::size_t>(label)];
}

std::vector<double> loss_grad(const std::vector<double>& scores, int label) {
  if (label < 0 || label >= static_cast<int>(scores.size())) {
    throw range_error("loss_grad: label out of range");
  }
  const double hi = *std::max_element(scores.begin(), scores.end());
  double total = 0.0;
  std::vector<double> g(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    g[i] = std::exp(scores[i] - hi);
    total += g[i];
  }
  for (std::size_t i = 0; i < scores.size(); ++i) g[i] /= total;
  g[static_cast<std::size_t>(label)] -= 1.0;
  return g;
}

}  // namespace dln
