// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "dln/errors.hpp"
#include "dln/network.hpp"

namespace dln {

namespace {

struct adam_state {
  std::vector<double> m, v;
  long long t = 0;

  explicit adam_state(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEps = 1e-8;

void adam_step(double* params, const double* grad, std::size_t n, adam_state& st, double lr) {
  st.t += 1;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(st.t));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(st.t));
  for (std::size_t i = 0; i < n; ++i) {
    st.m[i] = kBeta1 * st.m[i] + (1.0 - kBeta1) * grad[i];
    st.v[i] = kBeta2 * st.v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
    const double mhat = st.m[i] / bc1;
    const double vhat = st.v[i] / bc2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + kEps);
  }
}

// Per-sample forward/backward workspace reused across the whole run.
struct workspace {
  threshold_cache th_cache;
  std::vector<logic_cache> logic_caches;
  sum_cache sm_cache;

  threshold_grads th_grads;
  std::vector<logic_grads> lg_grads;
  sum_grads sm_grads;

  std::vector<std::vector<double>> layer_inputs;  // per logic layer
  std::vector<double> z0;
  std::vector<double> x_grad_scratch;
};

// Forward with caches, loss gradient, then backward accumulation into the
// workspace gradient buffers. Returns the sample loss.
double accumulate_sample(const dln_model& model, const std::vector<double>& x, int label,
                         double tau, workspace& ws) {
  const auto& cfg = model.config;

  std::vector<double>& z0 = ws.z0;
  z0 = threshold_soft_forward(model.threshold, x, tau, cfg.ste.threshold, &ws.th_cache);
  for (int col : model.passthrough_columns) z0.push_back(x[static_cast<std::size_t>(col)]);

  const std::size_t num_layers = model.layers.size();
  ws.layer_inputs.resize(num_layers);
  std::vector<double> h;
  for (std::size_t l = 0; l < num_layers; ++l) {
    std::vector<double>& input = ws.layer_inputs[l];
    if (l == 0) {
      input = z0;
    } else if (cfg.concat_input) {
      input = h;
      input.insert(input.end(), z0.begin(), z0.end());
    } else {
      input = h;
    }
    h = logic_soft_forward(model.layers[l], input, tau, cfg.ste.logic, &ws.logic_caches[l]);
  }

  const std::vector<double> scores = sum_soft_forward(model.sum, h, tau, cfg.ste.sum, &ws.sm_cache);
  const double sample_loss = loss(scores, label);
  std::vector<double> upstream = loss_grad(scores, label);

  // Backward through the sum layer into the last hidden activation.
  std::vector<double> h_grad(h.size(), 0.0);
  sum_backward(model.sum, ws.sm_cache, upstream, ws.sm_grads, h_grad);

  // Backward through the logic stack; concat tails accumulate into z0's grad.
  std::vector<double> z0_grad(z0.size(), 0.0);
  for (std::size_t l = num_layers; l-- > 0;) {
    std::vector<double> in_grad(ws.layer_inputs[l].size(), 0.0);
    logic_backward(model.layers[l], ws.logic_caches[l], h_grad, ws.lg_grads[l], in_grad);
    if (l == 0) {
      for (std::size_t i = 0; i < z0.size(); ++i) z0_grad[i] += in_grad[i];
    } else {
      const std::size_t prev = static_cast<std::size_t>(model.layers[l - 1].width());
      h_grad.assign(in_grad.begin(), in_grad.begin() + static_cast<std::ptrdiff_t>(prev));
      if (cfg.concat_input) {
        for (std::size_t i = 0; i < z0.size(); ++i) z0_grad[i] += in_grad[prev + i];
      }
    }
  }

  // Threshold slice of z0; the passthrough tail would flow to raw inputs.
  std::vector<double> th_upstream(z0_grad.begin(),
                                  z0_grad.begin() + model.threshold.width());
  ws.x_grad_scratch.assign(x.size(), 0.0);
  threshold_backward(model.threshold, ws.th_cache, th_upstream, ws.th_grads, ws.x_grad_scratch);

  return sample_loss;
}

}  // namespace

model_grads loss_gradients(const dln_model& model, const std::vector<double>& x, int label,
                           double tau) {
  workspace ws;
  ws.logic_caches.resize(model.layers.size());
  ws.lg_grads.resize(model.layers.size());
  ws.th_grads.resize(model.threshold);
  for (std::size_t l = 0; l < model.layers.size(); ++l) ws.lg_grads[l].resize(model.layers[l]);
  ws.sm_grads.resize(model.sum);
  accumulate_sample(model, x, label, tau, ws);

  model_grads out;
  out.threshold = std::move(ws.th_grads);
  out.layers = std::move(ws.lg_grads);
  out.sum = std::move(ws.sm_grads);
  return out;
}

void train(dln_model& model, const feature_matrix& data) {
  const train_config& cfg = model.config;
  cfg.validate();
  if (data.rows == 0) {
    throw range_error("train: empty dataset");
  }
  if (data.cols() != model.num_features()) {
    throw structure_error("train: feature count mismatch");
  }
  for (long long lbl : data.labels) {
    if (lbl < 0 || lbl >= model.num_classes()) {
      throw range_error("train: label out of range");
    }
  }
  if (cfg.epochs == 0) return;

  workspace ws;
  ws.logic_caches.resize(model.layers.size());
  ws.lg_grads.resize(model.layers.size());
  ws.th_grads.resize(model.threshold);
  for (std::size_t l = 0; l < model.layers.size(); ++l) ws.lg_grads[l].resize(model.layers[l]);
  ws.sm_grads.resize(model.sum);

  adam_state th_bias_st(model.threshold.bias.size());
  adam_state th_slope_st(model.threshold.slope.size());
  std::vector<adam_state> gate_st, link_a_st, link_b_st;
  for (const auto& layer : model.layers) {
    gate_st.emplace_back(layer.gate_w.data().size());
    link_a_st.emplace_back(layer.link_a_w.data().size());
    link_b_st.emplace_back(layer.link_b_w.data().size());
  }
  adam_state sum_st(model.sum.link_w.data().size());

  std::mt19937_64 shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<int> indices(static_cast<std::size_t>(data.rows));
  std::iota(indices.begin(), indices.end(), 0);

  const int batch = std::min(cfg.batch_size, data.rows);
  model.train_loss.clear();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double tau = tau_at_epoch(cfg, epoch);
    const bool update_fn = cfg.phase_unified || epoch % 2 == 0;
    const bool update_conn = cfg.phase_unified || epoch % 2 == 1;

    std::shuffle(indices.begin(), indices.end(), shuffle_rng);

    double epoch_loss = 0.0;
    for (int start = 0; start < data.rows; start += batch) {
      const int stop = std::min(start + batch, data.rows);
      const double scale = 1.0 / (stop - start);

      ws.th_grads.zero();
      for (auto& g : ws.lg_grads) g.zero();
      ws.sm_grads.zero();

      for (int bi = start; bi < stop; ++bi) {
        const int row = indices[static_cast<std::size_t>(bi)];
        epoch_loss += accumulate_sample(model, data.row(row),
                                        static_cast<int>(data.labels[static_cast<std::size_t>(row)]),
                                        tau, ws);
      }

      auto scaled = [scale](std::vector<double>& g) {
        for (double& v : g) v *= scale;
      };
      scaled(ws.th_grads.bias);
      scaled(ws.th_grads.slope);
      for (auto& g : ws.lg_grads) {
        scaled(g.gate_w.data());
        scaled(g.link_a_w.data());
        scaled(g.link_b_w.data());
      }
      scaled(ws.sm_grads.link_w.data());

      if (update_fn) {
        adam_step(model.threshold.bias.data(), ws.th_grads.bias.data(),
                  model.threshold.bias.size(), th_bias_st, cfg.learning_rate);
        adam_step(model.threshold.slope.data(), ws.th_grads.slope.data(),
                  model.threshold.slope.size(), th_slope_st, cfg.learning_rate);
        for (std::size_t l = 0; l < model.layers.size(); ++l) {
          adam_step(model.layers[l].gate_w.data().data(), ws.lg_grads[l].gate_w.data().data(),
                    model.layers[l].gate_w.data().size(), gate_st[l], cfg.learning_rate);
        }
      }
      if (update_conn) {
        for (std::size_t l = 0; l < model.layers.size(); ++l) {
          adam_step(model.layers[l].link_a_w.data().data(), ws.lg_grads[l].link_a_w.data().data(),
                    model.layers[l].link_a_w.data().size(), link_a_st[l], cfg.learning_rate);
          adam_step(model.layers[l].link_b_w.data().data(), ws.lg_grads[l].link_b_w.data().data(),
                    model.layers[l].link_b_w.data().size(), link_b_st[l], cfg.learning_rate);
        }
        adam_step(model.sum.link_w.data().data(), ws.sm_grads.link_w.data().data(),
                  model.sum.link_w.data().size(), sum_st, cfg.learning_rate);
      }
    }

    epoch_loss /= data.rows;
    if (!std::isfinite(epoch_loss)) {
      throw error("train: non-finite loss at epoch " + std::to_string(epoch) +
                  " (tau=" + std::to_string(tau) + ", lr=" + std::to_string(cfg.learning_rate) +
                  ")");
    }
    model.train_loss.push_back(epoch_loss);
    model.final_tau = tau;
  }
}

}  // namespace dln
