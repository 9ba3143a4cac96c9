// SPDX-License-Identifier: Apache-2.0
#include "dln/layers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dln/errors.hpp"
#include "dln/logic.hpp"

namespace dln {

namespace {

void check_tau(double tau) {
  if (!(tau > 0.0)) {
    throw invalid_temperature_error("temperature must be > 0, got " + std::to_string(tau));
  }
}

// Softmax of w[mask]/tau, written into out (resized to mask size).
void masked_softmax(const matrix& w, int row, const std::vector<int>& mask, double tau,
                    std::vector<double>& out) {
  if (mask.empty()) {
    throw structure_error("empty candidate mask");
  }
  out.resize(mask.size());
  double hi = w(row, mask[0]);
  for (int idx : mask) hi = std::max(hi, w(row, idx));
  double total = 0.0;
  for (std::size_t j = 0; j < mask.size(); ++j) {
    out[j] = std::exp((w(row, mask[j]) - hi) / tau);
    total += out[j];
  }
  for (double& p : out) p /= total;
}

}  // namespace

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// ---------------------------------------------------------------------------
// Threshold layer
// ---------------------------------------------------------------------------

void threshold_grads::resize(const threshold_layer& layer) {
  bias.assign(layer.bias.size(), 0.0);
  slope.assign(layer.slope.size(), 0.0);
}

void threshold_grads::zero() {
  bias.assign(bias.size(), 0.0);
  slope.assign(slope.size(), 0.0);
}

std::vector<double> threshold_soft_forward(const threshold_layer& layer,
                                           const std::vector<double>& x, double tau, bool ste,
                                           threshold_cache* cache) {
  check_tau(tau);
  const int n = layer.width();
  std::vector<double> y(static_cast<std::size_t>(n));
  if (cache) {
    cache->pre.resize(static_cast<std::size_t>(n));
    cache->x = x;
    cache->tau = tau;
  }
  for (int i = 0; i < n; ++i) {
    const double xi = x.at(static_cast<std::size_t>(layer.input_index[i]));
    const double arg = layer.slope[i] * (xi - layer.bias[i]);
    const double pre = arg / tau;
    if (cache) cache->pre[static_cast<std::size_t>(i)] = pre;
    y[static_cast<std::size_t>(i)] = ste ? (arg >= 0.0 ? 1.0 : 0.0) : sigmoid(pre);
  }
  return y;
}

std::vector<std::uint8_t> threshold_hard_forward(const threshold_layer& layer,
                                                 const std::vector<double>& x) {
  const int n = layer.width();
  std::vector<std::uint8_t> y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double xi = x.at(static_cast<std::size_t>(layer.input_index[i]));
    // Heaviside(0) = 1
    y[static_cast<std::size_t>(i)] = layer.slope[i] * (xi - layer.bias[i]) >= 0.0 ? 1 : 0;
  }
  return y;
}

void threshold_backward(const threshold_layer& layer, const threshold_cache& cache,
                        const std::vector<double>& upstream, threshold_grads& grads,
                        std::vector<double>& x_grad) {
  const int n = layer.width();
  if (static_cast<int>(upstream.size()) != n) {
    throw structure_error("threshold backward: upstream size mismatch");
  }
  for (int i = 0; i < n; ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    const double s = sigmoid(cache.pre[si]);
    const double dpre = upstream[si] * s * (1.0 - s);
    const int col = layer.input_index[i];
    const double xi = cache.x[static_cast<std::size_t>(col)];
    grads.bias[si] += dpre * (-layer.slope[i] / cache.tau);
    grads.slope[si] += dpre * (xi - layer.bias[i]) / cache.tau;
    x_grad[static_cast<std::size_t>(col)] += dpre * layer.slope[i] / cache.tau;
  }
}

// ---------------------------------------------------------------------------
// Logic layer
// ---------------------------------------------------------------------------

void logic_grads::resize(const logic_layer& layer) {
  gate_w = matrix(layer.gate_w.rows(), layer.gate_w.cols());
  link_a_w = matrix(layer.link_a_w.rows(), layer.link_a_w.cols());
  link_b_w = matrix(layer.link_b_w.rows(), layer.link_b_w.cols());
}

void logic_grads::zero() {
  gate_w.fill(0.0);
  link_a_w.fill(0.0);
  link_b_w.fill(0.0);
}

std::vector<double> logic_soft_forward(const logic_layer& layer, const std::vector<double>& x,
                                       double tau, bool ste, logic_cache* cache) {
  check_tau(tau);
  if (static_cast<int>(x.size()) != layer.in_width) {
    throw structure_error("logic forward: input width mismatch");
  }
  const int out = layer.width();
  std::vector<double> y(static_cast<std::size_t>(out));
  if (cache) {
    cache->gate_p.resize(static_cast<std::size_t>(out));
    cache->alpha.resize(static_cast<std::size_t>(out));
    cache->beta.resize(static_cast<std::size_t>(out));
    cache->a.resize(static_cast<std::size_t>(out));
    cache->b.resize(static_cast<std::size_t>(out));
    cache->soft_y.resize(static_cast<std::size_t>(out));
    cache->x = x;
    cache->tau = tau;
  }

  std::vector<double> p, alpha, beta;
  for (int i = 0; i < out; ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    const auto& gm = layer.gate_mask[si];
    const auto& ma = layer.link_mask_a[si];
    const auto& mb = layer.link_mask_b[si];

    masked_softmax(layer.gate_w, i, gm, tau, p);
    masked_softmax(layer.link_a_w, i, ma, tau, alpha);
    masked_softmax(layer.link_b_w, i, mb, tau, beta);

    double a = 0.0, b = 0.0;
    for (std::size_t j = 0; j < ma.size(); ++j) a += alpha[j] * x[static_cast<std::size_t>(ma[j])];
    for (std::size_t j = 0; j < mb.size(); ++j) b += beta[j] * x[static_cast<std::size_t>(mb[j])];
    // convex mixtures of unit-interval values; clamp accumulated roundoff
    a = std::clamp(a, 0.0, 1.0);
    b = std::clamp(b, 0.0, 1.0);

    double soft = 0.0;
    for (std::size_t j = 0; j < gm.size(); ++j) soft += p[j] * soft_logic(gm[j], a, b);
    soft = std::clamp(soft, 0.0, 1.0);

    if (cache) {
      cache->gate_p[si] = p;
      cache->alpha[si] = alpha;
      cache->beta[si] = beta;
      cache->a[si] = a;
      cache->b[si] = b;
      cache->soft_y[si] = soft;
    }

    if (ste) {
      // Discretize the three categorical choices; on binary inputs this is
      // exactly the hard-gate value.
      const int k = argmax_masked(layer.gate_w, i, gm);
      const int ja = argmax_masked(layer.link_a_w, i, ma);
      const int jb = argmax_masked(layer.link_b_w, i, mb);
      y[si] = soft_logic(k, x[static_cast<std::size_t>(ja)], x[static_cast<std::size_t>(jb)]);
    } else {
      y[si] = soft;
    }
  }
  return y;
}

std::vector<std::uint8_t> logic_hard_forward(const logic_layer& layer,
                                             const std::vector<std::uint8_t>& x) {
  if (static_cast<int>(x.size()) != layer.in_width) {
    throw structure_error("logic hard forward: input width mismatch");
  }
  const int out = layer.width();
  std::vector<std::uint8_t> y(static_cast<std::size_t>(out));
  for (int i = 0; i < out; ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    const int k = argmax_masked(layer.gate_w, i, layer.gate_mask[si]);
    const int ja = argmax_masked(layer.link_a_w, i, layer.link_mask_a[si]);
    const int jb = argmax_masked(layer.link_b_w, i, layer.link_mask_b[si]);
    y[si] = static_cast<std::uint8_t>(
        hard_logic(k, x[static_cast<std::size_t>(ja)], x[static_cast<std::size_t>(jb)]));
  }
  return y;
}

void logic_backward(const logic_layer& layer, const logic_cache& cache,
                    const std::vector<double>& upstream, logic_grads& grads,
                    std::vector<double>& x_grad) {
  const int out = layer.width();
  if (static_cast<int>(upstream.size()) != out) {
    throw structure_error("logic backward: upstream size mismatch");
  }
  const double inv_tau = 1.0 / cache.tau;
  for (int i = 0; i < out; ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    const double up = upstream[si];
    if (up == 0.0) continue;
    const auto& gm = layer.gate_mask[si];
    const auto& ma = layer.link_mask_a[si];
    const auto& mb = layer.link_mask_b[si];
    const auto& p = cache.gate_p[si];
    const auto& alpha = cache.alpha[si];
    const auto& beta = cache.beta[si];
    const double a = cache.a[si];
    const double b = cache.b[si];
    const double soft = cache.soft_y[si];

    // Gate weights: dy/dW_m = P_m (f_m - y) / tau
    for (std::size_t j = 0; j < gm.size(); ++j) {
      grads.gate_w(i, gm[j]) += up * inv_tau * p[j] * (soft_logic(gm[j], a, b) - soft);
    }

    double dy_da = 0.0, dy_db = 0.0;
    for (std::size_t j = 0; j < gm.size(); ++j) {
      double da, db;
      soft_logic_grad(gm[j], a, b, da, db);
      dy_da += p[j] * da;
      dy_db += p[j] * db;
    }

    for (std::size_t j = 0; j < ma.size(); ++j) {
      const double xj = cache.x[static_cast<std::size_t>(ma[j])];
      grads.link_a_w(i, ma[j]) += up * dy_da * inv_tau * alpha[j] * (xj - a);
      x_grad[static_cast<std::size_t>(ma[j])] += up * dy_da * alpha[j];
    }
    for (std::size_t j = 0; j < mb.size(); ++j) {
      const double xj = cache.x[static_cast<std::size_t>(mb[j])];
      grads.link_b_w(i, mb[j]) += up * dy_db * inv_tau * beta[j] * (xj - b);
      x_grad[static_cast<std::size_t>(mb[j])] += up * dy_db * beta[j];
    }
  }
}

int argmax_masked(const matrix& w, int row, const std::vector<int>& mask) {
  if (mask.empty()) {
    throw structure_error("empty candidate mask");
  }
  int best = mask[0];
  double best_w = w(row, best);
  for (int idx : mask) {
    if (w(row, idx) > best_w) {
      best_w = w(row, idx);
      best = idx;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Sum layer
// ---------------------------------------------------------------------------

void sum_grads::resize(const sum_layer& layer) {
  link_w = matrix(layer.link_w.rows(), layer.link_w.cols());
}

void sum_grads::zero() { link_w.fill(0.0); }

std::vector<double> sum_soft_forward(const sum_layer& layer, const std::vector<double>& x,
                                     double tau, bool ste, sum_cache* cache) {
  check_tau(tau);
  if (static_cast<int>(x.size()) != layer.in_width()) {
    throw structure_error("sum forward: input width mismatch");
  }
  if (cache) {
    cache->x = x;
    cache->tau = tau;
  }
  std::vector<double> y(static_cast<std::size_t>(layer.num_classes), 0.0);
  for (int c = 0; c < layer.num_classes; ++c) {
    double acc = 0.0;
    for (int j = 0; j < layer.in_width(); ++j) {
      const double gate = sigmoid(layer.link_w(j, c) / tau);
      const double g = ste ? (gate >= kSumThreshold ? 1.0 : 0.0) : gate;
      acc += g * x[static_cast<std::size_t>(j)];
    }
    y[static_cast<std::size_t>(c)] = acc;
  }
  return y;
}

std::vector<int> sum_hard_forward(const sum_layer& layer, const std::vector<std::uint8_t>& x,
                                  double final_tau) {
  if (static_cast<int>(x.size()) != layer.in_width()) {
    throw structure_error("sum hard forward: input width mismatch");
  }
  std::vector<int> y(static_cast<std::size_t>(layer.num_classes), 0);
  for (int c = 0; c < layer.num_classes; ++c) {
    int acc = 0;
    for (int j = 0; j < layer.in_width(); ++j) {
      if (sigmoid(layer.link_w(j, c) / final_tau) >= kSumThreshold) {
        acc += x[static_cast<std::size_t>(j)];
      }
    }
    y[static_cast<std::size_t>(c)] = acc;
  }
  return y;
}

void sum_backward(const sum_layer& layer, const sum_cache& cache,
                  const std::vector<double>& upstream, sum_grads& grads,
                  std::vector<double>& x_grad) {
  if (static_cast<int>(upstream.size()) != layer.num_classes) {
    throw structure_error("sum backward: upstream size mismatch");
  }
  const double inv_tau = 1.0 / cache.tau;
  for (int c = 0; c < layer.num_classes; ++c) {
    const double up = upstream[static_cast<std::size_t>(c)];
    if (up == 0.0) continue;
    for (int j = 0; j < layer.in_width(); ++j) {
      const double g = sigmoid(layer.link_w(j, c) * inv_tau);
      grads.link_w(j, c) += up * cache.x[static_cast<std::size_t>(j)] * g * (1.0 - g) * inv_tau;
      x_grad[static_cast<std::size_t>(j)] += up * g;
    }
  }
}

}  // namespace dln
