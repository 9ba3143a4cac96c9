// SPDX-License-Identifier: Apache-2.0
#ifndef DLN_LAYERS_HPP
#define DLN_LAYERS_HPP

#include <cstdint>
#include <vector>

#include "dln/matrix.hpp"

namespace dln {

double sigmoid(double z);

// Straight-through estimation per layer type: the forward pass emits the
// discretized value while gradients flow through the relaxed path.
struct ste_flags {
  bool threshold = false;
  bool logic = false;
  bool sum = false;

  bool operator==(const ste_flags&) const = default;
};

// ---------------------------------------------------------------------------
// Threshold layer: learnable comparators binarizing continuous features.
// Training:  y_i = sigmoid(s_i * (x[idx_i] - b_i) / tau)
// Inference: y_i = 1 if s_i * (x[idx_i] - b_i) >= 0 else 0
// ---------------------------------------------------------------------------

struct threshold_layer {
  std::vector<double> bias;
  std::vector<double> slope;
  std::vector<int> input_index;  // source feature column per neuron
  int group_size = 0;            // neurons per continuous feature

  int width() const { return static_cast<int>(bias.size()); }

  bool operator==(const threshold_layer&) const = default;
};

struct threshold_cache {
  std::vector<double> pre;  // s*(x-b)/tau
  std::vector<double> x;
  double tau = 1.0;
};

struct threshold_grads {
  std::vector<double> bias;
  std::vector<double> slope;

  void resize(const threshold_layer& layer);
  void zero();
};

std::vector<double> threshold_soft_forward(const threshold_layer& layer,
                                           const std::vector<double>& x, double tau,
                                           bool ste = false, threshold_cache* cache = nullptr);

std::vector<std::uint8_t> threshold_hard_forward(const threshold_layer& layer,
                                                 const std::vector<double>& x);

// Accumulates parameter gradients and the gradient w.r.t. the raw input
// (x_grad must be pre-sized to the feature count).
void threshold_backward(const threshold_layer& layer, const threshold_cache& cache,
                        const std::vector<double>& upstream, threshold_grads& grads,
                        std::vector<double>& x_grad);

// Decision-tree initialization for one continuous feature: Gini impurity,
// best-first growth, split candidates at midpoints of consecutive distinct
// values. Produces exactly group_size thresholds, padding with evenly spaced
// quantiles of the column when the tree stops early; a constant column yields
// all-0.5 biases. Slopes start at 2.
struct threshold_init {
  std::vector<double> bias;
  std::vector<double> slope;
};

threshold_init threshold_init_from_tree(const std::vector<double>& column,
                                        const std::vector<int>& labels, int group_size,
                                        int num_classes);

// ---------------------------------------------------------------------------
// Logic layer: each neuron mixes the 16 two-input operators over two mixed
// input links. Candidate subsets (gate and link masks) restrict softmaxes,
// gradients and argmax to the sampled entries.
// ---------------------------------------------------------------------------

struct logic_layer {
  int in_width = 0;
  matrix gate_w;    // out x 16
  matrix link_a_w;  // out x in
  matrix link_b_w;  // out x in
  std::vector<std::vector<int>> gate_mask;    // per-neuron candidate op ids, sorted
  std::vector<std::vector<int>> link_mask_a;  // per-neuron candidate inputs, sorted
  std::vector<std::vector<int>> link_mask_b;

  int width() const { return gate_w.rows(); }

  bool operator==(const logic_layer&) const = default;
};

struct logic_cache {
  std::vector<std::vector<double>> gate_p;  // softmax over gate mask
  std::vector<std::vector<double>> alpha;   // softmax over link mask a
  std::vector<std::vector<double>> beta;    // softmax over link mask b
  std::vector<double> a, b;                 // mixed link values
  std::vector<double> soft_y;               // soft mixture output
  std::vector<double> x;
  double tau = 1.0;
};

struct logic_grads {
  matrix gate_w, link_a_w, link_b_w;

  void resize(const logic_layer& layer);
  void zero();
};

std::vector<double> logic_soft_forward(const logic_layer& layer, const std::vector<double>& x,
                                       double tau, bool ste = false,
                                       logic_cache* cache = nullptr);

std::vector<std::uint8_t> logic_hard_forward(const logic_layer& layer,
                                             const std::vector<std::uint8_t>& x);

void logic_backward(const logic_layer& layer, const logic_cache& cache,
                    const std::vector<double>& upstream, logic_grads& grads,
                    std::vector<double>& x_grad);

// Argmax over the masked entries of one weight row; ties break to the lowest
// index. Shared by the hard forward pass and circuit discretization.
int argmax_masked(const matrix& w, int row, const std::vector<int>& mask);

// ---------------------------------------------------------------------------
// Sum layer: per-class count of active rules.
// Training:  y_c = sum_j sigmoid(S[j,c]/tau) * x_j
// Inference: y_c = sum_j [sigmoid(S[j,c]/tau_final) >= 0.8] * x_j
// ---------------------------------------------------------------------------

inline constexpr double kSumThreshold = 0.8;  // fixed, not trainable

struct sum_layer {
  matrix link_w;  // in x C
  int num_classes = 0;

  int in_width() const { return link_w.rows(); }

  bool operator==(const sum_layer&) const = default;
};

struct sum_cache {
  std::vector<double> x;
  double tau = 1.0;
};

struct sum_grads {
  matrix link_w;

  void resize(const sum_layer& layer);
  void zero();
};

std::vector<double> sum_soft_forward(const sum_layer& layer, const std::vector<double>& x,
                                     double tau, bool ste = false, sum_cache* cache = nullptr);

std::vector<int> sum_hard_forward(const sum_layer& layer, const std::vector<std::uint8_t>& x,
                                  double final_tau);

void sum_backward(const sum_layer& layer, const sum_cache& cache,
                  const std::vector<double>& upstream, sum_grads& grads,
                  std::vector<double>& x_grad);

}  // namespace dln

#endif  // DLN_LAYERS_HPP
