// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "dln/data.hpp"
#include "dln/errors.hpp"

namespace dln {

namespace {

const char* const kFeatureNames[kBasicFeatureCount] = {
    "mean",           "std",           "min",
    "max",            "median",        "iqr",
    "autocorr_lag1",  "autocorr_lag2", "autocorr_lag3",
    "zero_cross_rate", "trend_slope",  "mean_abs_diff",
    "local_max_count", "spectral_centroid"};

// Nearest-rank quantile of an ascending vector.
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const int n = static_cast<int>(sorted.size());
  int rank = static_cast<int>(std::ceil(p * n));
  rank = std::clamp(rank, 1, n);
  return sorted[static_cast<std::size_t>(rank - 1)];
}

// Lag-k autocorrelation with per-lag normalization:
//   r_k = (sum_{t<n-k} c_t c_{t+k} / (n-k)) / (sum_t c_t^2 / n)
// where c is the mean-centered series. An alternating series gives exactly -1.
double autocorrelation(const std::vector<double>& centered, int lag) {
  const int n = static_cast<int>(centered.size());
  double num = 0.0;
  for (int t = 0; t + lag < n; ++t) {
    num += centered[static_cast<std::size_t>(t)] * centered[static_cast<std::size_t>(t + lag)];
  }
  num /= (n - lag);
  double den = 0.0;
  for (double c : centered) den += c * c;
  den /= n;
  return num / den;
}

// Centroid of the half magnitude spectrum of the mean-centered series,
// normalized to [0,1] by the top bin index. Direct DFT; sequences here are
// short enough that O(n^2) is acceptable.
double spectral_centroid(const std::vector<double>& centered) {
  const int n = static_cast<int>(centered.size());
  const int half = n / 2;
  double weighted = 0.0;
  double total = 0.0;
  for (int k = 1; k <= half; ++k) {
    double re = 0.0, im = 0.0;
    for (int t = 0; t < n; ++t) {
      const double angle = -2.0 * std::numbers::pi * k * t / n;
      re += centered[static_cast<std::size_t>(t)] * std::cos(angle);
      im += centered[static_cast<std::size_t>(t)] * std::sin(angle);
    }
    const double mag = std::hypot(re, im);
    weighted += k * mag;
    total += mag;
  }
  if (total == 0.0) return 0.0;
  return weighted / (total * half);
}

void basic_features_of(const std::vector<double>& x, double* out) {
  const int n = static_cast<int>(x.size());
  const auto [mn_it, mx_it] = std::minmax_element(x.begin(), x.end());
  const double mn = *mn_it, mx = *mx_it;

  if (mn == mx) {
    // Degenerate rule: zero-variance statistics are defined as 0.
    const double v = mn;
    const double vals[kBasicFeatureCount] = {v, 0.0, v, v, v, 0.0, 0.0, 0.0,
                                             0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    std::copy(vals, vals + kBasicFeatureCount, out);
    return;
  }

  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;

  std::vector<double> centered(x.size());
  double var = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    centered[i] = x[i] - mean;
    var += centered[i] * centered[i];
  }
  var /= n;

  std::vector<double> sorted = x;
  std::sort(sorted.begin(), sorted.end());
  const double median = n % 2 == 1
                            ? sorted[static_cast<std::size_t>(n / 2)]
                            : 0.5 * (sorted[static_cast<std::size_t>(n / 2 - 1)] +
                                     sorted[static_cast<std::size_t>(n / 2)]);
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);

  int crossings = 0;
  for (int t = 0; t + 1 < n; ++t) {
    if (centered[static_cast<std::size_t>(t)] * centered[static_cast<std::size_t>(t + 1)] < 0.0) {
      ++crossings;
    }
  }

  // OLS slope against t = 0..n-1.
  const double t_mean = (n - 1) / 2.0;
  double s_xy = 0.0, s_xx = 0.0;
  for (int t = 0; t < n; ++t) {
    s_xy += (t - t_mean) * centered[static_cast<std::size_t>(t)];
    s_xx += (t - t_mean) * (t - t_mean);
  }

  double abs_diff = 0.0;
  for (int t = 0; t + 1 < n; ++t) {
    abs_diff += std::abs(x[static_cast<std::size_t>(t + 1)] - x[static_cast<std::size_t>(t)]);
  }

  int local_maxima = 0;
  for (int t = 1; t + 1 < n; ++t) {
    if (x[static_cast<std::size_t>(t)] > x[static_cast<std::size_t>(t - 1)] &&
        x[static_cast<std::size_t>(t)] > x[static_cast<std::size_t>(t + 1)]) {
      ++local_maxima;
    }
  }

  out[0] = mean;
  out[1] = std::sqrt(var);
  out[2] = mn;
  out[3] = mx;
  out[4] = median;
  out[5] = iqr;
  out[6] = autocorrelation(centered, 1);
  out[7] = autocorrelation(centered, 2);
  out[8] = autocorrelation(centered, 3);
  out[9] = static_cast<double>(crossings) / (n - 1);
  out[10] = s_xy / s_xx;
  out[11] = abs_diff / (n - 1);
  out[12] = static_cast<double>(local_maxima);
  out[13] = spectral_centroid(centered);
}

}  // namespace

feature_matrix extract_basic_features(const sequence_dataset& ds) {
  if (ds.sequences.empty()) {
    throw range_error("extract_basic_features: empty dataset");
  }
  feature_matrix m;
  for (const char* name : kFeatureNames) {
    m.columns.push_back({name, column_kind::continuous});
  }
  m.scaling.resize(m.columns.size());
  m.rows = ds.size();
  m.values.resize(static_cast<std::size_t>(ds.size()) * kBasicFeatureCount);
  m.labels = ds.labels;

  for (int r = 0; r < ds.size(); ++r) {
    const auto& seq = ds.sequences[static_cast<std::size_t>(r)];
    if (seq.size() < 4) {
      throw range_error("sequence " + std::to_string(r) + " is too short (" +
                        std::to_string(seq.size()) + " < 4 samples)");
    }
    basic_features_of(seq, m.values.data() + static_cast<std::size_t>(r) * kBasicFeatureCount);
  }
  return m;
}

}  // namespace dln
