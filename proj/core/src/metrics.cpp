// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "dln/data.hpp"
#include "dln/errors.hpp"

namespace dln {

double balanced_accuracy(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  if (y_true.empty() || y_true.size() != y_pred.size()) {
    throw range_error("balanced_accuracy: empty or mismatched inputs");
  }
  std::map<int, std::pair<int, int>> per_class;  // class -> (correct, total)
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    auto& [correct, total] = per_class[y_true[i]];
    total += 1;
    if (y_pred[i] == y_true[i]) correct += 1;
  }
  double recall_sum = 0.0;
  for (const auto& [cls, counts] : per_class) {
    recall_sum += static_cast<double>(counts.first) / counts.second;
  }
  return recall_sum / static_cast<double>(per_class.size());
}

double best_at_k(std::vector<double> values, int k) {
  const int n = static_cast<int>(values.size());
  if (n == 0 || k < 1 || k > n) {
    throw range_error("best_at_k: need 1 <= k <= n, got k=" + std::to_string(k) +
                      ", n=" + std::to_string(n));
  }
  std::sort(values.begin(), values.end());
  if (k == n) return values.back();
  if (k == 1) {
    double total = 0.0;
    for (double v : values) total += v;
    return total / n;
  }

  // Weight of the i-th order statistic (1-based, i >= k) is
  // C(i-1, k-1) / C(n, k); computed by the ratio recurrence
  // u_{i+1} = u_i * i / (i - k + 1) and normalized so the weights sum to 1.
  std::vector<long double> u(static_cast<std::size_t>(n + 1), 0.0L);
  long double total = 0.0L;
  u[static_cast<std::size_t>(k)] = 1.0L;
  total = 1.0L;
  for (int i = k; i < n; ++i) {
    u[static_cast<std::size_t>(i + 1)] =
        u[static_cast<std::size_t>(i)] * static_cast<long double>(i) / (i - k + 1);
    total += u[static_cast<std::size_t>(i + 1)];
  }
  long double acc = 0.0L;
  for (int i = k; i <= n; ++i) {
    acc += u[static_cast<std::size_t>(i)] / total * values[static_cast<std::size_t>(i - 1)];
  }
  return static_cast<double>(acc);
}

}  // namespace dln
