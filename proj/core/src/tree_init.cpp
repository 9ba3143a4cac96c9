// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "dln/errors.hpp"
#include "dln/layers.hpp"

namespace dln {

namespace {

struct leaf {
  int lo, hi;  // half-open range into the sorted order
};

struct split {
  double gain = -1.0;  // unnormalized impurity decrease: n*G - nL*GL - nR*GR
  int pos = -1;        // split between order[pos-1] and order[pos]
  double threshold = 0.0;
};

double gini_from_counts(const std::vector<int>& counts, int total) {
  if (total == 0) return 0.0;
  double acc = 0.0;
  for (int c : counts) {
    const double p = static_cast<double>(c) / total;
    acc += p * p;
  }
  return 1.0 - acc;
}

// Best Gini split of one leaf; candidates are midpoints between consecutive
// distinct values. Ties break to the lowest threshold.
split best_split(const std::vector<double>& column, const std::vector<int>& labels,
                 const std::vector<int>& order, const leaf& lf, int num_classes) {
  split best;
  const int n = lf.hi - lf.lo;
  if (n < 2) return best;

  std::vector<int> total_counts(static_cast<std::size_t>(num_classes), 0);
  for (int i = lf.lo; i < lf.hi; ++i) {
    total_counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])])]++;
  }
  const double parent = n * gini_from_counts(total_counts, n);

  std::vector<int> left_counts(static_cast<std::size_t>(num_classes), 0);
  for (int i = lf.lo; i < lf.hi - 1; ++i) {
    const int row = order[static_cast<std::size_t>(i)];
    left_counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(row)])]++;
    const double v = column[static_cast<std::size_t>(row)];
    const double next = column[static_cast<std::size_t>(order[static_cast<std::size_t>(i + 1)])];
    if (v == next) continue;  // not a boundary between distinct values

    const int n_left = i - lf.lo + 1;
    const int n_right = n - n_left;
    std::vector<int> right_counts(static_cast<std::size_t>(num_classes));
    for (int c = 0; c < num_classes; ++c) {
      right_counts[static_cast<std::size_t>(c)] =
          total_counts[static_cast<std::size_t>(c)] - left_counts[static_cast<std::size_t>(c)];
    }
    const double gain = parent - n_left * gini_from_counts(left_counts, n_left) -
                        n_right * gini_from_counts(right_counts, n_right);
    const double threshold = 0.5 * (v + next);
    if (gain > best.gain + 1e-12 ||
        (std::abs(gain - best.gain) <= 1e-12 && best.pos >= 0 && threshold < best.threshold)) {
      best.gain = gain;
      best.pos = i + 1;
      best.threshold = threshold;
    }
  }
  return best;
}

// Nearest-rank quantile of a sorted vector.
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const int n = static_cast<int>(sorted.size());
  int rank = static_cast<int>(std::ceil(p * n));
  rank = std::clamp(rank, 1, n);
  return sorted[static_cast<std::size_t>(rank - 1)];
}

}  // namespace

threshold_init threshold_init_from_tree(const std::vector<double>& column,
                                        const std::vector<int>& labels, int group_size,
                                        int num_classes) {
  if (group_size < 1) {
    throw config_error("group_size must be >= 1");
  }
  if (column.size() != labels.size() || column.empty()) {
    throw structure_error("tree init: column/label size mismatch");
  }

  threshold_init out;
  out.slope.assign(static_cast<std::size_t>(group_size), 2.0);

  const auto [mn, mx] = std::minmax_element(column.begin(), column.end());
  if (*mn == *mx) {
    // Degenerate column: neurons fold to constants later.
    out.bias.assign(static_cast<std::size_t>(group_size), 0.5);
    return out;
  }

  std::vector<int> order(column.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int lhs, int rhs) {
    return column[static_cast<std::size_t>(lhs)] < column[static_cast<std::size_t>(rhs)];
  });

  // Best-first growth: repeatedly split the leaf with the largest impurity
  // decrease until group_size thresholds exist or no split improves.
  std::vector<leaf> leaves{{0, static_cast<int>(column.size())}};
  std::vector<split> leaf_best{best_split(column, labels, order, leaves[0], num_classes)};
  std::vector<double> thresholds;

  while (static_cast<int>(thresholds.size()) < group_size) {
    int pick = -1;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      if (leaf_best[i].pos < 0 || leaf_best[i].gain <= 1e-12) continue;
      if (pick < 0 || leaf_best[i].gain > leaf_best[static_cast<std::size_t>(pick)].gain + 1e-12 ||
          (std::abs(leaf_best[i].gain - leaf_best[static_cast<std::size_t>(pick)].gain) <= 1e-12 &&
           leaf_best[i].threshold < leaf_best[static_cast<std::size_t>(pick)].threshold)) {
        pick = static_cast<int>(i);
      }
    }
    if (pick < 0) break;

    const split s = leaf_best[static_cast<std::size_t>(pick)];
    thresholds.push_back(s.threshold);

    const leaf parent = leaves[static_cast<std::size_t>(pick)];
    const leaf left{parent.lo, s.pos};
    const leaf right{s.pos, parent.hi};
    leaves[static_cast<std::size_t>(pick)] = left;
    leaf_best[static_cast<std::size_t>(pick)] = best_split(column, labels, order, left, num_classes);
    leaves.push_back(right);
    leaf_best.push_back(best_split(column, labels, order, right, num_classes));
  }

  // Pad with evenly spaced quantiles when the tree stopped early.
  const int missing = group_size - static_cast<int>(thresholds.size());
  if (missing > 0) {
    std::vector<double> sorted(column.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      sorted[i] = column[static_cast<std::size_t>(order[i])];
    }
    for (int j = 1; j <= missing; ++j) {
      thresholds.push_back(quantile_sorted(sorted, static_cast<double>(j) / (missing + 1)));
    }
  }

  std::sort(thresholds.begin(), thresholds.end());
  out.bias = std::move(thresholds);
  return out;
}

}  // namespace dln
