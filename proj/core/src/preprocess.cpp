// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "dln/data.hpp"
#include "dln/errors.hpp"

namespace dln {

namespace {

// Nearest-rank percentile. Chosen so that re-fitting on already scaled data
// yields clip bounds equal to the data extremes, i.e. the pipeline is
// idempotent.
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const int n = static_cast<int>(sorted.size());
  int rank = static_cast<int>(std::ceil(p * n));
  rank = std::clamp(rank, 1, n);
  return sorted[static_cast<std::size_t>(rank - 1)];
}

std::string format_category(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

bool column_has_nan(const feature_matrix& m, int col) {
  for (int r = 0; r < m.rows; ++r) {
    if (std::isnan(m.at(r, col))) return true;
  }
  return false;
}

// Duplicate-row removal on a projection of columns (plus the label), keeping
// first occurrences. Keys are bit patterns so NaN cells compare consistently.
feature_matrix dedup_on_columns(const feature_matrix& m, const std::vector<int>& cols) {
  std::set<std::pair<std::vector<std::uint64_t>, long long>> seen;
  feature_matrix out;
  out.columns = m.columns;
  out.scaling = m.scaling;
  out.num_classes = m.num_classes;
  out.class_values = m.class_values;
  std::vector<std::uint64_t> key(cols.size());
  for (int r = 0; r < m.rows; ++r) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const double v = m.at(r, cols[i]);
      key[i] = std::bit_cast<std::uint64_t>(v);
    }
    if (!seen.insert({key, m.labels[static_cast<std::size_t>(r)]}).second) continue;
    for (int c = 0; c < m.cols(); ++c) out.values.push_back(m.at(r, c));
    out.labels.push_back(m.labels[static_cast<std::size_t>(r)]);
    out.rows += 1;
  }
  return out;
}

void check_schema(const feature_matrix& m, const std::vector<std::string>& expected) {
  if (m.cols() != static_cast<int>(expected.size())) {
    throw schema_error("column count mismatch: expected " + std::to_string(expected.size()) +
                       ", got " + std::to_string(m.cols()));
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (m.columns[i].name != expected[i]) {
      throw schema_error("column " + std::to_string(i) + " is '" + m.columns[i].name +
                         "', expected '" + expected[i] + "'");
    }
  }
}

}  // namespace

feature_matrix drop_duplicate_rows(const feature_matrix& m) {
  std::vector<int> cols(static_cast<std::size_t>(m.cols()));
  for (int c = 0; c < m.cols(); ++c) cols[static_cast<std::size_t>(c)] = c;
  return dedup_on_columns(m, cols);
}

int preprocessor::output_width() const {
  int w = static_cast<int>(continuous.size() + passthrough.size());
  for (const auto& oh : onehots) w += static_cast<int>(oh.categories.size());
  return w;
}

preprocessor fit_preprocessor(const feature_matrix& train, const feature_matrix& test,
                              int categorical_max_unique) {
  if (train.rows == 0) {
    throw range_error("preprocess: empty training matrix");
  }
  check_schema(test, [&] {
    std::vector<std::string> names;
    for (const auto& c : train.columns) names.push_back(c.name);
    return names;
  }());

  preprocessor pre;
  pre.categorical_max_unique = categorical_max_unique;
  for (const auto& c : train.columns) pre.source_columns.push_back(c.name);

  // Step 1: drop columns containing NaN in either split.
  std::vector<int> kept;
  for (int c = 0; c < train.cols(); ++c) {
    if (column_has_nan(train, c) || column_has_nan(test, c)) {
      pre.dropped_columns.push_back(c);
    } else {
      kept.push_back(c);
    }
  }

  // Step 2: duplicate train rows go before any statistics are fitted.
  const feature_matrix clean = dedup_on_columns(train, kept);

  // Step 2 continued: drop train-constant columns.
  std::vector<int> live;
  for (int c : kept) {
    bool constant = true;
    for (int r = 1; r < clean.rows && constant; ++r) {
      constant = clean.at(r, c) == clean.at(0, c);
    }
    if (constant) {
      pre.dropped_columns.push_back(c);
    } else {
      live.push_back(c);
    }
  }
  std::sort(pre.dropped_columns.begin(), pre.dropped_columns.end());
  if (live.empty()) {
    throw range_error("preprocessing dropped every feature column");
  }

  // Steps 3-4: split the survivors into passthrough bits, one-hot groups and
  // scaled continuous columns.
  for (int c : live) {
    if (train.columns[static_cast<std::size_t>(c)].kind == column_kind::one_hot) {
      pre.passthrough.push_back(c);
      continue;
    }
    std::vector<double> column(static_cast<std::size_t>(clean.rows));
    for (int r = 0; r < clean.rows; ++r) column[static_cast<std::size_t>(r)] = clean.at(r, c);
    std::sort(column.begin(), column.end());

    std::vector<double> distinct;
    for (double v : column) {
      if (distinct.empty() || distinct.back() != v) distinct.push_back(v);
    }

    if (static_cast<int>(distinct.size()) <= categorical_max_unique) {
      pre.onehots.push_back({c, std::move(distinct)});
      continue;
    }

    preprocessor::continuous_spec spec;
    spec.source_column = c;
    spec.scaling.active = true;
    spec.scaling.clip_lo = quantile_sorted(column, 0.01);
    spec.scaling.clip_hi = quantile_sorted(column, 0.99);
    if (spec.scaling.clip_lo == spec.scaling.clip_hi) {
      // Heavily tied column: fall back to the full range.
      spec.scaling.clip_lo = column.front();
      spec.scaling.clip_hi = column.back();
    }
    spec.scaling.lo = spec.scaling.clip_lo;
    spec.scaling.hi = spec.scaling.clip_hi;
    pre.continuous.push_back(spec);
  }

  // Label mapping: sorted distinct train labels become class ids.
  std::set<long long> labels(clean.labels.begin(), clean.labels.end());
  pre.class_values.assign(labels.begin(), labels.end());
  return pre;
}

feature_matrix preprocessor::apply(const feature_matrix& m) const {
  check_schema(m, source_columns);

  feature_matrix out;
  out.rows = m.rows;
  for (const auto& spec : continuous) {
    out.columns.push_back({m.columns[static_cast<std::size_t>(spec.source_column)].name,
                           column_kind::continuous});
    out.scaling.push_back(spec.scaling);
  }
  for (int c : passthrough) {
    out.columns.push_back({m.columns[static_cast<std::size_t>(c)].name, column_kind::one_hot});
    out.scaling.push_back({});
  }
  for (const auto& oh : onehots) {
    const std::string& base = m.columns[static_cast<std::size_t>(oh.source_column)].name;
    for (double cat : oh.categories) {
      out.columns.push_back({base + "=" + format_category(cat), column_kind::one_hot});
      out.scaling.push_back({});
    }
  }

  out.values.reserve(static_cast<std::size_t>(out.rows) * out.cols());
  for (int r = 0; r < m.rows; ++r) {
    for (const auto& spec : continuous) {
      const double raw = m.at(r, spec.source_column);
      if (std::isnan(raw)) {
        throw range_error("NaN in column '" +
                          m.columns[static_cast<std::size_t>(spec.source_column)].name +
                          "' at row " + std::to_string(r));
      }
      const double clipped = std::clamp(raw, spec.scaling.clip_lo, spec.scaling.clip_hi);
      double y = (clipped - spec.scaling.lo) / (spec.scaling.hi - spec.scaling.lo);
      out.values.push_back(std::clamp(y, 0.0, 1.0));
    }
    for (int c : passthrough) {
      out.values.push_back(m.at(r, c) >= 0.5 ? 1.0 : 0.0);
    }
    for (const auto& oh : onehots) {
      const double raw = m.at(r, oh.source_column);
      for (double cat : oh.categories) {
        out.values.push_back(raw == cat ? 1.0 : 0.0);
      }
    }
  }

  // Map labels onto contiguous class ids.
  out.num_classes = static_cast<int>(class_values.size());
  out.class_values = class_values;
  for (long long raw : m.labels) {
    const auto it = std::lower_bound(class_values.begin(), class_values.end(), raw);
    if (it == class_values.end() || *it != raw) {
      throw range_error("label " + std::to_string(raw) + " not present in training data");
    }
    out.labels.push_back(it - class_values.begin());
  }
  return out;
}

std::pair<feature_matrix, feature_matrix> preprocess(const feature_matrix& train,
                                                     const feature_matrix& test,
                                                     int categorical_max_unique) {
  const preprocessor pre = fit_preprocessor(train, test, categorical_max_unique);

  // The train output keeps the deduplicated rows (projected onto columns that
  // survive the NaN scan).
  std::vector<int> kept;
  std::vector<bool> dropped(static_cast<std::size_t>(train.cols()), false);
  for (int c : pre.dropped_columns) {
    if (column_has_nan(train, c) || column_has_nan(test, c)) {
      dropped[static_cast<std::size_t>(c)] = true;
    }
  }
  for (int c = 0; c < train.cols(); ++c) {
    if (!dropped[static_cast<std::size_t>(c)]) kept.push_back(c);
  }
  return {pre.apply(dedup_on_columns(train, kept)), pre.apply(test)};
}

}  // namespace dln
