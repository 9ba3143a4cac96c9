// SPDX-License-Identifier: Apache-2.0
#ifndef DLN_DATA_HPP
#define DLN_DATA_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace dln {

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

enum class split_tag : std::uint8_t { train, test };

// Equal-length univariate series with integer class labels.
struct sequence_dataset {
  std::vector<std::vector<double>> sequences;
  std::vector<long long> labels;  // raw label values as read from the file
  std::vector<split_tag> split;

  int size() const { return static_cast<int>(sequences.size()); }
  int length() const { return sequences.empty() ? 0 : static_cast<int>(sequences[0].size()); }
};

// One sample per line: class label first, then the values, whitespace- or
// comma-delimited.
sequence_dataset load_sequences(const std::string& path, split_tag tag = split_tag::train);
sequence_dataset parse_sequences(const std::string& text, split_tag tag = split_tag::train);

// ---------------------------------------------------------------------------
// Feature matrices
// ---------------------------------------------------------------------------

enum class column_kind : std::uint8_t { continuous, one_hot };

struct column_info {
  std::string name;
  column_kind kind = column_kind::continuous;

  bool operator==(const column_info&) const = default;
};

// Per-column clip bounds and min-max range, fitted on training data only.
struct column_scaling {
  bool active = false;  // true once a continuous column has been fitted
  double clip_lo = 0.0;
  double clip_hi = 0.0;
  double lo = 0.0;
  double hi = 1.0;

  bool operator==(const column_scaling&) const = default;
};

struct feature_matrix {
  std::vector<column_info> columns;
  int rows = 0;
  std::vector<double> values;  // row-major
  std::vector<long long> labels;  // raw before preprocessing, class ids 0..C-1 after
  int num_classes = 0;            // set once labels are contiguous ids
  std::vector<long long> class_values;  // original label value per class id
  std::vector<column_scaling> scaling;  // aligned with columns

  int cols() const { return static_cast<int>(columns.size()); }
  double at(int r, int c) const {
    return values[static_cast<std::size_t>(r) * columns.size() + static_cast<std::size_t>(c)];
  }
  double& at(int r, int c) {
    return values[static_cast<std::size_t>(r) * columns.size() + static_cast<std::size_t>(c)];
  }
  std::vector<double> row(int r) const {
    return {values.begin() + static_cast<std::ptrdiff_t>(r) * cols(),
            values.begin() + (static_cast<std::ptrdiff_t>(r) + 1) * cols()};
  }
};

// Fixed per-sequence statistics bank: mean, standard deviation, min, max,
// median, interquartile range, lag-1/2/3 autocorrelation, zero-crossing rate
// of the mean-centered series, linear-trend slope, mean absolute first
// difference, local-maxima count, spectral centroid. Sequences must have at
// least 4 samples.
inline constexpr int kBasicFeatureCount = 14;
feature_matrix extract_basic_features(const sequence_dataset& ds);

// RFC-4180-style CSV with a header row and a mandatory "label" column.
// NaN cells are kept (the preprocessing pass drops their columns).
feature_matrix load_feature_csv(const std::string& path);
feature_matrix parse_feature_csv(const std::string& text);

// ---------------------------------------------------------------------------
// Preprocessing
// ---------------------------------------------------------------------------

// Fitted transform: column drops, one-hot expansion and train-only scaling
// statistics. Apply it unchanged to test or future data.
struct preprocessor {
  struct onehot_spec {
    int source_column = 0;
    std::vector<double> categories;  // sorted distinct train values
  };
  struct continuous_spec {
    int source_column = 0;
    column_scaling scaling;
  };

  std::vector<std::string> source_columns;        // schema the transform expects
  std::vector<int> dropped_columns;               // NaN or train-constant
  std::vector<continuous_spec> continuous;        // first output block
  std::vector<int> passthrough;                   // already-one-hot source columns
  std::vector<onehot_spec> onehots;               // expanded last
  std::vector<long long> class_values;            // sorted distinct train labels
  int categorical_max_unique = 10;

  feature_matrix apply(const feature_matrix& m) const;
  int output_width() const;
};

inline constexpr int kDefaultCategoricalMaxUnique = 10;

// Fits on train (test participates only in the NaN-column scan), then
// transforms both. Train duplicates are dropped before fitting.
preprocessor fit_preprocessor(const feature_matrix& train, const feature_matrix& test,
                              int categorical_max_unique = kDefaultCategoricalMaxUnique);

std::pair<feature_matrix, feature_matrix> preprocess(
    const feature_matrix& train, const feature_matrix& test,
    int categorical_max_unique = kDefaultCategoricalMaxUnique);

// Drops duplicate (features, label) rows, keeping first occurrences.
feature_matrix drop_duplicate_rows(const feature_matrix& m);

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

// Mean of per-class recalls over the classes present in y_true.
double balanced_accuracy(const std::vector<int>& y_true, const std::vector<int>& y_pred);

// Expected maximum of k draws without replacement from n observed values:
// sum_{i=k..n} C(i-1,k-1)/C(n,k) * x_(i). Equals the mean at k=1 and the
// maximum at k=n.
double best_at_k(std::vector<double> values, int k);

}  // namespace dln

#endif  // DLN_DATA_HPP
