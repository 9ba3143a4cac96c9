// SPDX-License-Identifier: Apache-2.0
#ifndef DLN_MATRIX_HPP
#define DLN_MATRIX_HPP

#include <cassert>
#include <cstddef>
#include <vector>

namespace dln {

// Dense row-major matrix of doubles. Small helper, no BLAS: every tensor in
// this library has at most a few hundred rows.
class matrix {
public:
  matrix() = default;
  matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(int r, int c) {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }
  double operator()(int r, int c) const {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }

  double* row(int r) { return data_.data() + static_cast<std::size_t>(r) * cols_; }
  const double* row(int r) const { return data_.data() + static_cast<std::size_t>(r) * cols_; }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  void fill(double v) { data_.assign(data_.size(), v); }

  bool operator==(const matrix& other) const = default;

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

}  // namespace dln

#endif  // DLN_MATRIX_HPP
