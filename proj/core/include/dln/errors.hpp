// SPDX-License-Identifier: Apache-2.0
#ifndef DLN_ERRORS_HPP
#define DLN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dln {

// Base class for everything this library throws.
class error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Operator id outside 0..15.
class invalid_operator_error : public error {
public:
  using error::error;
};

// Numeric argument outside its admissible domain (e.g. soft-logic inputs
// outside [0,1]).
class domain_error : public error {
public:
  using error::error;
};

// Temperature must be strictly positive.
class invalid_temperature_error : public error {
public:
  using error::error;
};

// Shape mismatch, empty candidate mask, broken wiring.
class structure_error : public error {
public:
  using error::error;
};

// Invalid training configuration.
class config_error : public error {
public:
  using error::error;
};

// Malformed input file (carries line/cell context in the message).
class format_error : public error {
public:
  using error::error;
};

// CSV schema problems: missing or duplicated columns.
class schema_error : public error {
public:
  using error::error;
};

// Malformed model payload.
class parse_error : public error {
public:
  explicit parse_error(const std::string& what, std::size_t offset = 0)
      : error(what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_ = 0;
};

// Model payload has an unsupported format version.
class version_error : public parse_error {
public:
  using parse_error::parse_error;
};

// Index or value out of range (labels, k in best-at-k, empty inputs).
class range_error : public error {
public:
  using error::error;
};

// Filesystem failures.
class io_error : public error {
public:
  using error::error;
};

// A class has fewer samples than cross-validation folds.
class stratification_error : public error {
public:
  using error::error;
};

}  // namespace dln

#endif  // DLN_ERRORS_HPP
