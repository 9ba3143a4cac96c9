// SPDX-License-Identifier: Apache-2.0
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "dln/data.hpp"
#include "dln/errors.hpp"

namespace dln {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw io_error("cannot open " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Splits on commas or runs of whitespace; both delimiters are accepted in the
// same file.
std::vector<std::string> split_tokens(const std::string& line) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : line) {
    if (ch == ',' || std::isspace(static_cast<unsigned char>(ch))) {
      if (!current.empty()) {
        tokens.push_back(std::move(current));
        current.clear();
      }
    } else {
      current.push_back(ch);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

bool parse_double(const std::string& token, double& out) {
  const char* begin = token.data();
  const char* end = begin + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

sequence_dataset parse_sequences(const std::string& text, split_tag tag) {
  sequence_dataset ds;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  int expected_len = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> tokens = split_tokens(line);
    if (tokens.empty()) continue;
    if (tokens.size() < 2) {
      throw format_error("line " + std::to_string(line_no) + ": need a label and values");
    }

    double raw_label = 0.0;
    if (!parse_double(tokens[0], raw_label) || !std::isfinite(raw_label) ||
        raw_label != std::floor(raw_label)) {
      throw format_error("line " + std::to_string(line_no) + ": bad label token '" + tokens[0] +
                         "'");
    }

    std::vector<double> seq;
    seq.reserve(tokens.size() - 1);
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      double v = 0.0;
      if (!parse_double(tokens[i], v)) {
        throw format_error("line " + std::to_string(line_no) + ": non-numeric token '" +
                           tokens[i] + "'");
      }
      seq.push_back(v);
    }

    if (expected_len < 0) {
      expected_len = static_cast<int>(seq.size());
    } else if (static_cast<int>(seq.size()) != expected_len) {
      throw format_error("line " + std::to_string(line_no) + ": ragged row, expected " +
                         std::to_string(expected_len) + " values, got " +
                         std::to_string(seq.size()));
    }

    ds.sequences.push_back(std::move(seq));
    ds.labels.push_back(static_cast<long long>(raw_label));
    ds.split.push_back(tag);
  }
  if (ds.sequences.empty()) {
    throw format_error("empty dataset");
  }
  return ds;
}

sequence_dataset load_sequences(const std::string& path, split_tag tag) {
  return parse_sequences(read_file(path), tag);
}

feature_matrix parse_feature_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw format_error("empty CSV");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  {
    std::string field;
    std::istringstream hs(line);
    while (std::getline(hs, field, ',')) header.push_back(field);
  }
  if (header.empty()) {
    throw schema_error("CSV header is empty");
  }

  int label_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    for (std::size_t j = i + 1; j < header.size(); ++j) {
      if (header[i] == header[j]) {
        throw schema_error("duplicate column name '" + header[i] + "'");
      }
    }
    if (header[i] == "label") label_col = static_cast<int>(i);
  }
  if (label_col < 0) {
    throw schema_error("CSV is missing the mandatory 'label' column");
  }

  feature_matrix m;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (static_cast<int>(i) == label_col) continue;
    m.columns.push_back({header[i], column_kind::continuous});
  }
  m.scaling.resize(m.columns.size());

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (line.back() == ',') fields.push_back("");
    if (fields.size() != header.size()) {
      throw format_error("line " + std::to_string(line_no) + ": expected " +
                         std::to_string(header.size()) + " cells, got " +
                         std::to_string(fields.size()));
    }

    for (std::size_t i = 0; i < fields.size(); ++i) {
      const std::string& cell = fields[i];
      if (static_cast<int>(i) == label_col) {
        double raw = 0.0;
        if (!parse_double(cell, raw) || !std::isfinite(raw) || raw != std::floor(raw)) {
          throw format_error("line " + std::to_string(line_no) + ": bad label cell '" + cell +
                             "'");
        }
        m.labels.push_back(static_cast<long long>(raw));
        continue;
      }
      double v = 0.0;
      if (cell == "nan" || cell == "NaN" || cell == "NAN" || cell.empty()) {
        v = std::numeric_limits<double>::quiet_NaN();
      } else if (!parse_double(cell, v)) {
        throw format_error("line " + std::to_string(line_no) + ", column '" +
                           header[i] + "': non-numeric cell '" + cell + "'");
      }
      m.values.push_back(v);
    }
    m.rows += 1;
  }
  return m;
}

feature_matrix load_feature_csv(const std::string& path) {
  return parse_feature_csv(read_file(path));
}

}  // namespace dln
