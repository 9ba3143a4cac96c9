// SPDX-License-Identifier: Apache-2.0
#include "config_file.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "dln/errors.hpp"

namespace dln::tools {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw config_error("config: bad boolean for " + key + ": '" + v + "'");
}

long long parse_int(const std::string& v, const std::string& key) {
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw config_error("config: bad integer for " + key + ": '" + v + "'");
  }
  return out;
}

std::uint64_t parse_uint(const std::string& v, const std::string& key) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw config_error("config: bad unsigned integer for " + key + ": '" + v + "'");
  }
  return out;
}

double parse_real(const std::string& v, const std::string& key) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw config_error("config: bad number for " + key + ": '" + v + "'");
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& v, const std::string& key) {
  std::vector<int> out;
  std::istringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(static_cast<int>(parse_int(trim(item), key)));
  }
  if (out.empty()) throw config_error("config: empty list for " + key);
  return out;
}

}  // namespace

dln::train_config parse_config_text(const std::string& text) {
  dln::train_config cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw config_error("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "hidden_sizes") {
      cfg.hidden_sizes = parse_int_list(value, key);
    } else if (key == "group_size") {
      cfg.group_size = static_cast<int>(parse_int(value, key));
    } else if (key == "phase_unified") {
      cfg.phase_unified = parse_bool(value, key);
    } else if (key == "ste_threshold") {
      cfg.ste.threshold = parse_bool(value, key);
    } else if (key == "ste_logic") {
      cfg.ste.logic = parse_bool(value, key);
    } else if (key == "ste_sum") {
      cfg.ste.sum = parse_bool(value, key);
    } else if (key == "subset_gate_num") {
      cfg.subset_gate_num = static_cast<int>(parse_int(value, key));
    } else if (key == "subset_link_num") {
      cfg.subset_link_num = static_cast<int>(parse_int(value, key));
    } else if (key == "concat_input") {
      cfg.concat_input = parse_bool(value, key);
    } else if (key == "learning_rate") {
      cfg.learning_rate = parse_real(value, key);
    } else if (key == "epochs") {
      cfg.epochs = static_cast<int>(parse_int(value, key));
    } else if (key == "batch_size") {
      cfg.batch_size = static_cast<int>(parse_int(value, key));
    } else if (key == "tau_start") {
      cfg.tau_start = parse_real(value, key);
    } else if (key == "tau_end") {
      cfg.tau_end = parse_real(value, key);
    } else if (key == "seed") {
      cfg.seed = parse_uint(value, key);
    } else {
      throw config_error("config line " + std::to_string(line_no) + ": unknown key '" + key +
                         "'");
    }
  }
  cfg.validate();
  return cfg;
}

dln::train_config load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_to_text(const dln::train_config& cfg) {
  std::ostringstream out;
  out << "hidden_sizes = ";
  for (std::size_t i = 0; i < cfg.hidden_sizes.size(); ++i) {
    if (i) out << ",";
    out << cfg.hidden_sizes[i];
  }
  out << "\n";
  out << "group_size = " << cfg.group_size << "\n";
  out << "phase_unified = " << (cfg.phase_unified ? "true" : "false") << "\n";
  out << "ste_threshold = " << (cfg.ste.threshold ? "true" : "false") << "\n";
  out << "ste_logic = " << (cfg.ste.logic ? "true" : "false") << "\n";
  out << "ste_sum = " << (cfg.ste.sum ? "true" : "false") << "\n";
  out << "subset_gate_num = " << cfg.subset_gate_num << "\n";
  out << "subset_link_num = " << cfg.subset_link_num << "\n";
  out << "concat_input = " << (cfg.concat_input ? "true" : "false") << "\n";
  out.precision(17);
  out << "learning_rate = " << cfg.learning_rate << "\n";
  out << "epochs = " << cfg.epochs << "\n";
  out << "batch_size = " << cfg.batch_size << "\n";
  out << "tau_start = " << cfg.tau_start << "\n";
  out << "tau_end = " << cfg.tau_end << "\n";
  out << "seed = " << cfg.seed << "\n";
  return out.str();
}

}  // namespace dln::tools
