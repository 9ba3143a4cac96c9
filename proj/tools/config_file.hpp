// SPDX-License-Identifier: Apache-2.0
#ifndef DLN_TOOLS_CONFIG_FILE_HPP
#define DLN_TOOLS_CONFIG_FILE_HPP

#include <string>

#include "dln/network.hpp"

namespace dln::tools {

// Plain-text key-value config mirroring the train_config fields:
//   key = value, one per line, '#' starts a comment,
//   hidden_sizes as a comma-separated width list.
dln::train_config parse_config_text(const std::string& text);
dln::train_config load_config_file(const std::string& path);
std::string config_to_text(const dln::train_config& config);

}  // namespace dln::tools

#endif  // DLN_TOOLS_CONFIG_FILE_HPP
