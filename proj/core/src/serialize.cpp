// SPDX-License-Identifier: Apache-2.0
#include <string>
#include <utility>

#include <json.hpp>

#include "dln/errors.hpp"
#include "dln/network.hpp"

namespace dln {

namespace {

using nlohmann::json;

constexpr int kModelVersion = 1;
constexpr const char* kModelFormat = "dln-model";
constexpr const char* kBundleFormat = "dln-bundle";

json to_json(const matrix& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

matrix matrix_from_json(const json& j) {
  matrix m(j.at("rows").get<int>(), j.at("cols").get<int>());
  const auto& data = j.at("data");
  if (data.size() != m.data().size()) {
    throw parse_error("matrix payload size mismatch");
  }
  m.data() = data.get<std::vector<double>>();
  return m;
}

json to_json(const train_config& c) {
  return json{{"hidden_sizes", c.hidden_sizes},
              {"group_size", c.group_size},
              {"phase_unified", c.phase_unified},
              {"ste_threshold", c.ste.threshold},
              {"ste_logic", c.ste.logic},
              {"ste_sum", c.ste.sum},
              {"subset_gate_num", c.subset_gate_num},
              {"subset_link_num", c.subset_link_num},
              {"concat_input", c.concat_input},
              {"learning_rate", c.learning_rate},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"tau_start", c.tau_start},
              {"tau_end", c.tau_end},
              {"seed", c.seed}};
}

train_config config_from_json(const json& j) {
  train_config c;
  c.hidden_sizes = j.at("hidden_sizes").get<std::vector<int>>();
  c.group_size = j.at("group_size").get<int>();
  c.phase_unified = j.at("phase_unified").get<bool>();
  c.ste.threshold = j.at("ste_threshold").get<bool>();
  c.ste.logic = j.at("ste_logic").get<bool>();
  c.ste.sum = j.at("ste_sum").get<bool>();
  c.subset_gate_num = j.at("subset_gate_num").get<int>();
  c.subset_link_num = j.at("subset_link_num").get<int>();
  c.concat_input = j.at("concat_input").get<bool>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.tau_start = j.at("tau_start").get<double>();
  c.tau_end = j.at("tau_end").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

json to_json(const dln_model& m) {
  json features = json::array();
  for (const auto& col : m.features) {
    features.push_back(json{
        {"name", col.name},
        {"kind", col.kind == column_kind::continuous ? "continuous" : "one_hot"}});
  }
  json layers = json::array();
  for (const auto& layer : m.layers) {
    layers.push_back(json{{"in_width", layer.in_width},
                          {"gate_w", to_json(layer.gate_w)},
                          {"link_a_w", to_json(layer.link_a_w)},
                          {"link_b_w", to_json(layer.link_b_w)},
                          {"gate_mask", layer.gate_mask},
                          {"link_mask_a", layer.link_mask_a},
                          {"link_mask_b", layer.link_mask_b}});
  }
  return json{{"format", kModelFormat},
              {"version", kModelVersion},
              {"config", to_json(m.config)},
              {"features", features},
              {"continuous_columns", m.continuous_columns},
              {"passthrough_columns", m.passthrough_columns},
              {"threshold",
               json{{"bias", m.threshold.bias},
                    {"slope", m.threshold.slope},
                    {"input_index", m.threshold.input_index},
                    {"group_size", m.threshold.group_size}}},
              {"logic_layers", layers},
              {"sum", json{{"link_w", to_json(m.sum.link_w)}, {"num_classes", m.sum.num_classes}}},
              {"final_tau", m.final_tau},
              {"train_loss", m.train_loss}};
}

dln_model model_from_json(const json& j) {
  if (!j.is_object() || !j.contains("format") || j.at("format") != kModelFormat) {
    throw parse_error("not a model payload");
  }
  if (j.at("version").get<int>() != kModelVersion) {
    throw version_error("unsupported model version " + j.at("version").dump());
  }
  dln_model m;
  m.config = config_from_json(j.at("config"));
  for (const auto& col : j.at("features")) {
    column_info info;
    info.name = col.at("name").get<std::string>();
    const std::string kind = col.at("kind").get<std::string>();
    if (kind == "continuous") {
      info.kind = column_kind::continuous;
    } else if (kind == "one_hot") {
      info.kind = column_kind::one_hot;
    } else {
      throw parse_error("unknown column kind: " + kind);
    }
    m.features.push_back(std::move(info));
  }
  m.continuous_columns = j.at("continuous_columns").get<std::vector<int>>();
  m.passthrough_columns = j.at("passthrough_columns").get<std::vector<int>>();
  const json& th = j.at("threshold");
  m.threshold.bias = th.at("bias").get<std::vector<double>>();
  m.threshold.slope = th.at("slope").get<std::vector<double>>();
  m.threshold.input_index = th.at("input_index").get<std::vector<int>>();
  m.threshold.group_size = th.at("group_size").get<int>();
  for (const auto& jl : j.at("logic_layers")) {
    logic_layer layer;
    layer.in_width = jl.at("in_width").get<int>();
    layer.gate_w = matrix_from_json(jl.at("gate_w"));
    layer.link_a_w = matrix_from_json(jl.at("link_a_w"));
    layer.link_b_w = matrix_from_json(jl.at("link_b_w"));
    layer.gate_mask = jl.at("gate_mask").get<std::vector<std::vector<int>>>();
    layer.link_mask_a = jl.at("link_mask_a").get<std::vector<std::vector<int>>>();
    layer.link_mask_b = jl.at("link_mask_b").get<std::vector<std::vector<int>>>();
    m.layers.push_back(std::move(layer));
  }
  m.sum.link_w = matrix_from_json(j.at("sum").at("link_w"));
  m.sum.num_classes = j.at("sum").at("num_classes").get<int>();
  m.final_tau = j.at("final_tau").get<double>();
  m.train_loss = j.at("train_loss").get<std::vector<double>>();
  return m;
}

json to_json(const preprocessor& p) {
  json continuous = json::array();
  for (const auto& spec : p.continuous) {
    continuous.push_back(json{{"source_column", spec.source_column},
                              {"clip_lo", spec.scaling.clip_lo},
                              {"clip_hi", spec.scaling.clip_hi},
                              {"lo", spec.scaling.lo},
                              {"hi", spec.scaling.hi}});
  }
  json onehots = json::array();
  for (const auto& spec : p.onehots) {
    onehots.push_back(
        json{{"source_column", spec.source_column}, {"categories", spec.categories}});
  }
  return json{{"source_columns", p.source_columns},
              {"dropped_columns", p.dropped_columns},
              {"continuous", continuous},
              {"onehots", onehots},
              {"class_values", p.class_values},
              {"categorical_max_unique", p.categorical_max_unique}};
}

preprocessor preprocessor_from_json(const json& j) {
  preprocessor p;
  p.source_columns = j.at("source_columns").get<std::vector<std::string>>();
  p.dropped_columns = j.at("dropped_columns").get<std::vector<int>>();
  for (const auto& spec : j.at("continuous")) {
    preprocessor::continuous_spec c;
    c.source_column = spec.at("source_column").get<int>();
    c.scaling.active = true;
    c.scaling.clip_lo = spec.at("clip_lo").get<double>();
    c.scaling.clip_hi = spec.at("clip_hi").get<double>();
    c.scaling.lo = spec.at("lo").get<double>();
    c.scaling.hi = spec.at("hi").get<double>();
    p.continuous.push_back(c);
  }
  for (const auto& spec : j.at("onehots")) {
    preprocessor::onehot_spec o;
    o.source_column = spec.at("source_column").get<int>();
    o.categories = spec.at("categories").get<std::vector<double>>();
    p.onehots.push_back(std::move(o));
  }
  p.class_values = j.at("class_values").get<std::vector<long long>>();
  p.categorical_max_unique = j.at("categorical_max_unique").get<int>();
  return p;
}

json parse_payload(const std::string& bytes) {
  try {
    return json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw parse_error(std::string("malformed payload: ") + e.what(), e.byte);
  }
}

}  // namespace

std::string save_model(const dln_model& model) { return to_json(model).dump(2) + "\n"; }

std::string config_to_json(const train_config& config) { return to_json(config).dump(); }

dln_model load_model(const std::string& bytes) {
  const json j = parse_payload(bytes);
  try {
    return model_from_json(j);
  } catch (const json::exception& e) {
    throw parse_error(std::string("invalid model payload: ") + e.what());
  }
}

std::string save_bundle(const dln_model& model, const preprocessor& pre) {
  json j{{"format", kBundleFormat},
         {"version", kModelVersion},
         {"model", to_json(model)},
         {"preprocessor", to_json(pre)}};
  return j.dump(2) + "\n";
}

std::pair<dln_model, preprocessor> load_bundle(const std::string& bytes) {
  const json j = parse_payload(bytes);
  try {
    if (!j.is_object() || !j.contains("format") || j.at("format") != kBundleFormat) {
      // Bare model files are accepted with an identity preprocessor.
      if (j.is_object() && j.contains("format") && j.at("format") == kModelFormat) {
        dln_model m = model_from_json(j);
        preprocessor p;
        for (const auto& col : m.features) p.source_columns.push_back(col.name);
        return {std::move(m), std::move(p)};
      }
      throw parse_error("not a model bundle");
    }
    if (j.at("version").get<int>() != kModelVersion) {
      throw version_error("unsupported bundle version " + j.at("version").dump());
    }
    return {model_from_json(j.at("model")), preprocessor_from_json(j.at("preprocessor"))};
  } catch (const json::exception& e) {
    throw parse_error(std::string("invalid bundle payload: ") + e.what());
  }
}

}  // namespace dln
