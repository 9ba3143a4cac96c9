// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <charconv>
#include <string>
#include <vector>

#include <json.hpp>

#include "dln/circuit.hpp"
#include "dln/errors.hpp"
#include "dln/logic.hpp"

namespace dln {

namespace {

// Shortest representation that parses back to the same double.
std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string slot_text(const circuit_model& c, int slot) {
  const bit_slot& s = c.inputs[static_cast<std::size_t>(slot)];
  switch (s.kind) {
    case slot_kind::comparator:
      return "feat[" + std::to_string(s.cmp.feature) + "] " +
             (s.cmp.dir == cmp_dir::ge ? "≥ " : "≤ ") + format_number(s.cmp.threshold);
    case slot_kind::raw_bit:
      return "bit[" + std::to_string(s.raw_column) + "]";
    default:
      return s.value ? "true" : "false";
  }
}

std::string expr_text(const circuit_model& c, node_ref r, bool top);

std::string neg_text(const circuit_model& c, node_ref r) {
  return "¬(" + expr_text(c, r, true) + ")";
}

std::string binary_text(const circuit_model& c, const char* sym, node_ref a, node_ref b,
                        bool top) {
  const std::string body = expr_text(c, a, false) + " " + sym + " " + expr_text(c, b, false);
  return top ? body : "(" + body + ")";
}

std::string expr_text(const circuit_model& c, node_ref r, bool top) {
  switch (r.kind) {
    case ref_kind::constant:
      return r.index ? "true" : "false";
    case ref_kind::input:
      return slot_text(c, r.index);
    case ref_kind::gate:
      break;
  }
  const gate& g = c.gates[static_cast<std::size_t>(r.index)];
  switch (g.op) {
    case 0: return "false";
    case 15: return "true";
    case 3: return expr_text(c, g.a, top);
    case 5: return expr_text(c, g.b, top);
    case 1: return binary_text(c, "∧", g.a, g.b, top);
    case 6: return binary_text(c, "⊕", g.a, g.b, top);
    case 7: return binary_text(c, "∨", g.a, g.b, top);
    case 10: return neg_text(c, g.b);
    case 12: return neg_text(c, g.a);
    case 8: return "¬(" + binary_text(c, "∨", g.a, g.b, true) + ")";
    case 9: return "¬(" + binary_text(c, "⊕", g.a, g.b, true) + ")";
    case 14: return "¬(" + binary_text(c, "∧", g.a, g.b, true) + ")";
    case 2: {
      const std::string body = expr_text(c, g.a, false) + " ∧ " + neg_text(c, g.b);
      return top ? body : "(" + body + ")";
    }
    case 4: {
      const std::string body = neg_text(c, g.a) + " ∧ " + expr_text(c, g.b, false);
      return top ? body : "(" + body + ")";
    }
    case 11: {
      const std::string body = expr_text(c, g.a, false) + " ∨ " + neg_text(c, g.b);
      return top ? body : "(" + body + ")";
    }
    case 13: {
      const std::string body = neg_text(c, g.a) + " ∨ " + expr_text(c, g.b, false);
      return top ? body : "(" + body + ")";
    }
    default:
      throw structure_error("export: gate op out of range");
  }
}

}  // namespace

std::string export_text(const circuit_model& c) {
  std::string out;
  const std::vector<bool> live = live_slots(c);

  std::vector<int> legend_features;
  for (std::size_t i = 0; i < c.inputs.size(); ++i) {
    if (!live[i]) continue;
    const bit_slot& s = c.inputs[i];
    const int col = s.kind == slot_kind::comparator ? s.cmp.feature
                   : s.kind == slot_kind::raw_bit   ? s.raw_column
                                                    : -1;
    if (col >= 0 &&
        std::find(legend_features.begin(), legend_features.end(), col) == legend_features.end()) {
      legend_features.push_back(col);
    }
  }
  std::sort(legend_features.begin(), legend_features.end());
  for (int col : legend_features) {
    out += "# feat[" + std::to_string(col) + "] = " +
           c.feature_names[static_cast<std::size_t>(col)] + "\n";
  }

  for (std::size_t cls = 0; cls < c.rules.size(); ++cls) {
    const std::string prefix = "class " + std::to_string(cls) + ": ";
    for (int i = 0; i < c.rules[cls].true_count; ++i) {
      out += prefix + "true\n";
    }
    for (node_ref r : c.rules[cls].refs) {
      out += prefix + expr_text(c, r, true) + "\n";
    }
  }
  return out;
}

std::string export_graph(const circuit_model& c) {
  std::string out = "digraph circuit {\n  rankdir=LR;\n";
  const std::vector<bool> live = live_slots(c);

  auto ref_id = [](node_ref r) -> std::string {
    switch (r.kind) {
      case ref_kind::constant: return r.index ? "c1" : "c0";
      case ref_kind::input: return "s" + std::to_string(r.index);
      default: return "g" + std::to_string(r.index);
    }
  };

  bool used_const[2] = {false, false};
  for (const auto& g : c.gates) {
    if (g.a.kind == ref_kind::constant) used_const[g.a.index] = true;
    if (g.b.kind == ref_kind::constant) used_const[g.b.index] = true;
  }
  for (const auto& rule : c.rules) {
    for (node_ref r : rule.refs) {
      if (r.kind == ref_kind::constant) used_const[r.index] = true;
    }
  }
  if (used_const[0]) out += "  c0 [shape=plaintext, label=\"false\"];\n";
  if (used_const[1]) out += "  c1 [shape=plaintext, label=\"true\"];\n";

  std::vector<bool> feature_used(c.feature_names.size(), false);
  for (std::size_t i = 0; i < c.inputs.size(); ++i) {
    if (!live[i]) continue;
    const bit_slot& s = c.inputs[i];
    if (s.kind == slot_kind::comparator) feature_used[static_cast<std::size_t>(s.cmp.feature)] = true;
    if (s.kind == slot_kind::raw_bit) feature_used[static_cast<std::size_t>(s.raw_column)] = true;
  }
  for (std::size_t f = 0; f < c.feature_names.size(); ++f) {
    if (feature_used[f]) {
      out += "  f" + std::to_string(f) + " [shape=box, label=\"" + c.feature_names[f] + "\"];\n";
    }
  }

  for (std::size_t i = 0; i < c.inputs.size(); ++i) {
    if (!live[i]) continue;
    const bit_slot& s = c.inputs[i];
    const std::string id = "s" + std::to_string(i);
    if (s.kind == slot_kind::comparator) {
      out += "  " + id + " [shape=ellipse, label=\"" + slot_text(c, static_cast<int>(i)) +
             "\"];\n";
      out += "  f" + std::to_string(s.cmp.feature) + " -> " + id + ";\n";
    } else if (s.kind == slot_kind::raw_bit) {
      out += "  " + id + " [shape=ellipse, label=\"" + slot_text(c, static_cast<int>(i)) +
             "\"];\n";
      out += "  f" + std::to_string(s.raw_column) + " -> " + id + ";\n";
    } else {
      out += "  " + id + " [shape=plaintext, label=\"" + (s.value ? "true" : "false") + "\"];\n";
    }
  }

  for (std::size_t g = 0; g < c.gates.size(); ++g) {
    const std::string id = "g" + std::to_string(g);
    out += "  " + id + " [shape=diamond, label=\"" +
           std::string(op_name(c.gates[g].op)) + "\"];\n";
    out += "  " + ref_id(c.gates[g].a) + " -> " + id + " [label=\"a\"];\n";
    out += "  " + ref_id(c.gates[g].b) + " -> " + id + " [label=\"b\"];\n";
  }

  for (std::size_t cls = 0; cls < c.rules.size(); ++cls) {
    const std::string id = "class" + std::to_string(cls);
    std::string label = "class " + std::to_string(cls);
    if (c.rules[cls].true_count > 0) {
      label += " (+" + std::to_string(c.rules[cls].true_count) + ")";
    }
    out += "  " + id + " [shape=doubleoctagon, label=\"" + label + "\"];\n";
    for (node_ref r : c.rules[cls].refs) {
      out += "  " + ref_id(r) + " -> " + id + ";\n";
    }
  }
  out += "}\n";
  return out;
}

std::string cost_report_json(const cost_report& r) {
  nlohmann::json j{{"gate_ops", r.gate_ops},
                   {"comparator_ops", r.comparator_ops},
                   {"total_ops", r.total_ops},
                   {"live_feature_count", r.live_feature_count},
                   {"comparator_cost", r.comparator_cost}};
  return j.dump(2) + "\n";
}

}  // namespace dln
