// SPDX-License-Identifier: Apache-2.0
#include "dln/circuit.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "dln/errors.hpp"
#include "dln/logic.hpp"

namespace dln {

namespace {

bool is_const_ref(const circuit_model& c, node_ref r, int& value) {
  if (r.kind == ref_kind::constant) {
    value = r.index;
    return true;
  }
  if (r.kind == ref_kind::input &&
      c.inputs[static_cast<std::size_t>(r.index)].kind == slot_kind::constant) {
    value = c.inputs[static_cast<std::size_t>(r.index)].value;
    return true;
  }
  return false;
}

bool symmetric_op(int op) {
  switch (op) {
    case 0: case 1: case 6: case 7: case 8: case 9: case 14: case 15: return true;
    default: return false;
  }
}

std::tuple<int, int, int> ref_key(node_ref r) {
  return {static_cast<int>(r.kind), r.index, 0};
}

}  // namespace

circuit_model discretize(const dln_model& model) {
  circuit_model c;
  for (const auto& col : model.features) c.feature_names.push_back(col.name);
  c.rules.resize(static_cast<std::size_t>(model.num_classes()));

  // Threshold neurons become comparators; out-of-range biases fold.
  for (int i = 0; i < model.threshold.width(); ++i) {
    const double b = model.threshold.bias[static_cast<std::size_t>(i)];
    const double s = model.threshold.slope[static_cast<std::size_t>(i)];
    const int col = model.threshold.input_index[static_cast<std::size_t>(i)];
    bit_slot slot;
    if (s == 0.0) {
      slot.kind = slot_kind::constant;  // Heaviside(0) = 1
      slot.value = 1;
    } else if (s > 0.0) {
      if (b < 0.0) {
        slot.kind = slot_kind::constant;
        slot.value = 1;
      } else if (b > 1.0) {
        slot.kind = slot_kind::constant;
        slot.value = 0;
      } else {
        slot.kind = slot_kind::comparator;
        slot.cmp = {col, cmp_dir::ge, b};
      }
    } else {
      if (b < 0.0) {
        slot.kind = slot_kind::constant;
        slot.value = 0;
      } else if (b > 1.0) {
        slot.kind = slot_kind::constant;
        slot.value = 1;
      } else {
        slot.kind = slot_kind::comparator;
        slot.cmp = {col, cmp_dir::le, b};
      }
    }
    if (slot.kind == slot_kind::constant) {
      c.constants.push_back({static_cast<int>(c.inputs.size()), slot.value});
    }
    c.inputs.push_back(slot);
  }
  for (int col : model.passthrough_columns) {
    bit_slot slot;
    slot.kind = slot_kind::raw_bit;
    slot.raw_column = col;
    c.inputs.push_back(slot);
  }

  std::vector<node_ref> bin_refs;
  for (std::size_t i = 0; i < c.inputs.size(); ++i) bin_refs.push_back(input_ref(static_cast<int>(i)));

  std::vector<node_ref> prev_refs = bin_refs;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const logic_layer& layer = model.layers[l];
    std::vector<node_ref> input_refs;
    if (l == 0) {
      input_refs = bin_refs;
    } else if (model.config.concat_input) {
      input_refs = prev_refs;
      input_refs.insert(input_refs.end(), bin_refs.begin(), bin_refs.end());
    } else {
      input_refs = prev_refs;
    }

    std::vector<node_ref> out_refs;
    for (int i = 0; i < layer.width(); ++i) {
      const std::size_t si = static_cast<std::size_t>(i);
      const int k = argmax_masked(layer.gate_w, i, layer.gate_mask[si]);
      const int ja = argmax_masked(layer.link_a_w, i, layer.link_mask_a[si]);
      const int jb = argmax_masked(layer.link_b_w, i, layer.link_mask_b[si]);
      c.gates.push_back({k, input_refs[static_cast<std::size_t>(ja)],
                         input_refs[static_cast<std::size_t>(jb)]});
      out_refs.push_back(gate_ref(static_cast<int>(c.gates.size()) - 1));
    }
    prev_refs = std::move(out_refs);
  }

  for (int cls = 0; cls < model.num_classes(); ++cls) {
    for (int j = 0; j < model.sum.in_width(); ++j) {
      if (sigmoid(model.sum.link_w(j, cls) / model.final_tau) >= kSumThreshold) {
        c.rules[static_cast<std::size_t>(cls)].refs.push_back(prev_refs[static_cast<std::size_t>(j)]);
      }
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

std::vector<int> evaluate_slot_values(const circuit_model& c, const std::vector<int>& slots) {
  std::vector<int> gate_vals(c.gates.size(), 0);
  auto value_of = [&](node_ref r) -> int {
    switch (r.kind) {
      case ref_kind::constant: return r.index;
      case ref_kind::input: return slots[static_cast<std::size_t>(r.index)];
      default: return gate_vals[static_cast<std::size_t>(r.index)];
    }
  };
  for (std::size_t g = 0; g < c.gates.size(); ++g) {
    gate_vals[g] = hard_logic(c.gates[g].op, value_of(c.gates[g].a), value_of(c.gates[g].b));
  }
  std::vector<int> scores(c.rules.size(), 0);
  for (std::size_t cls = 0; cls < c.rules.size(); ++cls) {
    int acc = c.rules[cls].true_count;
    for (node_ref r : c.rules[cls].refs) acc += value_of(r);
    scores[cls] = acc;
  }
  return scores;
}

}  // namespace

std::vector<int> evaluate(const circuit_model& c, const std::vector<double>& features) {
  std::vector<int> slots(c.inputs.size(), 0);
  for (std::size_t i = 0; i < c.inputs.size(); ++i) {
    const bit_slot& slot = c.inputs[i];
    switch (slot.kind) {
      case slot_kind::comparator: {
        const double x = features.at(static_cast<std::size_t>(slot.cmp.feature));
        slots[i] = (slot.cmp.dir == cmp_dir::ge ? x >= slot.cmp.threshold
                                                : x <= slot.cmp.threshold)
                       ? 1
                       : 0;
        break;
      }
      case slot_kind::raw_bit:
        slots[i] = features.at(static_cast<std::size_t>(slot.raw_column)) >= 0.5 ? 1 : 0;
        break;
      case slot_kind::constant:
        slots[i] = slot.value;
        break;
    }
  }
  return evaluate_slot_values(c, slots);
}

std::vector<int> evaluate_bits(const circuit_model& c, const std::vector<std::uint8_t>& bits) {
  if (bits.size() != c.inputs.size()) {
    throw structure_error("evaluate_bits: bit width mismatch");
  }
  std::vector<int> slots(c.inputs.size(), 0);
  for (std::size_t i = 0; i < c.inputs.size(); ++i) {
    slots[i] = c.inputs[i].kind == slot_kind::constant ? c.inputs[i].value : bits[i];
  }
  return evaluate_slot_values(c, slots);
}

int predict(const circuit_model& c, const std::vector<double>& features) {
  const std::vector<int> scores = evaluate(c, features);
  int best = 0;
  for (std::size_t cls = 1; cls < scores.size(); ++cls) {
    if (scores[cls] > scores[static_cast<std::size_t>(best)]) best = static_cast<int>(cls);
  }
  return best;
}

void validate(const circuit_model& c) {
  auto check_ref = [&](node_ref r, int gate_limit) {
    switch (r.kind) {
      case ref_kind::constant:
        if (r.index != 0 && r.index != 1) throw structure_error("constant ref must be 0 or 1");
        break;
      case ref_kind::input:
        if (r.index < 0 || r.index >= static_cast<int>(c.inputs.size())) {
          throw structure_error("input ref out of range");
        }
        break;
      case ref_kind::gate:
        if (r.index < 0 || r.index >= gate_limit) {
          throw structure_error("gate ref breaks topological order");
        }
        break;
    }
  };
  for (std::size_t g = 0; g < c.gates.size(); ++g) {
    if (c.gates[g].op < 0 || c.gates[g].op >= kOperatorCount) {
      throw structure_error("gate op out of range");
    }
    check_ref(c.gates[g].a, static_cast<int>(g));
    check_ref(c.gates[g].b, static_cast<int>(g));
  }
  for (const auto& rule : c.rules) {
    if (rule.true_count < 0) throw structure_error("negative true_count");
    for (node_ref r : rule.refs) {
      check_ref(r, static_cast<int>(c.gates.size()));
    }
  }
}

std::vector<bool> live_slots(const circuit_model& c) {
  std::vector<bool> live(c.inputs.size(), false);
  auto mark = [&](node_ref r) {
    if (r.kind == ref_kind::input) live[static_cast<std::size_t>(r.index)] = true;
  };
  for (const auto& g : c.gates) {
    mark(g.a);
    mark(g.b);
  }
  for (const auto& rule : c.rules) {
    for (node_ref r : rule.refs) mark(r);
  }
  return live;
}

cost_report count_ops(const circuit_model& c, int comparator_cost) {
  cost_report report;
  report.comparator_cost = comparator_cost;
  for (const auto& g : c.gates) report.gate_ops += op_cost(g.op);

  const std::vector<bool> live = live_slots(c);
  std::vector<int> features;
  for (std::size_t i = 0; i < c.inputs.size(); ++i) {
    if (live[i] && c.inputs[i].kind == slot_kind::comparator) {
      report.comparator_ops += comparator_cost;
      features.push_back(c.inputs[i].cmp.feature);
    }
  }
  std::sort(features.begin(), features.end());
  features.erase(std::unique(features.begin(), features.end()), features.end());
  report.live_feature_count = static_cast<int>(features.size());
  report.total_ops = report.gate_ops + report.comparator_ops;
  return report;
}

// ---------------------------------------------------------------------------
// Rewriting: shared machinery for fold_constants and simplify_rules
// ---------------------------------------------------------------------------

namespace {

struct pass_opts {
  bool structural = false;     // double negation, idempotence, complementation
  bool canonicalize = false;   // implications into NOT+AND/OR
  bool cse = false;            // share identical (op, a, b) triples
};

using gate_key = std::tuple<int, std::tuple<int, int, int>, std::tuple<int, int, int>>;

struct rewriter {
  const circuit_model& src;
  const pass_opts opts;
  std::vector<gate> out_gates;
  std::vector<node_ref> alias;  // old gate index -> ref in the new gate space
  std::map<gate_key, int> seen;

  rewriter(const circuit_model& c, pass_opts o) : src(c), opts(o) {
    alias.reserve(c.gates.size());
  }

  node_ref resolve(node_ref r) const {
    if (r.kind == ref_kind::gate) return alias[static_cast<std::size_t>(r.index)];
    return r;
  }

  node_ref emit(int op, node_ref a, node_ref b) {
    if (opts.structural && symmetric_op(op) && ref_key(b) < ref_key(a)) {
      std::swap(a, b);
    }
    if (opts.cse) {
      const gate_key key{op, ref_key(a), ref_key(b)};
      const auto it = seen.find(key);
      if (it != seen.end()) return gate_ref(it->second);
      const int idx = static_cast<int>(out_gates.size());
      out_gates.push_back({op, a, b});
      seen.emplace(key, idx);
      return gate_ref(idx);
    }
    out_gates.push_back({op, a, b});
    return gate_ref(static_cast<int>(out_gates.size()) - 1);
  }

  node_ref make_not(node_ref r) {
    int v = 0;
    if (is_const_ref(src, r, v)) return const_ref(1 - v);
    if (opts.structural && r.kind == ref_kind::gate &&
        out_gates[static_cast<std::size_t>(r.index)].op == 12) {
      return out_gates[static_cast<std::size_t>(r.index)].a;  // double negation
    }
    return emit(12, r, r);
  }

  // Restriction of a truth table to one free variable: (value at 0, value at 1).
  node_ref restrict_unary(int v0, int v1, node_ref operand) {
    if (v0 == v1) return const_ref(v0);
    if (v0 == 0) return operand;
    return make_not(operand);
  }

  node_ref rewrite_gate(const gate& g) {
    node_ref ra = resolve(g.a);
    node_ref rb = resolve(g.b);
    const auto& truth = operator_table()[static_cast<std::size_t>(g.op)].truth;

    int va = 0, vb = 0;
    const bool ca = is_const_ref(src, ra, va);
    const bool cb = is_const_ref(src, rb, vb);
    if (ca && cb) return const_ref(truth[static_cast<std::size_t>(2 * va + vb)]);
    if (ca) return restrict_unary(truth[static_cast<std::size_t>(2 * va)],
                                  truth[static_cast<std::size_t>(2 * va + 1)], rb);
    if (cb) return restrict_unary(truth[static_cast<std::size_t>(vb)],
                                  truth[static_cast<std::size_t>(2 + vb)], ra);

    switch (g.op) {
      case 0: return const_ref(0);
      case 15: return const_ref(1);
      case 3: return ra;
      case 5: return rb;
      case 10: return make_not(rb);
      case 12: return make_not(ra);
      default: break;
    }

    if (opts.structural) {
      auto not_operand = [&](node_ref r) -> const node_ref* {
        if (r.kind == ref_kind::gate &&
            out_gates[static_cast<std::size_t>(r.index)].op == 12) {
          return &out_gates[static_cast<std::size_t>(r.index)].a;
        }
        return nullptr;
      };
      if (ra == rb) {
        // Diagonal restriction f(x, x).
        return restrict_unary(truth[0], truth[3], ra);
      }
      if (const node_ref* inner = not_operand(rb); inner && *inner == ra) {
        // f(x, not x)
        return restrict_unary(truth[1], truth[2], ra);
      }
      if (const node_ref* inner = not_operand(ra); inner && *inner == rb) {
        // f(not x, x)
        return restrict_unary(truth[2], truth[1], rb);
      }
    }

    if (opts.canonicalize) {
      switch (g.op) {
        case 2: return emit(1, ra, make_not(rb));   // a and not b
        case 4: return emit(1, make_not(ra), rb);   // not a and b
        case 11: return emit(7, ra, make_not(rb));  // a or not b
        case 13: return emit(7, make_not(ra), rb);  // not a or b
        default: break;
      }
    }

    return emit(g.op, ra, rb);
  }
};

circuit_model rewrite_pass(const circuit_model& c, pass_opts opts) {
  rewriter rw(c, opts);
  for (const gate& g : c.gates) {
    rw.alias.push_back(rw.rewrite_gate(g));
  }

  circuit_model out;
  out.feature_names = c.feature_names;
  out.inputs = c.inputs;
  out.constants = c.constants;
  out.gates = std::move(rw.out_gates);
  out.rules.resize(c.rules.size());

  for (std::size_t cls = 0; cls < c.rules.size(); ++cls) {
    out.rules[cls].true_count = c.rules[cls].true_count;
    for (node_ref r : c.rules[cls].refs) {
      node_ref nr = r.kind == ref_kind::gate ? rw.alias[static_cast<std::size_t>(r.index)] : r;
      int v = 0;
      if (is_const_ref(out, nr, v)) {
        if (v == 1) out.rules[cls].true_count += 1;
        // constant-False rules vanish
      } else {
        out.rules[cls].refs.push_back(nr);
      }
    }
  }

  // Dead-gate elimination, preserving topological order.
  std::vector<bool> live(out.gates.size(), false);
  auto mark = [&](node_ref r, auto&& self) -> void {
    if (r.kind != ref_kind::gate || live[static_cast<std::size_t>(r.index)]) return;
    live[static_cast<std::size_t>(r.index)] = true;
    self(out.gates[static_cast<std::size_t>(r.index)].a, self);
    self(out.gates[static_cast<std::size_t>(r.index)].b, self);
  };
  for (const auto& rule : out.rules) {
    for (node_ref r : rule.refs) mark(r, mark);
  }

  std::vector<int> remap(out.gates.size(), -1);
  std::vector<gate> compact;
  for (std::size_t g = 0; g < out.gates.size(); ++g) {
    if (!live[g]) continue;
    remap[g] = static_cast<int>(compact.size());
    gate ng = out.gates[g];
    if (ng.a.kind == ref_kind::gate) ng.a.index = remap[static_cast<std::size_t>(ng.a.index)];
    if (ng.b.kind == ref_kind::gate) ng.b.index = remap[static_cast<std::size_t>(ng.b.index)];
    compact.push_back(ng);
  }
  for (auto& rule : out.rules) {
    for (node_ref& r : rule.refs) {
      if (r.kind == ref_kind::gate) r.index = remap[static_cast<std::size_t>(r.index)];
    }
  }
  out.gates = std::move(compact);
  return out;
}

circuit_model run_to_fixpoint(circuit_model c, pass_opts opts) {
  for (int iter = 0; iter < 100; ++iter) {
    circuit_model next = rewrite_pass(c, opts);
    if (next == c) return c;
    c = std::move(next);
  }
  return c;
}

}  // namespace

circuit_model fold_constants(circuit_model c) {
  return run_to_fixpoint(std::move(c), pass_opts{});
}

circuit_model simplify_rules(circuit_model c) {
  return run_to_fixpoint(std::move(c), pass_opts{.structural = true, .canonicalize = true, .cse = true});
}

}  // namespace dln
