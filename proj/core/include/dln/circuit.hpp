// SPDX-License-Identifier: Apache-2.0
#ifndef DLN_CIRCUIT_HPP
#define DLN_CIRCUIT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dln/network.hpp"

namespace dln {

// ---------------------------------------------------------------------------
// Discretized network: comparators on raw features, a topologically ordered
// gate list, and per-class rule sets. Input slot indices match the model's
// binarized input bits and stay stable across all transformation passes.
// ---------------------------------------------------------------------------

enum class cmp_dir : std::uint8_t { ge, le };

struct comparator {
  int feature = 0;
  cmp_dir dir = cmp_dir::ge;
  double threshold = 0.0;

  bool operator==(const comparator&) const = default;
};

enum class slot_kind : std::uint8_t { comparator, raw_bit, constant };

// One binarized input bit: a live comparator, a categorical bit taken
// directly from a feature column, or a neuron folded to a constant.
struct bit_slot {
  slot_kind kind = slot_kind::constant;
  comparator cmp;
  int raw_column = 0;
  int value = 0;

  bool operator==(const bit_slot&) const = default;
};

enum class ref_kind : std::uint8_t { constant, input, gate };

struct node_ref {
  ref_kind kind = ref_kind::constant;
  int index = 0;  // constant: 0 or 1; input: slot index; gate: gate index

  bool operator==(const node_ref&) const = default;
};

constexpr node_ref const_ref(int value) { return {ref_kind::constant, value}; }
constexpr node_ref input_ref(int slot) { return {ref_kind::input, slot}; }
constexpr node_ref gate_ref(int index) { return {ref_kind::gate, index}; }

struct gate {
  int op = 0;
  node_ref a, b;

  bool operator==(const gate&) const = default;
};

struct class_rules {
  std::vector<node_ref> refs;  // one entry per surviving sum connection
  int true_count = 0;          // rules folded to constant True

  bool operator==(const class_rules&) const = default;
};

struct folded_record {
  int slot = 0;
  int value = 0;

  bool operator==(const folded_record&) const = default;
};

struct circuit_model {
  std::vector<std::string> feature_names;
  std::vector<bit_slot> inputs;
  std::vector<gate> gates;
  std::vector<class_rules> rules;
  std::vector<folded_record> constants;  // threshold neurons folded at discretization

  int num_classes() const { return static_cast<int>(rules.size()); }

  bool operator==(const circuit_model&) const = default;
};

struct cost_report {
  long long gate_ops = 0;
  long long comparator_ops = 0;
  long long total_ops = 0;
  int live_feature_count = 0;
  int comparator_cost = 0;  // OPs charged per 16-bit comparison
};

// Cost of one 16-bit magnitude comparison, in two-input gate OPs.
inline constexpr int kComparatorCost = 16;

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Argmax-quantizes gates and links, binarizes sum connections at the 0.8
// sigmoid threshold, and folds threshold neurons whose bias left [0,1] into
// constants.
circuit_model discretize(const dln_model& model);

// Propagates constants through gates and removes dead gates. Input slots are
// never renumbered.
circuit_model fold_constants(circuit_model c);

// Local semantics-preserving rewrites: double negation, idempotence,
// complementation, implication canonicalization into NOT+AND/OR, commutative
// operand ordering, and common-subexpression sharing.
circuit_model simplify_rules(circuit_model c);

cost_report count_ops(const circuit_model& c, int comparator_cost = kComparatorCost);

// Per-class rule counts from raw features / from an explicit bit assignment.
// Constant slots ignore the provided bit and use their folded value.
std::vector<int> evaluate(const circuit_model& c, const std::vector<double>& features);
std::vector<int> evaluate_bits(const circuit_model& c, const std::vector<std::uint8_t>& bits);

// Argmax class with lowest-index tie-breaking.
int predict(const circuit_model& c, const std::vector<double>& features);

// Throws structure_error unless refs are in range, gates are topologically
// ordered and every rule references a live node.
void validate(const circuit_model& c);

// Slots referenced by at least one gate or rule.
std::vector<bool> live_slots(const circuit_model& c);

// One rule per line: "class <id>: <expr>" over feat[i]/bit[i] atoms with
// UTF-8 connectives. Leading '#' lines carry the feature-name legend.
std::string export_text(const circuit_model& c);

// Graphviz DOT document of the dataflow.
std::string export_graph(const circuit_model& c);

// Cost report as a JSON document.
std::string cost_report_json(const cost_report& r);

}  // namespace dln

#endif  // DLN_CIRCUIT_HPP
