// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <random>

#include "dln/circuit.hpp"
#include "dln/errors.hpp"
#include "dln/logic.hpp"
#include "test_util.hpp"

using namespace dln;

namespace {

// Random circuit over `slots` input bits (some slots may be constants) with
// `num_gates` gates and `classes` rule sets.
circuit_model random_circuit(std::mt19937_64& rng, int slots, int num_gates, int classes,
                             int constant_slots = 0, int features = 3) {
  circuit_model c;
  for (int f = 0; f < features; ++f) c.feature_names.push_back("x" + std::to_string(f));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < slots; ++i) {
    bit_slot slot;
    if (i < constant_slots) {
      slot.kind = slot_kind::constant;
      slot.value = static_cast<int>(rng() % 2);
      c.constants.push_back({i, slot.value});
    } else if (rng() % 4 == 0) {
      slot.kind = slot_kind::raw_bit;
      slot.raw_column = static_cast<int>(rng() % static_cast<std::uint64_t>(features));
    } else {
      slot.kind = slot_kind::comparator;
      slot.cmp = {static_cast<int>(rng() % static_cast<std::uint64_t>(features)),
                  rng() % 2 ? cmp_dir::ge : cmp_dir::le, unit(rng)};
    }
    c.inputs.push_back(slot);
  }
  auto random_ref = [&](int gate_limit) -> node_ref {
    const int total = slots + gate_limit;
    const int pick = static_cast<int>(rng() % static_cast<std::uint64_t>(total));
    if (pick < slots) return input_ref(pick);
    return gate_ref(pick - slots);
  };
  for (int g = 0; g < num_gates; ++g) {
    c.gates.push_back({static_cast<int>(rng() % 16), random_ref(g), random_ref(g)});
  }
  c.rules.resize(static_cast<std::size_t>(classes));
  for (int cls = 0; cls < classes; ++cls) {
    const int rules = 1 + static_cast<int>(rng() % 4);
    for (int r = 0; r < rules; ++r) {
      c.rules[static_cast<std::size_t>(cls)].refs.push_back(random_ref(num_gates));
    }
  }
  return c;
}

std::vector<std::uint8_t> random_bits(std::mt19937_64& rng, int n) {
  std::vector<std::uint8_t> bits;
  for (int i = 0; i < n; ++i) bits.push_back(static_cast<std::uint8_t>(rng() % 2));
  return bits;
}

dln_model trained_small_model(std::uint64_t seed, int features = 2, int hidden = 5,
                              int group_size = 3, bool concat = false) {
  const feature_matrix data = testutil::threshold_task(150, seed, seed % 2 == 0);
  train_config cfg;
  cfg.hidden_sizes = {hidden};
  cfg.group_size = group_size;
  cfg.concat_input = concat;
  cfg.epochs = 8;
  cfg.seed = seed;
  dln_model m = build(cfg, data);
  train(m, data);
  return m;
}

}  // namespace

TEST_CASE("discretize folds out-of-range thresholds to constants") {
  dln_model m = trained_small_model(3);
  m.threshold.bias[0] = 1.3;
  m.threshold.slope[0] = 2.0;
  m.threshold.bias[1] = -0.2;
  m.threshold.slope[1] = 2.0;
  m.threshold.bias[2] = 1.3;
  m.threshold.slope[2] = -1.0;
  m.threshold.bias[3] = -0.2;
  m.threshold.slope[3] = -1.0;

  const circuit_model c = discretize(m);
  CHECK(c.inputs[0].kind == slot_kind::constant);
  CHECK(c.inputs[0].value == 0);  // bias above range, positive slope: never fires
  CHECK(c.inputs[1].kind == slot_kind::constant);
  CHECK(c.inputs[1].value == 1);  // bias below range, positive slope: always fires
  CHECK(c.inputs[2].kind == slot_kind::constant);
  CHECK(c.inputs[2].value == 1);  // mirrored for negative slope
  CHECK(c.inputs[3].kind == slot_kind::constant);
  CHECK(c.inputs[3].value == 0);
  CHECK(c.constants.size() == 4);
  for (const auto& rec : c.constants) {
    CHECK(c.inputs[static_cast<std::size_t>(rec.slot)].value == rec.value);
  }
}

TEST_CASE("discretize emits ge/le comparators by slope sign") {
  dln_model m = trained_small_model(5);
  m.threshold.bias[0] = 0.4;
  m.threshold.slope[0] = 2.0;
  m.threshold.bias[1] = 0.6;
  m.threshold.slope[1] = -2.0;
  const circuit_model c = discretize(m);
  CHECK(c.inputs[0].kind == slot_kind::comparator);
  CHECK(c.inputs[0].cmp.dir == cmp_dir::ge);
  CHECK(c.inputs[0].cmp.threshold == 0.4);
  CHECK(c.inputs[1].cmp.dir == cmp_dir::le);
}

TEST_CASE("sum connections below the 0.8 sigmoid threshold are dropped") {
  dln_model m = trained_small_model(7);
  m.final_tau = 0.5;
  m.sum.link_w.fill(-10.0);
  // sigmoid(x/tau) = 0.79 -> dropped; 0.81 -> kept
  m.sum.link_w(0, 0) = 0.5 * std::log(0.79 / 0.21);
  m.sum.link_w(1, 0) = 0.5 * std::log(0.81 / 0.19);
  const circuit_model c = discretize(m);
  REQUIRE(c.rules.size() == 2);
  CHECK(c.rules[0].refs.size() == 1);
  const int last_layer_first_gate = static_cast<int>(c.gates.size()) - m.layers.back().width();
  CHECK(c.rules[0].refs[0] == gate_ref(last_layer_first_gate + 1));
}

TEST_CASE("circuit evaluation agrees with hard_predict exhaustively") {
  for (std::uint64_t seed : {11ULL, 12ULL, 13ULL, 14ULL}) {
    const dln_model m = trained_small_model(seed, 2, 5, 3, seed % 2 == 1);
    const circuit_model c = discretize(m);
    validate(c);
    const int bits_n = m.binarized_width();
    REQUIRE(bits_n <= 12);

    // Folded slots stay pinned at their constant: only achievable binarized
    // inputs are compared.
    std::vector<int> free_slots;
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(bits_n), 0);
    for (int i = 0; i < bits_n; ++i) {
      if (c.inputs[static_cast<std::size_t>(i)].kind == slot_kind::constant) {
        bits[static_cast<std::size_t>(i)] =
            static_cast<std::uint8_t>(c.inputs[static_cast<std::size_t>(i)].value);
      } else {
        free_slots.push_back(i);
      }
    }
    for (int pattern = 0; pattern < (1 << free_slots.size()); ++pattern) {
      for (std::size_t b = 0; b < free_slots.size(); ++b) {
        bits[static_cast<std::size_t>(free_slots[b])] =
            static_cast<std::uint8_t>((pattern >> b) & 1);
      }
      const hard_result want = hard_predict_bits(m, bits);
      const std::vector<int> got = evaluate_bits(c, bits);
      REQUIRE(got.size() == want.scores.size());
      for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == want.scores[i]);
    }
  }
}

TEST_CASE("circuit evaluation from raw features matches hard_predict") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::uint64_t seed : {21ULL, 22ULL}) {
    dln_model m = trained_small_model(seed);
    // push one threshold out of range to exercise a folded comparator
    m.threshold.bias[0] = 1.4;
    const circuit_model c = simplify_rules(fold_constants(discretize(m)));
    validate(c);
    for (int trial = 0; trial < 1000; ++trial) {
      const std::vector<double> x{unit(rng), unit(rng)};
      const hard_result want = hard_predict(m, x);
      CHECK(evaluate(c, x) == want.scores);
      CHECK(predict(c, x) == want.label);
    }
  }
}

TEST_CASE("fold_constants: identity and absorbing elements") {
  circuit_model c;
  c.feature_names = {"x0"};
  bit_slot t;
  t.kind = slot_kind::constant;
  t.value = 1;
  bit_slot cmp;
  cmp.kind = slot_kind::comparator;
  cmp.cmp = {0, cmp_dir::ge, 0.5};
  c.inputs = {t, cmp};
  c.constants = {{0, 1}};
  c.gates.push_back({1, input_ref(0), input_ref(1)});  // AND(true, x) -> x
  c.gates.push_back({7, input_ref(0), input_ref(1)});  // OR(true, x) -> true
  c.rules.resize(2);
  c.rules[0].refs = {gate_ref(0)};
  c.rules[1].refs = {gate_ref(1)};

  const circuit_model folded = fold_constants(c);
  validate(folded);
  CHECK(folded.gates.empty());
  CHECK(folded.rules[0].refs == std::vector<node_ref>{input_ref(1)});
  CHECK(folded.rules[1].refs.empty());
  CHECK(folded.rules[1].true_count == 1);
}

TEST_CASE("fold_constants preserves semantics on random circuits") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 10; ++trial) {
    const circuit_model c = random_circuit(rng, 8, 12, 3, /*constant_slots=*/3);
    const circuit_model folded = fold_constants(c);
    validate(folded);
    for (int probe = 0; probe < 10000; ++probe) {
      const auto bits = random_bits(rng, 8);
      CHECK(evaluate_bits(folded, bits) == evaluate_bits(c, bits));
    }
  }
}

TEST_CASE("simplify_rules handles self-cancellation, sharing and negation") {
  circuit_model c;
  c.feature_names = {"x0"};
  bit_slot cmp;
  cmp.kind = slot_kind::comparator;
  cmp.cmp = {0, cmp_dir::ge, 0.5};
  c.inputs = {cmp};
  c.gates.push_back({6, input_ref(0), input_ref(0)});   // XOR(x, x) -> false
  c.gates.push_back({12, input_ref(0), input_ref(0)});  // not x
  c.gates.push_back({12, gate_ref(1), gate_ref(1)});    // not not x -> x
  c.gates.push_back({1, input_ref(0), gate_ref(1)});    // AND(x, not x) -> false
  c.gates.push_back({7, input_ref(0), gate_ref(1)});    // OR(x, not x) -> true
  c.gates.push_back({1, input_ref(0), input_ref(0)});   // AND(x, x) -> x
  c.rules.resize(1);
  c.rules[0].refs = {gate_ref(0), gate_ref(2), gate_ref(3), gate_ref(4), gate_ref(5)};

  const circuit_model s = simplify_rules(c);
  validate(s);
  CHECK(s.gates.empty());
  // XOR(x,x) and AND(x, not x) vanish; OR(x, not x) becomes an unconditional
  // +1; not-not-x and AND(x,x) collapse to the comparator itself.
  CHECK(s.rules[0].true_count == 1);
  CHECK(s.rules[0].refs == std::vector<node_ref>{input_ref(0), input_ref(0)});
}

TEST_CASE("simplify_rules shares identical gates") {
  circuit_model c;
  c.feature_names = {"x0", "x1"};
  bit_slot a, b;
  a.kind = slot_kind::comparator;
  a.cmp = {0, cmp_dir::ge, 0.3};
  b.kind = slot_kind::comparator;
  b.cmp = {1, cmp_dir::ge, 0.7};
  c.inputs = {a, b};
  c.gates.push_back({1, input_ref(0), input_ref(1)});
  c.gates.push_back({1, input_ref(0), input_ref(1)});  // duplicate
  c.gates.push_back({1, input_ref(1), input_ref(0)});  // commuted duplicate
  c.rules.resize(1);
  c.rules[0].refs = {gate_ref(0), gate_ref(1), gate_ref(2)};

  const circuit_model s = simplify_rules(c);
  validate(s);
  CHECK(s.gates.size() == 1);
  CHECK(s.rules[0].refs.size() == 3);  // multiset semantics preserved
  for (const auto& r : s.rules[0].refs) CHECK(r == gate_ref(0));
}

TEST_CASE("simplify_rules canonicalizes implications into NOT+AND/OR") {
  std::mt19937_64 rng(41);
  circuit_model c;
  c.feature_names = {"x0", "x1"};
  bit_slot a, b;
  a.kind = slot_kind::comparator;
  a.cmp = {0, cmp_dir::ge, 0.3};
  b.kind = slot_kind::comparator;
  b.cmp = {1, cmp_dir::ge, 0.7};
  c.inputs = {a, b};
  c.gates.push_back({2, input_ref(0), input_ref(1)});
  c.gates.push_back({13, input_ref(0), input_ref(1)});
  c.rules.resize(1);
  c.rules[0].refs = {gate_ref(0), gate_ref(1)};

  const circuit_model s = simplify_rules(c);
  validate(s);
  for (const auto& g : s.gates) {
    CHECK((g.op == 1 || g.op == 7 || g.op == 12));
  }
  const cost_report before = count_ops(c);
  const cost_report after = count_ops(s);
  CHECK(after.total_ops <= before.total_ops);
  for (int probe = 0; probe < 50; ++probe) {
    const auto bits = random_bits(rng, 2);
    CHECK(evaluate_bits(s, bits) == evaluate_bits(c, bits));
  }
}

TEST_CASE("simplify_rules preserves semantics exhaustively on small circuits") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 25; ++trial) {
    const int slots = 4 + static_cast<int>(rng() % 9);  // up to 12 inputs
    const circuit_model c = random_circuit(rng, slots, 14, 3, /*constant_slots=*/1);
    const circuit_model s = simplify_rules(fold_constants(c));
    validate(s);
    for (int pattern = 0; pattern < (1 << slots); ++pattern) {
      std::vector<std::uint8_t> bits;
      for (int i = 0; i < slots; ++i) bits.push_back((pattern >> i) & 1);
      CHECK(evaluate_bits(s, bits) == evaluate_bits(c, bits));
    }
  }
}

TEST_CASE("transformation passes never increase the op count") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 25; ++trial) {
    const circuit_model c = random_circuit(rng, 10, 20, 2, 2);
    const cost_report base = count_ops(c);
    const circuit_model folded = fold_constants(c);
    const cost_report after_fold = count_ops(folded);
    CHECK(after_fold.total_ops <= base.total_ops);
    const circuit_model simplified = simplify_rules(folded);
    const cost_report after_simplify = count_ops(simplified);
    CHECK(after_simplify.total_ops <= after_fold.total_ops);
    validate(folded);
    validate(simplified);
  }
}

TEST_CASE("count_ops prices gates per the cost table") {
  circuit_model c;
  c.feature_names = {"x0"};
  bit_slot cmp;
  cmp.kind = slot_kind::comparator;
  cmp.cmp = {0, cmp_dir::ge, 0.5};
  c.inputs = {cmp};
  c.gates.push_back({1, input_ref(0), input_ref(0)});  // AND: 1
  c.gates.push_back({7, input_ref(0), gate_ref(0)});   // OR: 1
  c.gates.push_back({6, gate_ref(0), gate_ref(1)});    // XOR: 3
  c.rules.resize(1);
  c.rules[0].refs = {gate_ref(2)};

  const cost_report report = count_ops(c);
  CHECK(report.gate_ops == 5);
  CHECK(report.comparator_ops == 16);
  CHECK(report.total_ops == 21);
  CHECK(report.live_feature_count == 1);

  const circuit_model empty;
  const cost_report zero = count_ops(empty);
  CHECK(zero.gate_ops == 0);
  CHECK(zero.comparator_ops == 0);
  CHECK(zero.total_ops == 0);
  CHECK(zero.live_feature_count == 0);
}

TEST_CASE("live_feature_count counts distinct features among live comparators") {
  std::mt19937_64 rng(53);
  const circuit_model c = random_circuit(rng, 9, 10, 2, 0, 4);
  const cost_report report = count_ops(c);
  std::vector<int> features;
  const auto live = live_slots(c);
  for (std::size_t i = 0; i < c.inputs.size(); ++i) {
    if (live[i] && c.inputs[i].kind == slot_kind::comparator) {
      features.push_back(c.inputs[i].cmp.feature);
    }
  }
  std::sort(features.begin(), features.end());
  features.erase(std::unique(features.begin(), features.end()), features.end());
  CHECK(report.live_feature_count == static_cast<int>(features.size()));
}

TEST_CASE("validate rejects broken circuits") {
  circuit_model c;
  c.feature_names = {"x0"};
  bit_slot cmp;
  cmp.kind = slot_kind::comparator;
  cmp.cmp = {0, cmp_dir::ge, 0.5};
  c.inputs = {cmp};
  c.gates.push_back({1, gate_ref(0), input_ref(0)});  // self-reference breaks topo order
  c.rules.resize(1);
  c.rules[0].refs = {gate_ref(0)};
  CHECK_THROWS_AS(validate(c), structure_error);

  circuit_model c2;
  c2.inputs = {cmp};
  c2.rules.resize(1);
  c2.rules[0].refs = {input_ref(5)};
  CHECK_THROWS_AS(validate(c2), structure_error);
}

TEST_CASE("export_text emits one parsable rule per line") {
  circuit_model c;
  c.feature_names = {"alpha"};
  bit_slot cmp;
  cmp.kind = slot_kind::comparator;
  cmp.cmp = {0, cmp_dir::ge, 0.42};
  c.inputs = {cmp};
  c.rules.resize(1);
  c.rules[0].refs = {input_ref(0)};
  const std::string text = export_text(c);
  CHECK(text.find("# feat[0] = alpha") != std::string::npos);
  CHECK(text.find("class 0: feat[0] ≥ 0.42") != std::string::npos);

  const auto lo = testutil::evaluate_rules_text(text, 1, {0.3});
  const auto hi = testutil::evaluate_rules_text(text, 1, {0.5});
  CHECK(lo == std::vector<int>{0});
  CHECK(hi == std::vector<int>{1});
}

TEST_CASE("folded-true rules export as bare true lines") {
  circuit_model c;
  c.feature_names = {"x0"};
  bit_slot cmp;
  cmp.kind = slot_kind::comparator;
  cmp.cmp = {0, cmp_dir::le, 0.25};
  c.inputs = {cmp};
  c.rules.resize(2);
  c.rules[0].true_count = 2;
  c.rules[1].refs = {input_ref(0)};
  const std::string text = export_text(c);
  CHECK(text.find("class 0: true\nclass 0: true\n") != std::string::npos);
  const auto scores = testutil::evaluate_rules_text(text, 2, {0.9});
  CHECK(scores == std::vector<int>{2, 0});
  CHECK(scores == evaluate(c, {0.9}));
}

TEST_CASE("exported rules reproduce circuit outputs on random inputs") {
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::uint64_t seed : {61ULL, 62ULL, 63ULL}) {
    const dln_model m = trained_small_model(seed, 3, 4, 2);
    const circuit_model c = simplify_rules(fold_constants(discretize(m)));
    const std::string text = export_text(c);
    for (int probe = 0; probe < 200; ++probe) {
      const std::vector<double> x{unit(rng), unit(rng), unit(rng)};
      const std::vector<int> want = evaluate(c, x);
      const std::vector<int> got = testutil::evaluate_rules_text(text, c.num_classes(), x);
      CHECK(got == want);
    }
  }
}

TEST_CASE("graph export is syntactically valid DOT") {
  std::mt19937_64 rng(67);
  const circuit_model raw = random_circuit(rng, 7, 9, 2, 1);
  std::string why;
  CHECK_MESSAGE(testutil::dot_syntax_ok(export_graph(raw), &why), why);

  const dln_model m = trained_small_model(71, 2, 4, 2);
  const circuit_model c = simplify_rules(fold_constants(discretize(m)));
  CHECK_MESSAGE(testutil::dot_syntax_ok(export_graph(c), &why), why);
  CHECK(export_graph(c).find("digraph") == 0);
}
