// SPDX-License-Identifier: Apache-2.0
#include "dln/logic.hpp"

#include <string>

#include "dln/errors.hpp"

namespace dln {

namespace {

constexpr std::array<operator_record, kOperatorCount> kTable = {{
    {"false", {0, 0, 0, 0}, 0},
    {"and", {0, 0, 0, 1}, 1},
    {"a_and_not_b", {0, 0, 1, 0}, 1},
    {"a", {0, 0, 1, 1}, 0},
    {"not_a_and_b", {0, 1, 0, 0}, 1},
    {"b", {0, 1, 0, 1}, 0},
    {"xor", {0, 1, 1, 0}, 3},
    {"or", {0, 1, 1, 1}, 1},
    {"nor", {1, 0, 0, 0}, 1},
    {"xnor", {1, 0, 0, 1}, 3},
    {"not_b", {1, 0, 1, 0}, 0},
    {"a_or_not_b", {1, 0, 1, 1}, 1},
    {"not_a", {1, 1, 0, 0}, 0},
    {"not_a_or_b", {1, 1, 0, 1}, 1},
    {"nand", {1, 1, 1, 0}, 1},
    {"true", {1, 1, 1, 1}, 0},
}};

void check_op_id(int op_id) {
  if (op_id < 0 || op_id >= kOperatorCount) {
    throw invalid_operator_error("invalid operator id " + std::to_string(op_id));
  }
}

}  // namespace

const std::array<operator_record, kOperatorCount>& operator_table() { return kTable; }

std::string_view op_name(int op_id) {
  check_op_id(op_id);
  return kTable[static_cast<std::size_t>(op_id)].name;
}

double soft_logic(int op_id, double a, double b) {
  check_op_id(op_id);
  if (!(a >= 0.0 && a <= 1.0) || !(b >= 0.0 && b <= 1.0)) {
    throw domain_error("soft_logic inputs must lie in [0,1]");
  }
  switch (op_id) {
    case 0: return 0.0;
    case 1: return a * b;
    case 2: return a - a * b;
    case 3: return a;
    case 4: return b - a * b;
    case 5: return b;
    case 6: return a + b - 2.0 * a * b;
    case 7: return a + b - a * b;
    case 8: return 1.0 - (a + b - a * b);
    case 9: return 1.0 - (a + b - 2.0 * a * b);
    case 10: return 1.0 - b;
    case 11: return 1.0 - b + a * b;
    case 12: return 1.0 - a;
    case 13: return 1.0 - a + a * b;
    case 14: return 1.0 - a * b;
    default: return 1.0;  // 15
  }
}

int hard_logic(int op_id, int a, int b) {
  check_op_id(op_id);
  if ((a != 0 && a != 1) || (b != 0 && b != 1)) {
    throw domain_error("hard_logic inputs must be bits");
  }
  return kTable[static_cast<std::size_t>(op_id)].truth[static_cast<std::size_t>(2 * a + b)];
}

int op_cost(int op_id) {
  check_op_id(op_id);
  return kTable[static_cast<std::size_t>(op_id)].cost;
}

void soft_logic_grad(int op_id, double a, double b, double& da, double& db) {
  check_op_id(op_id);
  switch (op_id) {
    case 0: da = 0.0; db = 0.0; break;
    case 1: da = b; db = a; break;
    case 2: da = 1.0 - b; db = -a; break;
    case 3: da = 1.0; db = 0.0; break;
    case 4: da = -b; db = 1.0 - a; break;
    case 5: da = 0.0; db = 1.0; break;
    case 6: da = 1.0 - 2.0 * b; db = 1.0 - 2.0 * a; break;
    case 7: da = 1.0 - b; db = 1.0 - a; break;
    case 8: da = b - 1.0; db = a - 1.0; break;
    case 9: da = 2.0 * b - 1.0; db = 2.0 * a - 1.0; break;
    case 10: da = 0.0; db = -1.0; break;
    case 11: da = b; db = a - 1.0; break;
    case 12: da = -1.0; db = 0.0; break;
    case 13: da = b - 1.0; db = a; break;
    case 14: da = -b; db = -a; break;
    default: da = 0.0; db = 0.0; break;  // 15
  }
}

}  // namespace dln
