// SPDX-License-Identifier: Apache-2.0
#ifndef DLN_LOGIC_HPP
#define DLN_LOGIC_HPP

#include <array>
#include <cstdint>
#include <string_view>

namespace dln {

// The 16 two-input Boolean operators, indexed by the canonical operator id.
// Each operator has a real-valued (soft) form defined on [0,1]^2 that agrees
// with its truth table at the binary corners, and a hardware gate cost in
// two-input gate OPs: AND/OR/NAND/NOR and the implication family cost 1,
// XOR/XNOR cost 3, and constants, pass-throughs and NOT are free wiring.
inline constexpr int kOperatorCount = 16;

struct operator_record {
  std::string_view name;
  std::array<std::uint8_t, 4> truth;  // outputs for inputs (0,0),(0,1),(1,0),(1,1)
  int cost;                           // gate OPs for one evaluation
};

// Ordered table; entry k describes operator id k.
const std::array<operator_record, kOperatorCount>& operator_table();

std::string_view op_name(int op_id);

// Real-valued operator evaluated at (a, b). Inputs must lie in [0,1];
// outputs lie in [0,1] without clamping.
double soft_logic(int op_id, double a, double b);

// Truth-table lookup for binary inputs.
int hard_logic(int op_id, int a, int b);

// Gate OPs for one evaluation of the operator.
int op_cost(int op_id);

// Partial derivatives of soft_logic with respect to a and b. The soft forms
// are bilinear, so these are exact.
void soft_logic_grad(int op_id, double a, double b, double& da, double& db);

}  // namespace dln

#endif  // DLN_LOGIC_HPP
