// Copyright 2026 The ehopt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Average-current model of the bottleneck sensor node. Every operational
// state (TX, RX, INT, CPU, CCA, OFF) contributes i_x * r_x, where r_x is the
// long-run fraction of time spent in the state.

#ifndef EHOPT_CONSUMPTION_MODEL_HPP_
#define EHOPT_CONSUMPTION_MODEL_HPP_

#include <limits>

namespace ehopt {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Currents in mA, times in seconds. t_data already includes CTS and ACK.
struct NodePowerProfile {
  double i_t = 0.0;     // radio TX
  double i_r = 0.0;     // radio RX / CCA
  double i_c = 0.0;     // microprocessor
  double i_s = 0.0;     // sleep
  double t_on = 0.0;    // wake-up / CCA window
  double t_data = 0.0;  // data airtime incl. CTS and ACK
  double t_int = 0.0;   // header decode time, < t_data
  double t_cpu = 0.0;   // CPU time per sensor reading
  double k_u = 1.0;     // readings per packet
  double t_rpl = 0.0;   // trickle period (may be kInfinity)
  double t_v = 0.0;     // vulnerability window
  double e_t = 0.0;     // channel packet error probability

  // Throws InvalidInput when an invariant is violated.
  void validate() const;

  // Copy with every current multiplied by k.
  NodePowerProfile with_scaled_currents(double k) const;

  // Retransmission ratio f_U'/f_U on a collision-free channel.
  double collision_free_retx_ratio() const { return 1.0 / (1.0 - e_t); }
};

struct TopologyParams {
  int n_c = 0;    // children in the bottleneck's subtree
  int n_i = 0;    // interfering nodes
  int n_int = 0;  // interfering packets per generation period

  void validate() const;
};

// Network-wide operating point. t_u may be kInfinity (no data traffic).
struct OperatingPoint {
  double t_u = kInfinity;
  double t_dc = 0.0;

  double f_u() const { return t_u == kInfinity ? 0.0 : 1.0 / t_u; }
  double t_off(double t_on) const { return t_dc - t_on; }
  double duty_cycle(double t_on) const { return t_on / t_dc; }
};

struct StateBudget {
  double i_tx = 0.0;
  double i_rx = 0.0;
  double i_int = 0.0;
  double i_cpu = 0.0;
  double i_cca = 0.0;
  double i_off = 0.0;

  double r_tx = 0.0;
  double r_rx = 0.0;
  double r_int = 0.0;
  double r_cpu = 0.0;
  double r_idle = 0.0;

  double retx_ratio = 1.0;
};

// Per-state currents and time fractions. retx_ratio is f_U'/f_U (>= 1),
// either the collision-free value or the collision fixed point.
// Throws InfeasibleLoad when the busy states exceed the available time and
// InvalidInput on malformed arguments.
StateBudget state_budgets(const NodePowerProfile& profile,
                          const TopologyParams& topo, const OperatingPoint& op,
                          double retx_ratio);

// I_out, the sum of the six state currents.
double total_current(const StateBudget& budget);

// Convenience: total_current(state_budgets(...)).
double output_current(const NodePowerProfile& profile,
                      const TopologyParams& topo, const OperatingPoint& op,
                      double retx_ratio);

}  // namespace ehopt

#endif  // EHOPT_CONSUMPTION_MODEL_HPP_
