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

#ifndef EHOPT_CMDP_SOLVER_HPP_
#define EHOPT_CMDP_SOLVER_HPP_

#include <optional>
#include <string>
#include <vector>

#include "ehopt/energy_source.hpp"
#include "ehopt/operating_point.hpp"

namespace ehopt {

double clamp_buffer(double x_b, double delta, double b_max);

// Time spent with a linearly varying buffer above zero / below b_th during a
// stage of length t whose net charge change is d (mAh).
double time_above_zero(double d, double t, double x_b);
double time_below_threshold(double d, double t, double x_b, double b_th);

struct BatteryConfig {
  double b_max = 250.0;  // mAh
  double b_th = 50.0;    // mAh
  int n_b = 200;         // grid nodes j * b_max / (n_b - 1)

  void validate() const;
  double step() const { return b_max / (n_b - 1); }
  double level(int j) const { return j * step(); }
  // Floor bin of a battery level.
  int bin(double x_b) const;
};

struct SolverConfig {
  double alpha = 0.9;
  std::optional<double> c_th;   // s
  std::optional<double> t_out;  // converted with the mean stage duration
  int n_u = 64;
  double eps_lambda = 1e-4;
  double eps_vi = 1e-6;         // relative to the per-stage value scale
  int max_vi_iterations = 100000;
  int max_power_iterations = 1000000;
  double lambda_cap = 1099511627776.0;  // 2^40
  int quadrature_nodes = 64;    // per axis for stage reward and cost
  DeltaOptions delta;

  void validate() const;
  double resolve_c_th(double mean_stage_duration) const;
};

double outage_to_cost(double t_out, double alpha, double mean_stage_duration);
double cost_to_outage(double c_th, double alpha, double mean_stage_duration);

// Expected time above zero and below b_th over one stage from (s, x_b).
struct StageTimes {
  double above_zero = 0.0;
  double below_threshold = 0.0;
};

StageTimes stage_times(const EnergySourceModel& model, int s, double x_b, double u,
                       double b_th, int nodes = 64,
                       const ShadingMixture& mixture = ShadingMixture::none());

double stage_reward(const EnergySourceModel& model, int s, double x_b, double u,
                    const RewardCurve& curve, int nodes = 64,
                    const ShadingMixture& mixture = ShadingMixture::none());

double stage_cost(const EnergySourceModel& model, int s, double x_b, double u,
                  const BatteryConfig& battery, int nodes = 64,
                  const ShadingMixture& mixture = ShadingMixture::none());

// Transition weights onto battery nodes of a charge change distributed as
// `delta` from level x_b, with linear interpolation between nodes and mass
// outside [0, b_max] lumped onto the end nodes.
std::vector<double> battery_transition_row(const ChargeDeltaPdf& delta, double x_b,
                                           const BatteryConfig& battery);

// Discretized problem. Arrays are flattened row-major in the bracketed order.
struct DiscreteCmdp {
  int n_s = 0;
  int n_b = 0;
  int n_u = 0;
  std::vector<double> battery;                  // [j] mAh
  std::vector<double> controls;                 // [u] mA
  std::vector<std::vector<double>> source;      // [s][s']
  std::vector<double> reward;                   // [s][j][u]
  std::vector<double> cost;                     // [s][j][u]
  std::vector<double> kernel;                   // [s][u][j][k]
  double value_scale = 1.0;                     // r_max * T
  double cost_scale = 1.0;                      // max stage duration
  double b_th = 0.0;                            // mAh, carried into policies

  void validate() const;
  std::size_t sju(int s, int j, int u) const {
    return (static_cast<std::size_t>(s) * n_b + j) * n_u + u;
  }
  const double* kernel_row(int s, int u, int j) const {
    return kernel.data() + ((static_cast<std::size_t>(s) * n_u + u) * n_b + j) * n_b;
  }
};

DiscreteCmdp build_cmdp(const EnergySourceModel& model, const RewardCurve& curve,
                        const BatteryConfig& battery, const SolverConfig& config,
                        const ShadingMixture& mixture = ShadingMixture::none());

// Control index per [s][j].
using PurePolicy = std::vector<int>;

struct ValueResult {
  std::vector<double> value;   // [s][j]
  PurePolicy policy;
  int iterations = 0;
  std::vector<double> deltas;  // sup-norm change per sweep
};

ValueResult value_iteration(const DiscreteCmdp& cmdp, double lambda, double alpha,
                            double tolerance, int max_iterations = 100000);

std::vector<double> policy_cost(const DiscreteCmdp& cmdp, const PurePolicy& policy,
                                double alpha, double tolerance,
                                int max_iterations = 100000);

// Default start: stationary source law times a uniform battery.
std::vector<double> steady_state(const DiscreteCmdp& cmdp, const PurePolicy& policy,
                                 const std::vector<double>* initial = nullptr,
                                 double tolerance = 1e-10, int max_iterations = 1000000);

// One application of the policy-induced kernel.
std::vector<double> propagate(const DiscreteCmdp& cmdp, const PurePolicy& policy,
                              const std::vector<double>& dist);

double expected_cost(const std::vector<double>& dist, const std::vector<double>& cost);

struct MixedPolicy {
  int n_s = 0;
  BatteryConfig battery;
  std::vector<double> u_minus;  // [s][j] mA, used with probability p
  std::vector<double> u_plus;   // [s][j] mA
  double p = 1.0;
  double lambda_minus = 0.0;
  double lambda_plus = 0.0;
  double alpha = 0.0;
  double c_th = 0.0;
  double cost_minus = 0.0;
  double cost_plus = 0.0;

  double control(bool use_minus, int s, double x_b) const;
};

struct LagrangeStep {
  double lambda;
  double cost;
};

struct P2Result {
  MixedPolicy policy;
  PurePolicy pure_minus;
  PurePolicy pure_plus;
  std::vector<LagrangeStep> trace;
  int iterations = 0;
};

P2Result solve_p2(const DiscreteCmdp& cmdp, const SolverConfig& config, double c_th);

// Policy directory: mixed_policy.csv plus map_minus.csv and map_plus.csv.
void save_policy(const MixedPolicy& policy, const std::string& dir);
MixedPolicy load_policy(const std::string& dir);

}  // namespace ehopt

#endif  // EHOPT_CMDP_SOLVER_HPP_
