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

// Optimal network operating point for a current budget u. The collision-free
// problem has a closed form obtained by writing I_out as
//
//   I_out(t_U, t_dc) = d1 t_dc/t_U + d2/t_U + d3 t_dc + d4 + d5/t_dc
//                      + d6/(t_dc t_U)
//
// minimising over t_dc and inverting I_out = u for t_U. Collisions are folded
// in afterwards by rigidly translating the closed-form locus onto the
// numerical solution at u_max.

#ifndef EHOPT_OPERATING_POINT_HPP_
#define EHOPT_OPERATING_POINT_HPP_

#include <array>
#include <vector>

#include "ehopt/consumption_model.hpp"

namespace ehopt {

// Coefficient groups, 1-based to match their conventional numbering; index 0
// is unused except for e and f, which start at 0.
struct CoefficientSet {
  std::array<double, 12> a{};
  std::array<double, 16> b{};
  std::array<double, 6> c{};
  std::array<double, 7> d{};
  std::array<double, 4> f{};  // t_dc^lim cubic, f[k] multiplies t_dc^k
  double t_on = 0.0;

  // e0/t_U^2 + e1/t_U + e2 = 0 for a given budget u; e[k] at index k.
  std::array<double, 3> e(double u) const;

  // I_out and r_IDLE in coefficient form (t_u may be kInfinity).
  double output_current(double t_u, double t_dc) const;
  double idle_fraction(double t_u, double t_dc) const;
};

struct ControlRange {
  double u_min = 0.0;
  double u_max = 0.0;
  double t_u_lim = 0.0;
  double t_dc_lim = 0.0;
  double t_dc_min = 0.0;
};

// Collision-free coefficients (retransmission factor e_t/(1-e_t)).
// t_rpl may be infinite. Throws InvalidInput on a degenerate profile.
CoefficientSet derive_coefficients(const NodePowerProfile& profile,
                                   const TopologyParams& topo);

// argmin over t_dc of I_out at fixed t_U, clamped below at t_on.
double optimal_tdc(const CoefficientSet& coeffs, double t_u);

// Throws NoFeasibleLimit when the saturation cubic has no admissible root
// at or above t_on, InvalidInput when u_min is undefined (t_rpl infinite).
ControlRange control_bounds(const CoefficientSet& coeffs);

// Closed-form P1 solution. Throws NumericalFailure if no admissible root of
// the quadratic exists inside [u_min, u_max].
OperatingPoint solve_p1_closed_form(const CoefficientSet& coeffs,
                                    const ControlRange& range, double u);
OperatingPoint solve_p1_closed_form(const CoefficientSet& coeffs, double u);

struct NumericalOptions {
  double time_tolerance = 1e-9;  // s
  int max_iterations = 200;
};

// Two nested dichotomic searches: inner over t_dc (minimise I_out at fixed
// t_U subject to r_IDLE >= 0), outer over t_U (smallest t_U whose minimum
// current does not exceed u). With collisions the retransmission ratio comes
// from the collision fixed point at each candidate t_U.
// Throws Infeasible when no candidate point is channel-feasible.
OperatingPoint solve_p1_numerical(const NodePowerProfile& profile,
                                  const TopologyParams& topo, double u,
                                  bool with_collisions,
                                  const NumericalOptions& opts = {});

// Retransmission ratio f_U'/f_U the numerical solver uses at t_u.
// Returns a value < 1 when the channel is infeasible.
double retx_ratio_at(const NodePowerProfile& profile, const TopologyParams& topo,
                     double t_u, bool with_collisions);

// Closed form translated by a constant (dt_U, dt_dc) so that it coincides
// with the numerical collision-aware solution at u_max.
class CorrectedSolver {
 public:
  CorrectedSolver(const NodePowerProfile& profile, const TopologyParams& topo);

  OperatingPoint operator()(double u) const;

  const CoefficientSet& coefficients() const { return coeffs_; }
  const ControlRange& range() const { return range_; }
  double delta_t_u() const { return delta_t_u_; }
  double delta_t_dc() const { return delta_t_dc_; }
  const OperatingPoint& anchor() const { return anchor_; }

 private:
  CoefficientSet coeffs_;
  ControlRange range_;
  OperatingPoint anchor_;
  double delta_t_u_ = 0.0;
  double delta_t_dc_ = 0.0;
};

// r(u) = 1/t_U*(u), sampled and linearly interpolated. Zero below u_min,
// flat at r(u_max) above u_max.
class RewardCurve {
 public:
  RewardCurve() = default;
  RewardCurve(std::vector<double> u, std::vector<double> r);

  double operator()(double u) const;

  double u_min() const { return u_.front(); }
  double u_max() const { return u_.back(); }
  double r_max() const { return r_.back(); }
  const std::vector<double>& u_samples() const { return u_; }
  const std::vector<double>& r_samples() const { return r_; }

 private:
  std::vector<double> u_;
  std::vector<double> r_;
};

// Samples r on u_grid (must be increasing and span [u_min, u_max]).
RewardCurve reward_curve(const CorrectedSolver& solver,
                         const std::vector<double>& u_grid);

// Uniform grid of n >= 2 points on [u_min, u_max].
std::vector<double> uniform_grid(double lo, double hi, int n);

}  // namespace ehopt

#endif  // EHOPT_OPERATING_POINT_HPP_
