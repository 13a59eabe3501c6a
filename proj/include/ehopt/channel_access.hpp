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

// Collision probability of the bottleneck's transmissions under periodic
// traffic with n_i interferers, each picking its transmission instant
// uniformly in [0, 1/f_U'] and colliding within a vulnerability window t_v.

#ifndef EHOPT_CHANNEL_ACCESS_HPP_
#define EHOPT_CHANNEL_ACCESS_HPP_

namespace ehopt {

struct CollisionSolution {
  double e_c = 0.0;        // collision probability
  double e_p = 0.0;        // total packet error probability
  double f_u_prime = 0.0;  // effective transmission rate incl. retransmissions
  bool feasible = true;

  // f_U'/f_U, the factor fed to the consumption model. Only meaningful when
  // feasible.
  double retx_ratio() const { return 1.0 / (1.0 - e_p); }
};

struct FeasibilityLimit {
  double limit = 0.0;     // upper bound on f_U * t_v
  double e_c_max = 0.0;   // argmax of g3 over e_c
};

// Rate implied by a collision probability: [1 - (1-e_c)^(1/n_i)] / t_v.
double g1(double e_c, double t_v, int n_i);

// Rate implied by the retransmission process: f_U / (1 - e_p).
// Throws Saturated when e_p >= 1.
double g2(double e_c, double e_t, double f_u);

// Smallest root of g1 = g2, found by bisection on [0, e_c_max]. When the
// channel cannot host the offered load the result has feasible == false,
// e_c = e_p = 1 and f_u_prime = +inf.
CollisionSolution solve_fixed_point(double f_u, double t_v, double e_t, int n_i);

// Closed-form approximation (1 - sqrt(Delta)) / 2 from a first-order
// expansion of (1-x)^(1/n_i). Throws NoRealSolution when Delta < 0.
double approx_collision_probability(double f_u, double t_v, double e_t, int n_i);

// Largest f_U * t_v for which the fixed point exists.
FeasibilityLimit feasibility_limit(double e_t, int n_i);

}  // namespace ehopt

#endif  // EHOPT_CHANNEL_ACCESS_HPP_
