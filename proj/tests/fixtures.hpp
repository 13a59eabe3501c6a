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

#ifndef EHOPT_TESTS_FIXTURES_HPP_
#define EHOPT_TESTS_FIXTURES_HPP_

#include <cmath>
#include <random>

#include "ehopt/consumption_model.hpp"

namespace fixtures {

// CC2420-class example constants.
inline ehopt::NodePowerProfile cc2420() {
  ehopt::NodePowerProfile p;
  p.i_t = 17.4;
  p.i_r = 19.7;
  p.i_c = 8.0;
  p.i_s = 0.02;
  p.t_on = 5e-3;
  p.t_data = 10e-3;
  p.t_int = 2e-3;
  p.t_cpu = 5e-3;
  p.k_u = 1.0;
  p.t_rpl = 600.0;
  p.t_v = 4e-3;
  p.e_t = 0.1;
  return p;
}

inline ehopt::TopologyParams sparse() { return {3, 2, 6}; }
inline ehopt::TopologyParams medium() { return {4, 5, 15}; }
inline ehopt::TopologyParams dense() { return {5, 8, 30}; }

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Random valid profile; listen current at least the transmit current so that
// the saturation limit is reachable.
inline ehopt::NodePowerProfile random_profile(std::mt19937_64& rng) {
  ehopt::NodePowerProfile p;
  p.i_t = uniform(rng, 8.0, 25.0);
  p.i_r = p.i_t * uniform(rng, 1.0, 1.5);
  p.i_c = uniform(rng, 1.0, 10.0);
  p.i_s = uniform(rng, 0.001, 0.05);
  p.t_on = uniform(rng, 2e-3, 10e-3);
  p.t_data = uniform(rng, 4e-3, 20e-3);
  p.t_int = p.t_data * uniform(rng, 0.1, 0.9);
  p.t_cpu = uniform(rng, 1e-3, 1e-2);
  p.k_u = std::floor(uniform(rng, 1.0, 4.0));
  p.t_rpl = uniform(rng, 60.0, 3600.0);
  p.t_v = uniform(rng, 1e-3, 5e-3);
  p.e_t = uniform(rng, 0.0, 0.3);
  return p;
}

inline ehopt::TopologyParams random_topology(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nc(0, 12), ni(0, 10);
  ehopt::TopologyParams t;
  t.n_c = nc(rng);
  t.n_i = ni(rng);
  t.n_int = t.n_i + std::uniform_int_distribution<int>(0, 20)(rng);
  return t;
}

// Direct transcription of the per-state current equations.
inline double oracle_output_current(const ehopt::NodePowerProfile& p, const ehopt::TopologyParams& n,
                                    double t_u, double t_dc, double retx) {
  const double f_u = std::isinf(t_u) ? 0.0 : 1.0 / t_u;
  const double f_rpl = std::isinf(p.t_rpl) ? 0.0 : 1.0 / p.t_rpl;
  const double t_tx = t_dc / 2 + p.t_on / 2 + p.t_data + (retx - 1) * t_dc;
  const double r_tx = t_tx * ((1 + n.n_c) * f_u + (2 + n.n_c) * f_rpl);
  const double r_rx = p.t_data * (n.n_c * f_u + (1 + n.n_c + n.n_i) * f_rpl);
  const double r_int = p.t_int * n.n_int * (f_u + f_rpl);
  const double r_cpu = p.t_cpu * p.k_u * f_u;
  const double r_idle = 1 - r_tx - r_rx - r_int - r_cpu;
  const double d_c = p.t_on / t_dc;
  return (p.i_c + p.i_t) * r_tx + (p.i_c + p.i_r) * r_rx + (p.i_c + p.i_r) * r_int + p.i_c * r_cpu +
         (p.i_c + p.i_r) * d_c * r_idle + p.i_s * (1 - d_c) * r_idle;
}

}  // namespace fixtures

#endif  // EHOPT_TESTS_FIXTURES_HPP_
