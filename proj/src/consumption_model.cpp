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

#include "ehopt/consumption_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ehopt/errors.hpp"

namespace ehopt {
namespace {

constexpr double kIdleClampTolerance = 1e-12;

double rate_of(double period) { return period == kInfinity ? 0.0 : 1.0 / period; }

void require(bool ok, const char* what) {
  if (!ok) fail(ErrorCode::kInvalidInput, what);
}

}  // namespace

void NodePowerProfile::validate() const {
  require(i_t > 0 && i_r > 0 && i_c > 0 && i_s > 0, "profile: currents must be > 0");
  require(i_s < std::min({i_t, i_r, i_c}), "profile: i_s must be below i_t, i_r and i_c");
  require(t_on > 0 && t_data > 0 && t_int > 0 && t_cpu > 0 && t_rpl > 0 && t_v > 0,
          "profile: times must be > 0");
  require(t_int < t_data, "profile: t_int must be < t_data");
  require(k_u >= 1.0, "profile: k_u must be >= 1");
  require(e_t >= 0.0 && e_t < 1.0, "profile: e_t must be in [0,1)");
}

NodePowerProfile NodePowerProfile::with_scaled_currents(double k) const {
  NodePowerProfile p = *this;
  p.i_t *= k;
  p.i_r *= k;
  p.i_c *= k;
  p.i_s *= k;
  return p;
}

void TopologyParams::validate() const {
  require(n_c >= 0 && n_i >= 0 && n_int >= 0, "topology: counts must be >= 0");
}

StateBudget state_budgets(const NodePowerProfile& profile,
                          const TopologyParams& topo, const OperatingPoint& op,
                          double retx_ratio) {
  const auto& p = profile;
  require(op.t_u > 0, "operating point: t_u must be > 0");
  require(op.t_dc > 0 && std::isfinite(op.t_dc), "operating point: t_dc must be finite and > 0");
  require(op.t_dc >= p.t_on * (1.0 - 1e-12), "operating point: t_dc must be >= t_on");
  require(p.t_on > 0 && p.t_data > 0 && p.t_int > 0 && p.t_cpu > 0 && p.t_rpl > 0,
          "profile: times must be > 0");
  require(retx_ratio >= 1.0, "retransmission ratio must be >= 1");

  const double f_u = op.f_u();
  const double f_rpl = rate_of(p.t_rpl);
  const double t_dc = std::max(op.t_dc, p.t_on);
  const double n_c = topo.n_c;
  const double n_i = topo.n_i;
  const double n_int = topo.n_int;

  StateBudget b;
  b.retx_ratio = retx_ratio;

  const double t_tx = t_dc / 2 + p.t_on / 2 + p.t_data + (retx_ratio - 1.0) * t_dc;
  const double f_tx = (1 + n_c) * f_u + (2 + n_c) * f_rpl;
  const double f_rx = n_c * f_u + (1 + n_c + n_i) * f_rpl;
  const double f_int = n_int * (f_u + f_rpl);

  b.r_tx = t_tx * f_tx;
  b.r_rx = p.t_data * f_rx;
  b.r_int = p.t_int * f_int;
  b.r_cpu = p.t_cpu * p.k_u * f_u;
  double idle = 1.0 - b.r_tx - b.r_rx - b.r_int - b.r_cpu;
  if (idle < -kIdleClampTolerance) {
    std::ostringstream os;
    os << "radio saturated: r_IDLE = " << idle << " < 0";
    fail(ErrorCode::kInfeasibleLoad, os.str());
  }
  b.r_idle = std::max(idle, 0.0);

  const double d_c = p.t_on / t_dc;
  b.i_tx = (p.i_c + p.i_t) * b.r_tx;
  b.i_rx = (p.i_c + p.i_r) * b.r_rx;
  b.i_int = (p.i_c + p.i_r) * b.r_int;
  b.i_cpu = p.i_c * b.r_cpu;
  b.i_cca = (p.i_c + p.i_r) * d_c * b.r_idle;
  b.i_off = p.i_s * (1.0 - d_c) * b.r_idle;
  return b;
}

double total_current(const StateBudget& b) {
  return b.i_tx + b.i_rx + b.i_int + b.i_cpu + b.i_cca + b.i_off;
}

double output_current(const NodePowerProfile& profile, const TopologyParams& topo,
                      const OperatingPoint& op, double retx_ratio) {
  return total_current(state_budgets(profile, topo, op, retx_ratio));
}

}  // namespace ehopt
