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

#include "ehopt/cmdp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "ehopt/errors.hpp"

namespace ehopt {
namespace {

constexpr double kSecondsPerHour = 3600.0;

struct JointNode {
  double t;
  double i;
  double w;
};

// Midpoint nodes of a current histogram with any bin straddling `split` cut
// there. Time above zero jumps at iota = u when the buffer starts empty, and a
// midpoint rule across the jump is only first-order accurate.
std::vector<Histogram::Node> split_nodes(const Histogram& h, int n, double split) {
  const auto& e = h.edges();
  const auto& m = h.masses();
  const int per_bin = std::max(1, n / static_cast<int>(m.size()));
  std::vector<Histogram::Node> out;
  auto fill = [&](double a, double b, double mass) {
    if (mass == 0.0) return;
    if (b == a) {
      out.push_back({a, mass});
      return;
    }
    for (int k = 0; k < per_bin; ++k) out.push_back({a + (b - a) * (k + 0.5) / per_bin, mass / per_bin});
  };
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double a = e[i], b = e[i + 1];
    if (a < split && split < b) {
      const double left = m[i] * (split - a) / (b - a);
      fill(a, split, left);
      fill(split, b, m[i] - left);
    } else {
      fill(a, b, m[i]);
    }
  }
  return out;
}

std::vector<JointNode> joint_nodes(const EnergySourceModel& model, int s, int n,
                                   const ShadingMixture& mixture, double u) {
  const SourceState& st = model.state(s);
  std::vector<JointNode> out;
  const auto taus = st.duration.nodes(n);
  for (std::size_t k = 0; k < mixture.scale.size(); ++k) {
    if (mixture.weight[k] == 0.0) continue;
    const auto iotas = split_nodes(st.current.scaled(mixture.scale[k]), n, u);
    for (const auto& t : taus) {
      for (const auto& i : iotas) out.push_back({t.x, i.x, mixture.weight[k] * t.w * i.w});
    }
  }
  return out;
}

StageTimes integrate_times(const std::vector<JointNode>& nodes, double x_b, double u, double b_th) {
  StageTimes out;
  for (const auto& n : nodes) {
    const double d = n.t * (n.i - u) / kSecondsPerHour;
    out.above_zero += n.w * time_above_zero(d, n.t, x_b);
    out.below_threshold += n.w * time_below_threshold(d, n.t, x_b, b_th);
  }
  return out;
}

// Adds mass uniformly spread on [y0, y1] (a point when equal) onto the hat
// functions of nodes 0..n-1 with spacing h.
void spread_on_hats(double y0, double y1, double mass, double h, int n, double* row) {
  const double top = h * (n - 1);
  auto point = [&](double y, double m) {
    if (y <= 0.0) {
      row[0] += m;
      return;
    }
    if (y >= top) {
      row[n - 1] += m;
      return;
    }
    const int c = std::min(static_cast<int>(y / h), n - 2);
    const double xi = y / h - c;
    row[c] += m * (1.0 - xi);
    row[c + 1] += m * xi;
  };
  const double width = y1 - y0;
  if (!(width > 1e-12 * h)) {
    point(0.5 * (y0 + y1), mass);
    return;
  }
  const double density = mass / width;
  if (y0 < 0.0) row[0] += density * (std::min(y1, 0.0) - y0);
  if (y1 > top) row[n - 1] += density * (y1 - std::max(y0, top));
  const double a = std::max(y0, 0.0);
  const double b = std::min(y1, top);
  if (!(b > a)) return;
  int c = std::min(static_cast<int>(a / h), n - 2);
  while (c <= n - 2) {
    const double left = std::max(a, c * h);
    const double right = std::min(b, (c + 1) * h);
    if (right > left) {
      const double xa = left / h - c;
      const double xb = right / h - c;
      const double part = density * (right - left);
      const double upper = density * h * 0.5 * (xb * xb - xa * xa);
      row[c] += part - upper;
      row[c + 1] += upper;
    }
    if ((c + 1) * h >= b) break;
    ++c;
  }
}

void transition_row_into(const ChargeDeltaPdf& delta, double x_b, double h, int n, double* row) {
  std::fill(row, row + n, 0.0);
  const auto& e = delta.edges();
  const auto& m = delta.masses();
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] == 0.0) continue;
    spread_on_hats(x_b + e[i], x_b + e[i + 1], m[i], h, n, row);
  }
}

double dot(const double* a, const double* b, int n) {
  double s = 0.0;
  for (int k = 0; k < n; ++k) s += a[k] * b[k];
  return s;
}

// Jbar[s][k] = sum_s' p(s, s') J[s'][k].
void source_average(const DiscreteCmdp& c, const std::vector<double>& j, std::vector<double>& out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (int s = 0; s < c.n_s; ++s) {
    for (int t = 0; t < c.n_s; ++t) {
      const double p = c.source[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)];
      if (p == 0.0) continue;
      for (int k = 0; k < c.n_b; ++k) {
        out[static_cast<std::size_t>(s) * c.n_b + k] += p * j[static_cast<std::size_t>(t) * c.n_b + k];
      }
    }
  }
}

}  // namespace

double clamp_buffer(double x_b, double delta, double b_max) {
  return std::min(std::max(x_b + delta, 0.0), b_max);
}

double time_above_zero(double d, double t, double x_b) {
  if (d >= 0.0) return t;
  return std::min(-x_b * t / d, t);
}

double time_below_threshold(double d, double t, double x_b, double b_th) {
  if (d > 0.0) return std::max(0.0, std::min((b_th - x_b) * t / d, t));
  if (d == 0.0) return x_b < b_th ? t : 0.0;
  return std::min(std::max(0.0, (1.0 - (b_th - x_b) / d) * t), t);
}

void BatteryConfig::validate() const {
  if (!(b_max > 0.0)) fail(ErrorCode::kInvalidInput, "battery: b_max must be > 0");
  if (!(b_th > 0.0) || b_th > b_max) fail(ErrorCode::kInvalidInput, "battery: need 0 < b_th <= b_max");
  if (n_b < 16) fail(ErrorCode::kInvalidInput, "battery: n_b must be >= 16");
}

int BatteryConfig::bin(double x_b) const {
  const int j = static_cast<int>(std::floor(x_b / step() + 1e-9));
  return std::clamp(j, 0, n_b - 1);
}

void SolverConfig::validate() const {
  if (!(alpha >= 0.0) || !(alpha < 1.0)) fail(ErrorCode::kInvalidInput, "solver: alpha must be in [0,1)");
  if (c_th && t_out) fail(ErrorCode::kInvalidInput, "solver: c_th and t_out are mutually exclusive");
  if (!c_th && !t_out) fail(ErrorCode::kInvalidInput, "solver: one of c_th or t_out is required");
  if (c_th && !(*c_th >= 0.0)) fail(ErrorCode::kInvalidInput, "solver: c_th must be >= 0");
  if (t_out && (!(*t_out >= 0.0) || !(*t_out < 1.0))) {
    fail(ErrorCode::kInvalidInput, "solver: t_out must be in [0,1)");
  }
  if (n_u < 2) fail(ErrorCode::kInvalidInput, "solver: n_u must be >= 2");
  if (!(eps_lambda > 0.0) || !(eps_vi > 0.0)) fail(ErrorCode::kInvalidInput, "solver: tolerances must be > 0");
  if (max_vi_iterations < 1 || max_power_iterations < 1 || quadrature_nodes < 1) {
    fail(ErrorCode::kInvalidInput, "solver: iteration counts must be >= 1");
  }
  if (!(lambda_cap >= 1.0)) fail(ErrorCode::kInvalidInput, "solver: lambda_cap must be >= 1");
}

double SolverConfig::resolve_c_th(double mean_stage_duration) const {
  if (c_th) return *c_th;
  if (t_out) return outage_to_cost(*t_out, alpha, mean_stage_duration);
  fail(ErrorCode::kInvalidInput, "solver: one of c_th or t_out is required");
}

double outage_to_cost(double t_out, double alpha, double mean_stage_duration) {
  if (!(alpha < 1.0) || !(mean_stage_duration > 0.0)) {
    fail(ErrorCode::kInvalidInput, "outage_to_cost: need alpha < 1 and T > 0");
  }
  return t_out * mean_stage_duration / (1.0 - alpha);
}

double cost_to_outage(double c_th, double alpha, double mean_stage_duration) {
  if (!(alpha < 1.0) || !(mean_stage_duration > 0.0)) {
    fail(ErrorCode::kInvalidInput, "cost_to_outage: need alpha < 1 and T > 0");
  }
  return c_th * (1.0 - alpha) / mean_stage_duration;
}

StageTimes stage_times(const EnergySourceModel& model, int s, double x_b, double u, double b_th,
                       int nodes, const ShadingMixture& mixture) {
  mixture.validate();
  return integrate_times(joint_nodes(model, s, nodes, mixture, u), x_b, u, b_th);
}

double stage_reward(const EnergySourceModel& model, int s, double x_b, double u,
                    const RewardCurve& curve, int nodes, const ShadingMixture& mixture) {
  const double r = curve(u);
  if (r == 0.0) return 0.0;
  return r * stage_times(model, s, x_b, u, 0.0, nodes, mixture).above_zero;
}

double stage_cost(const EnergySourceModel& model, int s, double x_b, double u,
                  const BatteryConfig& battery, int nodes, const ShadingMixture& mixture) {
  return stage_times(model, s, x_b, u, battery.b_th, nodes, mixture).below_threshold;
}

std::vector<double> battery_transition_row(const ChargeDeltaPdf& delta, double x_b,
                                           const BatteryConfig& battery) {
  std::vector<double> row(static_cast<std::size_t>(battery.n_b));
  transition_row_into(delta, x_b, battery.step(), battery.n_b, row.data());
  return row;
}

void DiscreteCmdp::validate() const {
  if (n_s < 1 || n_b < 2 || n_u < 1) fail(ErrorCode::kInvalidInput, "cmdp: empty dimensions");
  const auto ns = static_cast<std::size_t>(n_s);
  const auto nb = static_cast<std::size_t>(n_b);
  const auto nu = static_cast<std::size_t>(n_u);
  if (battery.size() != nb || controls.size() != nu || source.size() != ns ||
      reward.size() != ns * nb * nu || cost.size() != ns * nb * nu || kernel.size() != ns * nu * nb * nb) {
    fail(ErrorCode::kInvalidInput, "cmdp: array sizes do not match dimensions");
  }
  for (const auto& row : source) {
    if (row.size() != ns) fail(ErrorCode::kInvalidInput, "cmdp: source matrix must be square");
    const double sum = std::accumulate(row.begin(), row.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-9) fail(ErrorCode::kInvalidInput, "cmdp: source rows must sum to 1");
  }
  for (std::size_t r = 0; r < ns * nu * nb; ++r) {
    double sum = 0.0;
    for (std::size_t k = 0; k < nb; ++k) sum += kernel[r * nb + k];
    if (std::abs(sum - 1.0) > 1e-9) fail(ErrorCode::kInvalidInput, "cmdp: kernel rows must sum to 1");
  }
}

DiscreteCmdp build_cmdp(const EnergySourceModel& model, const RewardCurve& curve,
                        const BatteryConfig& battery, const SolverConfig& config,
                        const ShadingMixture& mixture) {
  battery.validate();
  config.validate();
  mixture.validate();
  DiscreteCmdp c;
  c.n_s = model.n_states();
  c.n_b = battery.n_b;
  c.n_u = config.n_u;
  c.controls = uniform_grid(curve.u_min(), curve.u_max(), config.n_u);
  c.source = model.transition_matrix();
  for (int j = 0; j < c.n_b; ++j) c.battery.push_back(battery.level(j));
  c.battery.back() = battery.b_max;
  const auto ns = static_cast<std::size_t>(c.n_s);
  const auto nb = static_cast<std::size_t>(c.n_b);
  const auto nu = static_cast<std::size_t>(c.n_u);
  c.reward.assign(ns * nb * nu, 0.0);
  c.cost.assign(ns * nb * nu, 0.0);
  c.kernel.assign(ns * nu * nb * nb, 0.0);

  double t_max = 0.0;
  for (int s = 0; s < c.n_s; ++s) t_max = std::max(t_max, model.state(s).duration.hi());
  c.value_scale = std::max(curve.r_max(), 1e-300) * model.mean_stage_duration();
  c.cost_scale = t_max;
  c.b_th = battery.b_th;

  for (int s = 0; s < c.n_s; ++s) {
    for (int u = 0; u < c.n_u; ++u) {
      const double uc = c.controls[static_cast<std::size_t>(u)];
      const auto nodes = joint_nodes(model, s, config.quadrature_nodes, mixture, uc);
      const double r = curve(uc);
      const ChargeDeltaPdf delta = mixture.scale.size() == 1 && mixture.scale[0] == 1.0
                                       ? charge_delta_pdf(model, s, uc, config.delta)
                                       : mixture_delta_pdf(model, mixture, s, uc, config.delta);
      for (int j = 0; j < c.n_b; ++j) {
        const double xb = c.battery[static_cast<std::size_t>(j)];
        const StageTimes t = integrate_times(nodes, xb, uc, battery.b_th);
        c.reward[c.sju(s, j, u)] = r * t.above_zero;
        c.cost[c.sju(s, j, u)] = t.below_threshold;
        transition_row_into(delta, xb, battery.step(), c.n_b,
                            c.kernel.data() + ((static_cast<std::size_t>(s) * nu + u) * nb + j) * nb);
      }
    }
  }
  return c;
}

ValueResult value_iteration(const DiscreteCmdp& c, double lambda, double alpha, double tolerance,
                            int max_iterations) {
  if (!(lambda >= 0.0)) fail(ErrorCode::kInvalidInput, "value_iteration: lambda must be >= 0");
  if (!(alpha >= 0.0) || !(alpha < 1.0)) fail(ErrorCode::kInvalidInput, "value_iteration: alpha in [0,1)");
  const std::size_t n = static_cast<std::size_t>(c.n_s) * c.n_b;
  ValueResult out;
  out.value.assign(n, 0.0);
  out.policy.assign(n, 0);
  std::vector<double> next(n), avg(n), q(static_cast<std::size_t>(c.n_u));
  for (int it = 1; it <= max_iterations; ++it) {
    source_average(c, out.value, avg);
    double delta = 0.0;
    for (int s = 0; s < c.n_s; ++s) {
      const double* jbar = avg.data() + static_cast<std::size_t>(s) * c.n_b;
      for (int j = 0; j < c.n_b; ++j) {
        double best = -std::numeric_limits<double>::infinity();
        for (int u = 0; u < c.n_u; ++u) {
          const std::size_t i = c.sju(s, j, u);
          q[static_cast<std::size_t>(u)] =
              c.reward[i] - lambda * c.cost[i] + alpha * dot(c.kernel_row(s, u, j), jbar, c.n_b);
          best = std::max(best, q[static_cast<std::size_t>(u)]);
        }
        // First maximiser, ignoring differences at rounding level.
        const double tie = 1e-12 * std::max(std::abs(best), c.value_scale);
        int arg = 0;
        while (q[static_cast<std::size_t>(arg)] < best - tie) ++arg;
        const std::size_t x = static_cast<std::size_t>(s) * c.n_b + j;
        next[x] = best;
        out.policy[x] = arg;
        delta = std::max(delta, std::abs(best - out.value[x]));
      }
    }
    out.value.swap(next);
    out.deltas.push_back(delta);
    out.iterations = it;
    if (delta < tolerance) return out;
  }
  fail(ErrorCode::kNonConvergence, "value_iteration: no convergence within the iteration cap");
}

std::vector<double> policy_cost(const DiscreteCmdp& c, const PurePolicy& policy, double alpha,
                                double tolerance, int max_iterations) {
  const std::size_t n = static_cast<std::size_t>(c.n_s) * c.n_b;
  if (policy.size() != n) fail(ErrorCode::kInvalidInput, "policy_cost: policy size mismatch");
  std::vector<double> j(n, 0.0), next(n), avg(n);
  for (int it = 0; it < max_iterations; ++it) {
    source_average(c, j, avg);
    double delta = 0.0;
    for (int s = 0; s < c.n_s; ++s) {
      const double* jbar = avg.data() + static_cast<std::size_t>(s) * c.n_b;
      for (int b = 0; b < c.n_b; ++b) {
        const std::size_t x = static_cast<std::size_t>(s) * c.n_b + b;
        const int u = policy[x];
        next[x] = c.cost[c.sju(s, b, u)] + alpha * dot(c.kernel_row(s, u, b), jbar, c.n_b);
        delta = std::max(delta, std::abs(next[x] - j[x]));
      }
    }
    j.swap(next);
    if (delta < tolerance) return j;
  }
  fail(ErrorCode::kNonConvergence, "policy_cost: no convergence within the iteration cap");
}

std::vector<double> propagate(const DiscreteCmdp& c, const PurePolicy& policy,
                              const std::vector<double>& dist) {
  std::vector<double> out(dist.size(), 0.0);
  for (int s = 0; s < c.n_s; ++s) {
    for (int b = 0; b < c.n_b; ++b) {
      const std::size_t x = static_cast<std::size_t>(s) * c.n_b + b;
      const double m = dist[x];
      if (m == 0.0) continue;
      const double* row = c.kernel_row(s, policy[x], b);
      for (int t = 0; t < c.n_s; ++t) {
        const double p = c.source[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)] * m;
        if (p == 0.0) continue;
        double* dst = out.data() + static_cast<std::size_t>(t) * c.n_b;
        for (int k = 0; k < c.n_b; ++k) dst[k] += p * row[k];
      }
    }
  }
  return out;
}

std::vector<double> steady_state(const DiscreteCmdp& c, const PurePolicy& policy,
                                 const std::vector<double>* initial, double tolerance,
                                 int max_iterations) {
  const std::size_t n = static_cast<std::size_t>(c.n_s) * c.n_b;
  if (policy.size() != n) fail(ErrorCode::kInvalidInput, "steady_state: policy size mismatch");
  std::vector<double> dist;
  if (initial) {
    if (initial->size() != n) fail(ErrorCode::kInvalidInput, "steady_state: initial size mismatch");
    dist = *initial;
  } else {
    // Stationary law of the source chain by power iteration on the small matrix.
    std::vector<double> pi(static_cast<std::size_t>(c.n_s), 1.0 / c.n_s);
    for (int it = 0; it < 100000; ++it) {
      std::vector<double> nx(pi.size(), 0.0);
      for (std::size_t s = 0; s < pi.size(); ++s) {
        for (std::size_t t = 0; t < pi.size(); ++t) nx[t] += 0.5 * pi[s] * c.source[s][t];
        nx[s] += 0.5 * pi[s];
      }
      double d = 0.0;
      for (std::size_t s = 0; s < pi.size(); ++s) d += std::abs(nx[s] - pi[s]);
      pi.swap(nx);
      if (d < 1e-15) break;
    }
    dist.resize(n);
    for (int s = 0; s < c.n_s; ++s) {
      for (int b = 0; b < c.n_b; ++b) dist[static_cast<std::size_t>(s) * c.n_b + b] = pi[static_cast<std::size_t>(s)] / c.n_b;
    }
  }
  // Lazy iteration P <- (P + K P)/2 has the same fixed points and cannot
  // oscillate on periodic source chains.
  for (int it = 0; it < max_iterations; ++it) {
    const std::vector<double> moved = propagate(c, policy, dist);
    double change = 0.0;
    for (std::size_t x = 0; x < n; ++x) change += std::abs(moved[x] - dist[x]);
    if (change < tolerance) return moved;
    for (std::size_t x = 0; x < n; ++x) dist[x] = 0.5 * (dist[x] + moved[x]);
  }
  fail(ErrorCode::kNonConvergence, "steady_state: no convergence within the iteration cap");
}

double expected_cost(const std::vector<double>& dist, const std::vector<double>& cost) {
  if (dist.size() != cost.size()) fail(ErrorCode::kInvalidInput, "expected_cost: size mismatch");
  return std::inner_product(dist.begin(), dist.end(), cost.begin(), 0.0);
}

double MixedPolicy::control(bool use_minus, int s, double x_b) const {
  if (s < 0 || s >= n_s) fail(ErrorCode::kInvalidInput, "policy: source state out of range");
  const auto& map = use_minus ? u_minus : u_plus;
  return map[static_cast<std::size_t>(s) * battery.n_b + battery.bin(x_b)];
}

P2Result solve_p2(const DiscreteCmdp& c, const SolverConfig& config, double c_th) {
  config.validate();
  c.validate();
  if (!(c_th >= 0.0)) fail(ErrorCode::kInvalidInput, "solve_p2: c_th must be >= 0");
  const double alpha = config.alpha;
  const double cost_tol = config.eps_vi * c.cost_scale;

  P2Result out;
  struct Eval {
    double lambda;
    double cost;
    PurePolicy policy;
  };
  auto evaluate = [&](double lambda) {
    const double tol = config.eps_vi * (c.value_scale + lambda * c.cost_scale);
    ValueResult vr = value_iteration(c, lambda, alpha, tol, config.max_vi_iterations);
    const auto jc = policy_cost(c, vr.policy, alpha, cost_tol, config.max_vi_iterations);
    const auto dist = steady_state(c, vr.policy, nullptr, 1e-10, config.max_power_iterations);
    Eval e{lambda, expected_cost(dist, jc), std::move(vr.policy)};
    out.trace.push_back({lambda, e.cost});
    ++out.iterations;
    return e;
  };
  auto to_controls = [&](const PurePolicy& p) {
    std::vector<double> u(p.size());
    for (std::size_t x = 0; x < p.size(); ++x) u[x] = c.controls[static_cast<std::size_t>(p[x])];
    return u;
  };
  auto finish = [&](const Eval& minus, const Eval& plus, double p) {
    MixedPolicy& m = out.policy;
    m.n_s = c.n_s;
    m.battery.n_b = c.n_b;
    m.battery.b_max = c.battery.back();
    m.battery.b_th = c.b_th > 0.0 ? c.b_th : m.battery.b_max;
    m.u_minus = to_controls(minus.policy);
    m.u_plus = to_controls(plus.policy);
    m.p = p;
    m.lambda_minus = minus.lambda;
    m.lambda_plus = plus.lambda;
    m.alpha = alpha;
    m.c_th = c_th;
    m.cost_minus = minus.cost;
    m.cost_plus = plus.cost;
    out.pure_minus = minus.policy;
    out.pure_plus = plus.policy;
    return out;
  };

  Eval minus = evaluate(0.0);
  if (minus.cost <= c_th) return finish(minus, minus, 1.0);

  Eval plus = evaluate(1.0);
  while (plus.cost > c_th) {
    if (std::abs(plus.cost - c_th) <= config.eps_lambda) return finish(plus, plus, 1.0);
    if (plus.lambda >= config.lambda_cap) {
      std::ostringstream os;
      os << "solve_p2: cost bound " << c_th << " unattainable, best cost " << plus.cost
         << " at lambda " << plus.lambda;
      fail(ErrorCode::kInfeasible, os.str());
    }
    minus = std::move(plus);
    plus = evaluate(minus.lambda * 2.0);
  }

  while (minus.cost - plus.cost > config.eps_lambda &&
         plus.lambda - minus.lambda > config.eps_lambda * std::max(1.0, plus.lambda)) {
    Eval mid = evaluate(0.5 * (minus.lambda + plus.lambda));
    if (std::abs(mid.cost - c_th) <= config.eps_lambda) return finish(mid, mid, 1.0);
    if (mid.cost < c_th) {
      plus = std::move(mid);
    } else {
      minus = std::move(mid);
    }
  }
  const double gap = minus.cost - plus.cost;
  const double p = gap > 0.0 ? std::clamp((c_th - plus.cost) / gap, 0.0, 1.0) : 0.0;
  return finish(minus, plus, p);
}

namespace {

void write_map(const MixedPolicy& m, const std::vector<double>& u, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path);
  out.precision(17);
  out << "source_state,battery_bin_low_mAh,control_mA\n";
  for (int s = 0; s < m.n_s; ++s) {
    for (int j = 0; j < m.battery.n_b; ++j) {
      out << s << ',' << m.battery.level(j) << ',' << u[static_cast<std::size_t>(s) * m.battery.n_b + j] << '\n';
    }
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  return out;
}

double parse_number(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::kTraceFormat, where + ": malformed number '" + s + "'");
  }
}

std::vector<double> read_map(const MixedPolicy& m, const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "source_state,battery_bin_low_mAh,control_mA") {
    fail(ErrorCode::kTraceFormat, path + ": unexpected header");
  }
  const std::size_t n = static_cast<std::size_t>(m.n_s) * m.battery.n_b;
  std::vector<double> u(n, std::numeric_limits<double>::quiet_NaN());
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv(line);
    const std::string where = path + " line " + std::to_string(line_no);
    if (f.size() != 3) fail(ErrorCode::kTraceFormat, where + ": expected 3 fields");
    const int s = static_cast<int>(parse_number(f[0], where));
    const int j = m.battery.bin(parse_number(f[1], where));
    if (s < 0 || s >= m.n_s) fail(ErrorCode::kTraceFormat, where + ": source state out of range");
    u[static_cast<std::size_t>(s) * m.battery.n_b + j] = parse_number(f[2], where);
  }
  for (double v : u) {
    if (std::isnan(v)) fail(ErrorCode::kTraceFormat, path + ": map does not cover the grid");
  }
  return u;
}

constexpr const char* kHeader =
    "p,lambda_minus,lambda_plus,alpha,c_th,cost_minus,cost_plus,b_max,b_th,n_battery,n_states";

}  // namespace

void save_policy(const MixedPolicy& m, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::kIoError, "cannot create " + dir + ": " + ec.message());
  const std::filesystem::path base(dir);
  std::ofstream out(base / "mixed_policy.csv");
  if (!out) fail(ErrorCode::kIoError, "cannot write policy header in " + dir);
  out.precision(17);
  out << kHeader << '\n'
      << m.p << ',' << m.lambda_minus << ',' << m.lambda_plus << ',' << m.alpha << ',' << m.c_th << ','
      << m.cost_minus << ',' << m.cost_plus << ',' << m.battery.b_max << ',' << m.battery.b_th << ','
      << m.battery.n_b << ',' << m.n_s << '\n';
  write_map(m, m.u_minus, (base / "map_minus.csv").string());
  write_map(m, m.u_plus, (base / "map_plus.csv").string());
}

MixedPolicy load_policy(const std::string& dir) {
  const std::filesystem::path base(dir);
  const std::string path = (base / "mixed_policy.csv").string();
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path);
  std::string header, values;
  std::getline(in, header);
  std::getline(in, values);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  if (header != kHeader) fail(ErrorCode::kTraceFormat, path + ": unexpected header");
  const auto f = split_csv(values);
  if (f.size() != 11) fail(ErrorCode::kTraceFormat, path + ": expected 11 fields");
  MixedPolicy m;
  m.p = parse_number(f[0], path);
  m.lambda_minus = parse_number(f[1], path);
  m.lambda_plus = parse_number(f[2], path);
  m.alpha = parse_number(f[3], path);
  m.c_th = parse_number(f[4], path);
  m.cost_minus = parse_number(f[5], path);
  m.cost_plus = parse_number(f[6], path);
  m.battery.b_max = parse_number(f[7], path);
  m.battery.b_th = parse_number(f[8], path);
  m.battery.n_b = static_cast<int>(parse_number(f[9], path));
  m.n_s = static_cast<int>(parse_number(f[10], path));
  if (m.n_s < 1 || m.battery.n_b < 2 || !(m.p >= 0.0 && m.p <= 1.0)) {
    fail(ErrorCode::kTraceFormat, path + ": header values out of range");
  }
  m.u_minus = read_map(m, (base / "map_minus.csv").string());
  m.u_plus = read_map(m, (base / "map_plus.csv").string());
  return m;
}

}  // namespace ehopt
