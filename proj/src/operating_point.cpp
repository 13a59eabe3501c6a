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

#include "ehopt/operating_point.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ehopt/channel_access.hpp"
#include "ehopt/errors.hpp"

namespace ehopt {
namespace {

double inv(double t) { return t == kInfinity ? 0.0 : 1.0 / t; }

// Real roots of c3 x^3 + c2 x^2 + c1 x + c0, lowest degree fallbacks
// included. Roots are not deduplicated.
std::vector<double> quadratic_roots(double c2, double c1, double c0) {
  std::vector<double> roots;
  if (c2 == 0.0) {
    if (c1 != 0.0) roots.push_back(-c0 / c1);
    return roots;
  }
  const double disc = c1 * c1 - 4.0 * c2 * c0;
  if (disc < 0.0) return roots;
  const double sq = std::sqrt(disc);
  // Stable form: avoid cancellation between -c1 and sq.
  const double q = -0.5 * (c1 + std::copysign(sq, c1));
  if (q != 0.0) {
    roots.push_back(q / c2);
    roots.push_back(c0 / q);
  } else {
    roots.push_back(0.0);
  }
  return roots;
}

std::vector<double> cubic_roots(double c3, double c2, double c1, double c0) {
  if (c3 == 0.0) return quadratic_roots(c2, c1, c0);
  const double a = c2 / c3;
  const double b = c1 / c3;
  const double c = c0 / c3;
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double shift = -a / 3.0;
  std::vector<double> roots;
  const double disc = q * q / 4.0 + p * p * p / 27.0;
  if (disc > 0.0) {
    const double sq = std::sqrt(disc);
    roots.push_back(std::cbrt(-q / 2.0 + sq) + std::cbrt(-q / 2.0 - sq) + shift);
  } else if (p == 0.0) {
    roots.push_back(shift);
  } else {
    const double r = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * r), -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) {
      roots.push_back(r * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0) + shift);
    }
  }
  return roots;
}

}  // namespace

std::array<double, 3> CoefficientSet::e(double u) const {
  const double d7 = d[4] - u;
  return {4 * d[1] * d[6] - d[2] * d[2],
          4 * d[1] * d[5] + 4 * d[3] * d[6] - 2 * d[2] * d7,
          4 * d[3] * d[5] - d7 * d7};
}

double CoefficientSet::output_current(double t_u, double t_dc) const {
  const double s = inv(t_u);
  return d[1] * t_dc * s + d[2] * s + d[3] * t_dc + d[4] + d[5] / t_dc +
         d[6] * s / t_dc;
}

double CoefficientSet::idle_fraction(double t_u, double t_dc) const {
  const double s = inv(t_u);
  return a[10] - a[1] * t_dc * s - a[3] * t_dc - a[11] * s;
}

CoefficientSet derive_coefficients(const NodePowerProfile& profile,
                                   const TopologyParams& topo) {
  profile.validate();
  topo.validate();
  const auto& p = profile;
  CoefficientSet k;
  k.t_on = p.t_on;

  auto& c = k.c;
  c[1] = p.i_t + p.i_c;
  c[2] = p.i_r + p.i_c;
  c[3] = p.i_c;
  c[4] = p.i_s;
  c[5] = p.i_r + p.i_c - p.i_s;

  const double retx_extra = p.e_t / (1.0 - p.e_t);
  const double per_dc = 0.5 + retx_extra;   // t_TX slope in t_dc
  const double fixed = p.t_on / 2 + p.t_data;  // t_TX constant part
  const double f_rpl = inv(p.t_rpl);
  const double n_c = topo.n_c;
  const double n_i = topo.n_i;
  const double n_int = topo.n_int;

  auto& a = k.a;
  a[1] = per_dc * (1 + n_c);
  a[2] = fixed * (1 + n_c);
  a[3] = per_dc * (2 + n_c) * f_rpl;
  a[4] = fixed * (2 + n_c) * f_rpl;
  a[5] = p.t_data * n_c;
  a[6] = p.t_data * (1 + n_c + n_i) * f_rpl;
  a[7] = p.t_int * n_int;
  a[8] = p.t_int * n_int * f_rpl;
  a[9] = p.t_cpu * p.k_u;
  a[10] = 1.0 - a[4] - a[6] - a[8];
  a[11] = a[2] + a[5] + a[7] + a[9];
  if (a[10] <= 0.0) {
    fail(ErrorCode::kInvalidInput, "degenerate profile: routing traffic alone saturates the node");
  }

  auto& b = k.b;
  const double idle_dc = c[5] * p.t_on;
  b[1] = c[1] * a[1];
  b[2] = c[1] * a[2];
  b[3] = c[1] * a[3];
  b[4] = c[1] * a[4];
  b[5] = c[2] * a[5];
  b[6] = c[2] * a[6];
  b[7] = c[2] * a[7];
  b[8] = c[2] * a[8];
  b[9] = c[3] * a[9];
  b[10] = -c[4] * a[1];
  b[11] = -c[4] * a[11] - idle_dc * a[1];
  b[12] = -c[4] * a[3];
  b[13] = c[4] * a[10] - idle_dc * a[3];
  b[14] = idle_dc * a[10];
  b[15] = -idle_dc * a[11];

  auto& d = k.d;
  d[1] = b[1] + b[10];
  d[2] = b[2] + b[5] + b[7] + b[9] + b[11];
  d[3] = b[3] + b[12];
  d[4] = b[4] + b[6] + b[8] + b[13];
  d[5] = b[14];
  d[6] = b[15];

  // t_dc^2 [d1 (a10 - a3 x) + d3 (a1 x + a11)] = d6 (a10 - a3 x) + d5 (a1 x + a11)
  auto& f = k.f;
  f[3] = d[3] * a[1] - d[1] * a[3];
  f[2] = d[1] * a[10] + d[3] * a[11];
  f[1] = d[6] * a[3] - d[5] * a[1];
  f[0] = -(d[6] * a[10] + d[5] * a[11]);
  return k;
}

double optimal_tdc(const CoefficientSet& k, double t_u) {
  const double s = inv(t_u);
  const double num = k.d[6] * s + k.d[5];
  const double den = k.d[1] * s + k.d[3];
  if (!(num > 0.0) || !(den > 0.0)) {
    fail(ErrorCode::kNumericalFailure, "optimal_tdc: non-positive square-root argument");
  }
  return std::max(std::sqrt(num / den), k.t_on);
}

ControlRange control_bounds(const CoefficientSet& k) {
  const auto& a = k.a;
  const auto& d = k.d;
  if (!(d[3] > 0.0) || !(d[5] > 0.0)) {
    fail(ErrorCode::kInvalidInput, "control_bounds: u_min undefined without routing traffic");
  }
  ControlRange range;
  range.t_dc_min = std::sqrt(d[5] / d[3]);
  range.u_min = d[3] * range.t_dc_min + d[4] + d[5] / range.t_dc_min;

  // Candidate roots from the cubic and from its quadratic truncation: the
  // leading coefficient may be pure rounding noise.
  std::vector<double> candidates = cubic_roots(k.f[3], k.f[2], k.f[1], k.f[0]);
  for (double r : quadratic_roots(k.f[2], k.f[1], k.f[0])) candidates.push_back(r);

  double best = -1.0;
  for (double x : candidates) {
    if (!std::isfinite(x) || x <= 0.0) continue;
    const double span = a[10] - a[3] * x;
    if (span <= 0.0) continue;
    const double lhs = x * x * (d[1] * span + d[3] * (a[1] * x + a[11]));
    const double rhs = d[6] * span + d[5] * (a[1] * x + a[11]);
    const double scale = std::abs(x * x * d[1] * span) + std::abs(x * x * d[3] * (a[1] * x + a[11])) +
                         std::abs(d[6] * span) + std::abs(d[5] * (a[1] * x + a[11]));
    if (std::abs(lhs - rhs) > 1e-8 * scale) continue;
    best = std::max(best, x);
  }
  if (best < k.t_on * (1.0 - 1e-12)) {
    std::ostringstream os;
    os << "no admissible t_dc^lim >= t_on (largest root " << best << ", t_on " << k.t_on << ")";
    fail(ErrorCode::kNoFeasibleLimit, os.str());
  }
  range.t_dc_lim = std::max(best, k.t_on);
  range.t_u_lim = (a[1] * range.t_dc_lim + a[11]) / (a[10] - a[3] * range.t_dc_lim);
  range.u_max = k.output_current(range.t_u_lim, range.t_dc_lim);
  if (!(range.u_max > range.u_min)) {
    fail(ErrorCode::kNoFeasibleLimit, "control_bounds: u_max does not exceed u_min");
  }
  return range;
}

OperatingPoint solve_p1_closed_form(const CoefficientSet& k, const ControlRange& range,
                                    double u) {
  if (!(u > 0.0)) fail(ErrorCode::kInvalidInput, "solve_p1: u must be > 0");
  if (u <= range.u_min) return {kInfinity, range.t_dc_min};
  if (u >= range.u_max) return {range.t_u_lim, range.t_dc_lim};

  const auto& d = k.d;
  const double d7 = d[4] - u;
  // Residual of I_out(t_U, t_dc*(t_U)) - u before squaring, in s = 1/t_U.
  auto residual = [&](double s) {
    const double x = d[1] * s + d[3];
    const double y = d[6] * s + d[5];
    return 2.0 * std::sqrt(x * y) + d[2] * s + d7;
  };
  auto admissible = [&](double s) {
    return std::isfinite(s) && s > 0.0 && d[1] * s + d[3] > 0.0 &&
           d[6] * s + d[5] > 0.0 && -(d[2] * s + d7) >= 0.0 &&
           s <= (1.0 + 1e-9) / range.t_u_lim;
  };

  const auto e = k.e(u);
  double s_best = -1.0;
  double res_best = kInfinity;
  for (double s : quadratic_roots(e[0], e[1], e[2])) {
    if (!admissible(s)) continue;
    const double res = std::abs(residual(s));
    if (res < res_best) {
      res_best = res;
      s_best = s;
    }
  }
  if (s_best <= 0.0 || res_best > 1e-6 * u) {
    std::ostringstream os;
    os << "solve_p1: no admissible root of the t_U quadratic at u = " << u;
    fail(ErrorCode::kNumericalFailure, os.str());
  }

  // Newton polish on the unsquared equation.
  for (int it = 0; it < 4; ++it) {
    const double x = d[1] * s_best + d[3];
    const double y = d[6] * s_best + d[5];
    const double slope = (d[1] * y + d[6] * x) / std::sqrt(x * y) + d[2];
    if (slope == 0.0) break;
    const double next = s_best - residual(s_best) / slope;
    if (!admissible(next) || std::abs(residual(next)) >= std::abs(residual(s_best))) break;
    s_best = next;
  }

  const double t_u = 1.0 / s_best;
  return {t_u, optimal_tdc(k, t_u)};
}

OperatingPoint solve_p1_closed_form(const CoefficientSet& k, double u) {
  return solve_p1_closed_form(k, control_bounds(k), u);
}

double retx_ratio_at(const NodePowerProfile& profile, const TopologyParams& topo,
                     double t_u, bool with_collisions) {
  if (!with_collisions) return profile.collision_free_retx_ratio();
  const CollisionSolution sol = solve_fixed_point(inv(t_u), profile.t_v, profile.e_t, topo.n_i);
  return sol.feasible ? sol.retx_ratio() : 0.0;
}

namespace {

struct InnerMinimum {
  bool feasible = false;
  double t_dc = 0.0;
  double current = kInfinity;
};

constexpr double kTdcCap = 1e6;

InnerMinimum minimise_over_tdc(const NodePowerProfile& p, const TopologyParams& topo,
                               double t_u, bool with_collisions,
                               const NumericalOptions& opts) {
  InnerMinimum out;
  const double retx = retx_ratio_at(p, topo, t_u, with_collisions);
  if (retx < 1.0) return out;

  // r_IDLE is affine and decreasing in t_dc; find the feasible range.
  const double f_u = inv(t_u);
  const double f_rpl = inv(p.t_rpl);
  const double f_tx = (1 + topo.n_c) * f_u + (2 + topo.n_c) * f_rpl;
  const double r_other = p.t_data * (topo.n_c * f_u + (1 + topo.n_c + topo.n_i) * f_rpl) +
                         p.t_int * topo.n_int * (f_u + f_rpl) + p.t_cpu * p.k_u * f_u;
  const double slack = 1.0 - (p.t_on / 2 + p.t_data) * f_tx - r_other;
  const double slope = (retx - 0.5) * f_tx;
  double t_max = slope > 0.0 ? slack / slope : kTdcCap;
  t_max = std::min(t_max, kTdcCap);
  if (slack <= 0.0 || t_max < p.t_on) return out;

  auto current = [&](double t_dc) {
    try {
      return output_current(p, topo, {t_u, t_dc}, retx);
    } catch (const Error&) {
      return kInfinity;
    }
  };

  // Golden-section search in log(t_dc); I_out is convex in t_dc at fixed t_U.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = std::log(p.t_on);
  double hi = std::log(t_max);
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = current(std::exp(x1));
  double f2 = current(std::exp(x2));
  for (int it = 0; it < 4 * opts.max_iterations; ++it) {
    if (std::exp(hi) - std::exp(lo) <= opts.time_tolerance) break;
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = current(std::exp(x1));
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = current(std::exp(x2));
    }
  }
  const double t_dc = std::exp(0.5 * (lo + hi));
  out.t_dc = std::clamp(t_dc, p.t_on, t_max);
  out.current = current(out.t_dc);
  out.feasible = std::isfinite(out.current);
  return out;
}

}  // namespace

OperatingPoint solve_p1_numerical(const NodePowerProfile& profile,
                                  const TopologyParams& topo, double u,
                                  bool with_collisions, const NumericalOptions& opts) {
  profile.validate();
  topo.validate();
  if (!(u > 0.0)) fail(ErrorCode::kInvalidInput, "solve_p1_numerical: u must be > 0");

  auto inner = [&](double t_u) {
    return minimise_over_tdc(profile, topo, t_u, with_collisions, opts);
  };

  const InnerMinimum at_inf = inner(kInfinity);
  if (!at_inf.feasible) {
    fail(ErrorCode::kInfeasible, "solve_p1_numerical: no channel-feasible operating point");
  }
  if (u <= at_inf.current) return {kInfinity, at_inf.t_dc};

  auto meets_budget = [&](const InnerMinimum& m) { return m.feasible && m.current <= u; };

  double hi = 1.0;
  InnerMinimum m_hi = inner(hi);
  while (!meets_budget(m_hi) && hi < 1e12) {
    hi *= 4.0;
    m_hi = inner(hi);
  }
  if (!meets_budget(m_hi)) return {kInfinity, at_inf.t_dc};

  double lo = hi;
  while (lo > 1e-9) {
    lo /= 4.0;
    if (!meets_budget(inner(lo))) break;
    hi = lo;
  }
  m_hi = inner(hi);

  for (int it = 0; it < opts.max_iterations && hi - lo > opts.time_tolerance; ++it) {
    const double mid = std::sqrt(lo * hi);
    const InnerMinimum m = inner(mid);
    if (meets_budget(m)) {
      hi = mid;
      m_hi = m;
    } else {
      lo = mid;
    }
  }
  return {hi, m_hi.t_dc};
}

CorrectedSolver::CorrectedSolver(const NodePowerProfile& profile, const TopologyParams& topo)
    : coeffs_(derive_coefficients(profile, topo)), range_(control_bounds(coeffs_)) {
  const OperatingPoint closed = solve_p1_closed_form(coeffs_, range_, range_.u_max);
  if (topo.n_i == 0) {
    anchor_ = closed;
    return;
  }
  anchor_ = solve_p1_numerical(profile, topo, range_.u_max, true);
  delta_t_u_ = anchor_.t_u - closed.t_u;
  delta_t_dc_ = anchor_.t_dc - closed.t_dc;
}

OperatingPoint CorrectedSolver::operator()(double u) const {
  if (u >= range_.u_max) return anchor_;
  const OperatingPoint closed = solve_p1_closed_form(coeffs_, range_, u);
  OperatingPoint out;
  out.t_u = closed.t_u == kInfinity ? kInfinity : closed.t_u + delta_t_u_;
  out.t_dc = std::max(closed.t_dc + delta_t_dc_, coeffs_.t_on);
  if (!(out.t_u > 0.0)) out.t_u = closed.t_u;
  return out;
}

RewardCurve::RewardCurve(std::vector<double> u, std::vector<double> r)
    : u_(std::move(u)), r_(std::move(r)) {
  if (u_.size() < 2 || u_.size() != r_.size()) {
    fail(ErrorCode::kInvalidInput, "reward curve needs >= 2 matching samples");
  }
  for (std::size_t i = 1; i < u_.size(); ++i) {
    if (!(u_[i] > u_[i - 1])) fail(ErrorCode::kInvalidInput, "reward curve u grid must increase");
  }
}

double RewardCurve::operator()(double u) const {
  if (u_.empty()) fail(ErrorCode::kInvalidInput, "empty reward curve");
  if (u < u_.front()) return 0.0;
  if (u >= u_.back()) return r_.back();
  const auto it = std::upper_bound(u_.begin(), u_.end(), u);
  const std::size_t i = static_cast<std::size_t>(it - u_.begin());
  const double w = (u - u_[i - 1]) / (u_[i] - u_[i - 1]);
  return r_[i - 1] + w * (r_[i] - r_[i - 1]);
}

RewardCurve reward_curve(const CorrectedSolver& solver, const std::vector<double>& u_grid) {
  std::vector<double> r;
  r.reserve(u_grid.size());
  for (double u : u_grid) r.push_back(solver(u).f_u());
  // Guard against rounding making r dip by an ulp between samples.
  for (std::size_t i = 1; i < r.size(); ++i) r[i] = std::max(r[i], r[i - 1]);
  return RewardCurve(u_grid, std::move(r));
}

std::vector<double> uniform_grid(double lo, double hi, int n) {
  if (n < 2 || !(hi > lo)) fail(ErrorCode::kInvalidInput, "uniform_grid: need n >= 2 and hi > lo");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  g.back() = hi;
  return g;
}

}  // namespace ehopt
