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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ehopt/channel_access.hpp"
#include "ehopt/errors.hpp"
#include "ehopt/operating_point.hpp"
#include "fixtures.hpp"

using namespace ehopt;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double ratio_free(const NodePowerProfile& p) { return p.collision_free_retx_ratio(); }

struct Case {
  NodePowerProfile p;
  TopologyParams t;
  CoefficientSet c;
  ControlRange r;
};

// Random configuration with a well-defined control range.
Case random_case(std::mt19937_64& rng) {
  for (;;) {
    Case k{fixtures::random_profile(rng), fixtures::random_topology(rng), {}, {}};
    try {
      k.c = derive_coefficients(k.p, k.t);
      k.r = control_bounds(k.c);
      return k;
    } catch (const Error&) {
    }
  }
}

}  // namespace

TEST_CASE("coefficient form equals direct evaluation") {
  std::mt19937_64 rng(17);
  int points = 0;
  for (int cfg = 0; cfg < 100; ++cfg) {
    const NodePowerProfile p = fixtures::random_profile(rng);
    const TopologyParams t = fixtures::random_topology(rng);
    const CoefficientSet c = derive_coefficients(p, t);
    for (int j = 0; j < 100; ++j) {
      const double t_u = std::exp(fixtures::uniform(rng, std::log(0.5), std::log(5000.0)));
      const double t_dc = p.t_on * std::exp(fixtures::uniform(rng, 0.0, std::log(200.0)));
      const double direct = fixtures::oracle_output_current(p, t, t_u, t_dc, ratio_free(p));
      CHECK(c.output_current(t_u, t_dc) == doctest::Approx(direct).epsilon(1e-10));
      ++points;
    }
  }
  CHECK(points == 10000);
}

TEST_CASE("c-group identities") {
  const NodePowerProfile p = fixtures::cc2420();
  const CoefficientSet c = derive_coefficients(p, fixtures::medium());
  CHECK(c.c[1] == doctest::Approx(p.i_t + p.i_c));
  CHECK(c.c[2] == doctest::Approx(p.i_r + p.i_c));
  CHECK(c.c[3] == doctest::Approx(p.i_c));
  CHECK(c.c[4] == doctest::Approx(p.i_s));
  CHECK(c.c[5] == doctest::Approx(p.i_r + p.i_c - p.i_s));
}

TEST_CASE("traffic-free collapse to the idle-only current") {
  NodePowerProfile p = fixtures::cc2420();
  p.t_rpl = kInfinity;
  const CoefficientSet c = derive_coefficients(p, {0, 0, 0});
  for (double t_dc : {p.t_on, 0.05, 0.4, 2.0}) {
    const double d_c = p.t_on / t_dc;
    const double idle = (p.i_c + p.i_r) * d_c + p.i_s * (1 - d_c);
    CHECK(c.d[3] * t_dc + c.d[4] + c.d[5] / t_dc == doctest::Approx(idle).epsilon(1e-12));
    CHECK(c.output_current(kInfinity, t_dc) == doctest::Approx(idle).epsilon(1e-12));
  }
}

TEST_CASE("optimal duty-cycle period is stationary and a grid minimum") {
  const NodePowerProfile p = fixtures::cc2420();
  const CoefficientSet c = derive_coefficients(p, fixtures::medium());
  CHECK(optimal_tdc(c, kInfinity) == doctest::Approx(std::sqrt(c.d[5] / c.d[3])));
  std::mt19937_64 rng(4);
  for (int k = 0; k < 100; ++k) {
    const double t_u = std::exp(fixtures::uniform(rng, std::log(30.0), std::log(1e5)));
    const double x = optimal_tdc(c, t_u);
    if (x <= p.t_on) continue;
    const double h = x * 1e-5;
    const double deriv = (c.output_current(t_u, x + h) - c.output_current(t_u, x - h)) / (2 * h);
    CHECK(std::abs(deriv) < 1e-6 * c.output_current(t_u, x));
    const double best = c.output_current(t_u, x);
    for (int j = 0; j <= 400; ++j) {
      const double y = p.t_on * std::pow(1000.0, j / 400.0);
      CHECK(best <= c.output_current(t_u, y) * (1 + 1e-14));
    }
  }
}

TEST_CASE("control bounds") {
  const NodePowerProfile p = fixtures::cc2420();
  const TopologyParams t = fixtures::medium();
  const CoefficientSet c = derive_coefficients(p, t);
  const ControlRange r = control_bounds(c);
  CHECK(r.u_min < r.u_max);
  CHECK(r.t_dc_lim >= p.t_on);
  CHECK(r.t_u_lim > 0);
  const double t_dc_min = std::sqrt(c.d[5] / c.d[3]);
  CHECK(r.t_dc_min == doctest::Approx(t_dc_min));
  const double via_model = output_current(p, t, {kInfinity, t_dc_min}, ratio_free(p));
  CHECK(r.u_min == doctest::Approx(via_model).epsilon(1e-12));
  CHECK(std::abs(c.idle_fraction(r.t_u_lim, r.t_dc_lim)) < 1e-9);
  CHECK(r.u_max == doctest::Approx(c.output_current(r.t_u_lim, r.t_dc_lim)).epsilon(1e-12));

  std::mt19937_64 rng(9);
  for (int k = 0; k < 200; ++k) {
    const Case a = random_case(rng);
    CHECK(std::abs(a.c.idle_fraction(a.r.t_u_lim, a.r.t_dc_lim)) < 1e-9);
    NodePowerProfile q = a.p;
    q.t_rpl *= 2;
    const ControlRange r2 = control_bounds(derive_coefficients(q, a.t));
    CHECK(r2.u_min < a.r.u_min);
  }
}

TEST_CASE("listen cheaper than transmit has no saturation limit above t_on") {
  NodePowerProfile p = fixtures::cc2420();
  p.i_r = 10.0;
  try {
    control_bounds(derive_coefficients(p, fixtures::medium()));
    FAIL("expected NoFeasibleLimit");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNoFeasibleLimit);
  }
}

TEST_CASE("closed form boundaries and budget tightness") {
  const NodePowerProfile p = fixtures::cc2420();
  const CoefficientSet c = derive_coefficients(p, fixtures::medium());
  const ControlRange r = control_bounds(c);
  const OperatingPoint lo = solve_p1_closed_form(c, r, r.u_min);
  CHECK(std::isinf(lo.t_u));
  CHECK(lo.f_u() == 0.0);
  const OperatingPoint below = solve_p1_closed_form(c, r, 0.5 * r.u_min);
  CHECK(std::isinf(below.t_u));
  CHECK(below.t_dc == doctest::Approx(r.t_dc_min));
  const OperatingPoint hi = solve_p1_closed_form(c, r, r.u_max);
  CHECK(hi.t_u == doctest::Approx(r.t_u_lim));
  CHECK(hi.t_dc == doctest::Approx(r.t_dc_lim));
  const OperatingPoint above = solve_p1_closed_form(c, r, 2 * r.u_max);
  CHECK(above.t_u == doctest::Approx(r.t_u_lim));

  std::mt19937_64 rng(21);
  for (int k = 0; k < 200; ++k) {
    const Case a = random_case(rng);
    for (int j = 1; j < 20; ++j) {
      const double u = a.r.u_min + (a.r.u_max - a.r.u_min) * j / 20.0;
      const OperatingPoint op = solve_p1_closed_form(a.c, a.r, u);
      CHECK(rel(a.c.output_current(op.t_u, op.t_dc), u) < 1e-6);
    }
  }
}

TEST_CASE("closed form agrees with the nested numerical search") {
  const NodePowerProfile p = fixtures::cc2420();
  for (const TopologyParams& t : {fixtures::sparse(), fixtures::medium(), fixtures::dense()}) {
    const CoefficientSet c = derive_coefficients(p, t);
    const ControlRange r = control_bounds(c);
    for (int j = 1; j <= 50; ++j) {
      const double u = r.u_min + (r.u_max - r.u_min) * j / 51.0;
      const OperatingPoint a = solve_p1_closed_form(c, r, u);
      const OperatingPoint b = solve_p1_numerical(p, t, u, false);
      CHECK(rel(b.t_u, a.t_u) < 1e-3);
      CHECK(rel(b.t_dc, a.t_dc) < 1e-3);
    }
  }
}

TEST_CASE("numerical search with collisions") {
  const NodePowerProfile p = fixtures::cc2420();
  const TopologyParams none{4, 0, 15};
  for (double u : {1.0, 3.0, 8.0}) {
    const OperatingPoint a = solve_p1_numerical(p, none, u, false);
    const OperatingPoint b = solve_p1_numerical(p, none, u, true);
    CHECK(a.t_u == b.t_u);
    CHECK(a.t_dc == b.t_dc);
  }
  const ControlRange r = control_bounds(derive_coefficients(p, fixtures::medium()));
  double prev = 0.0;
  for (int j = 0; j <= 40; ++j) {
    const double u = 0.5 * r.u_min + (r.u_max - 0.5 * r.u_min) * j / 40.0;
    const double f = solve_p1_numerical(p, fixtures::medium(), u, true).f_u();
    CHECK(f >= prev);
    prev = f;
  }
  // Collisions cost energy: the collision-aware rate never exceeds the free one.
  for (int j = 1; j < 10; ++j) {
    const double u = r.u_min + (r.u_max - r.u_min) * j / 10.0;
    CHECK(solve_p1_numerical(p, fixtures::medium(), u, true).f_u() <=
          solve_p1_numerical(p, fixtures::medium(), u, false).f_u() * (1 + 1e-9));
  }
}

TEST_CASE("numerical search fails when the channel cannot host any load") {
  NodePowerProfile p = fixtures::cc2420();
  p.t_v = 1.0;
  p.t_rpl = 0.5;
  try {
    solve_p1_numerical(p, {4, 40, 60}, 5.0, true);
    FAIL("expected Infeasible");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInfeasible);
  }
}

TEST_CASE("corrected solver") {
  const NodePowerProfile p = fixtures::cc2420();
  const TopologyParams t = fixtures::medium();
  const CorrectedSolver s(p, t);
  const ControlRange& r = s.range();
  const OperatingPoint at_max = s(r.u_max);
  const OperatingPoint ref = solve_p1_numerical(p, t, r.u_max, true);
  CHECK(at_max.t_u == doctest::Approx(ref.t_u).epsilon(1e-9));
  CHECK(at_max.t_dc == doctest::Approx(ref.t_dc).epsilon(1e-9));

  double worst = 0.0;
  for (int j = 1; j < 20; ++j) {
    const double u = r.u_min + (r.u_max - r.u_min) * (0.25 + 0.5 * j / 20.0);
    const double a = s(u).t_u;
    const double b = solve_p1_numerical(p, t, u, true).t_u;
    worst = std::max(worst, rel(a, b));
    CHECK(s(u).t_dc >= p.t_on);
  }
  CHECK(worst < 0.05);

  const TopologyParams quiet{4, 0, 15};
  const CorrectedSolver q(p, quiet);
  CHECK(q.delta_t_u() == 0.0);
  CHECK(q.delta_t_dc() == 0.0);
  const CoefficientSet c = derive_coefficients(p, quiet);
  const ControlRange rq = control_bounds(c);
  for (int j = 0; j <= 10; ++j) {
    const double u = rq.u_min + (rq.u_max - rq.u_min) * j / 10.0;
    const OperatingPoint a = q(u), b = solve_p1_closed_form(c, rq, u);
    CHECK(a.t_u == b.t_u);
    CHECK(a.t_dc == b.t_dc);
  }
}

TEST_CASE("reward curve") {
  const NodePowerProfile p = fixtures::cc2420();
  const CorrectedSolver s(p, fixtures::medium());
  const ControlRange& r = s.range();
  const RewardCurve curve = reward_curve(s, uniform_grid(r.u_min, r.u_max, 200));
  CHECK(curve(r.u_min) == 0.0);
  CHECK(curve(0.5 * r.u_min) == 0.0);
  CHECK(curve(r.u_max) == doctest::Approx(1.0 / s(r.u_max).t_u));
  CHECK(curve(3 * r.u_max) == curve(r.u_max));
  double prev = 0.0;
  for (int j = 0; j <= 1000; ++j) {
    const double v = curve(r.u_min + (r.u_max - r.u_min) * j / 1000.0);
    CHECK(v >= prev);
    CHECK(v <= curve.r_max());
    prev = v;
  }
  // Continuity across the range ends.
  CHECK(curve(r.u_min + 1e-9) < 1e-6);
  CHECK(std::abs(curve(r.u_max - 1e-9) - curve.r_max()) < 1e-6);
}

TEST_CASE("denser and deeper networks lower the reward") {
  const NodePowerProfile p = fixtures::cc2420();
  // Binary trees: the bottleneck relays 6 nodes at 3 hops, 30 at 5 hops.
  const TopologyParams hop3{6, 5, 15}, hop3_dense{6, 8, 30}, hop5{30, 5, 15};
  const CoefficientSet c3 = derive_coefficients(p, hop3), c3d = derive_coefficients(p, hop3_dense),
                       c5 = derive_coefficients(p, hop5);
  const ControlRange r3 = control_bounds(c3), r3d = control_bounds(c3d), r5 = control_bounds(c5);
  const double lo = std::max({r3.u_min, r3d.u_min, r5.u_min});
  const double hi = std::min({r3.u_max, r3d.u_max, r5.u_max});
  REQUIRE(lo < hi);
  for (int j = 1; j < 20; ++j) {
    const double u = lo + (hi - lo) * j / 20.0;
    const double f3 = solve_p1_closed_form(c3, r3, u).f_u();
    const double f3d = solve_p1_closed_form(c3d, r3d, u).f_u();
    const double f5 = solve_p1_closed_form(c5, r5, u).f_u();
    CHECK(f3d < f3);
    CHECK(f5 < f3);
    CHECK(f3 - f5 > f3 - f3d);
  }
}

TEST_CASE("lighter nodes stay within the bottleneck budget") {
  const NodePowerProfile p = fixtures::cc2420();
  const TopologyParams bn = fixtures::medium();
  const CoefficientSet c = derive_coefficients(p, bn);
  const ControlRange r = control_bounds(c);
  const TopologyParams lighter[] = {{3, 5, 15}, {4, 4, 15}, {4, 5, 14}, {0, 0, 0}, {2, 3, 9}};
  for (int j = 1; j < 30; ++j) {
    const double u = r.u_min + (r.u_max - r.u_min) * j / 30.0;
    const OperatingPoint op = solve_p1_closed_form(c, r, u);
    for (const TopologyParams& t : lighter) {
      CHECK(output_current(p, t, op, ratio_free(p)) <= u * (1 + 1e-9));
    }
  }
}
