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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "ehopt/cmdp_solver.hpp"
#include "ehopt/errors.hpp"
#include "fixtures.hpp"

using namespace ehopt;

namespace {

const RewardCurve& curve() {
  static const RewardCurve c = [] {
    const CorrectedSolver s(fixtures::cc2420(), fixtures::medium());
    return reward_curve(s, uniform_grid(s.range().u_min, s.range().u_max, 200));
  }();
  return c;
}

EnergySourceModel day_night() {
  DayNightParams p;
  p.day_mean_current = 8.0;
  p.day_current_sigma = 3.0;
  p.bins = 32;
  return synthetic_day_night(p);
}

EnergySourceModel one_state(Histogram duration, Histogram current) {
  return EnergySourceModel({{1.0}}, {{"s", std::move(duration), std::move(current)}});
}

BatteryConfig small_battery() {
  BatteryConfig b;
  b.n_b = 40;
  return b;
}

SolverConfig small_solver() {
  SolverConfig c;
  c.n_u = 16;
  c.t_out = 0.01;
  return c;
}

// Hand-built instance with random rewards, costs and kernels.
DiscreteCmdp random_instance(std::mt19937_64& rng, int n_s, int n_b, int n_u) {
  DiscreteCmdp c;
  c.n_s = n_s;
  c.n_b = n_b;
  c.n_u = n_u;
  for (int j = 0; j < n_b; ++j) c.battery.push_back(j);
  for (int u = 0; u < n_u; ++u) c.controls.push_back(1.0 + u);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto stochastic = [&](int n) {
    std::vector<double> row(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (double& v : row) sum += (v = u01(rng));
    for (double& v : row) v /= sum;
    return row;
  };
  for (int s = 0; s < n_s; ++s) c.source.push_back(stochastic(n_s));
  for (int k = 0; k < n_s * n_b * n_u; ++k) {
    c.reward.push_back(u01(rng));
    c.cost.push_back(u01(rng));
  }
  for (int k = 0; k < n_s * n_u * n_b; ++k) {
    const auto row = stochastic(n_b);
    c.kernel.insert(c.kernel.end(), row.begin(), row.end());
  }
  c.validate();
  return c;
}

// Exact discounted value of a pure policy by Gaussian elimination.
std::vector<double> exact_value(const DiscreteCmdp& c, const PurePolicy& pol, double alpha,
                                const std::vector<double>& stage) {
  const int n = c.n_s * c.n_b;
  std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
  for (int s = 0; s < c.n_s; ++s) {
    for (int j = 0; j < c.n_b; ++j) {
      const int x = s * c.n_b + j;
      const int u = pol[x];
      a[x][x] += 1.0;
      a[x][n] = stage[c.sju(s, j, u)];
      for (int t = 0; t < c.n_s; ++t) {
        for (int k = 0; k < c.n_b; ++k) {
          a[x][t * c.n_b + k] -= alpha * c.source[s][t] * c.kernel_row(s, u, j)[k];
        }
      }
    }
  }
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    std::swap(a[col], a[piv]);
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (int k = col; k <= n; ++k) a[r][k] -= f * a[col][k];
    }
  }
  std::vector<double> v(n);
  for (int x = 0; x < n; ++x) v[x] = a[x][n] / a[x][x];
  return v;
}

struct Sampled {
  int s;
  int j;
};

Sampled step(const DiscreteCmdp& c, const PurePolicy& pol, Sampled x, std::mt19937_64& rng) {
  const int u = pol[x.s * c.n_b + x.j];
  const double* row = c.kernel_row(x.s, u, x.j);
  std::discrete_distribution<int> battery(row, row + c.n_b);
  std::discrete_distribution<int> source(c.source[x.s].begin(), c.source[x.s].end());
  return {source(rng), battery(rng)};
}

}  // namespace

TEST_CASE("buffer dynamics") {
  CHECK(clamp_buffer(10, -20, 250) == 0);
  CHECK(clamp_buffer(240, 20, 250) == 250);
  CHECK(clamp_buffer(100, 50, 250) == 150);
  CHECK(time_above_zero(5, 8, 0) == 8);
  CHECK(time_above_zero(-10, 8, 5) == doctest::Approx(4));
  CHECK(time_above_zero(-1, 8, 100) == 8);
  CHECK(time_below_threshold(3, 8, 60, 50) == 0);
  CHECK(time_below_threshold(100, 8, 0, 50) == doctest::Approx(50.0 * 8 / 100));
  CHECK(time_below_threshold(-5, 8, 20, 50) == 8);
  CHECK(time_below_threshold(20, 8, 40, 50) == doctest::Approx(10.0 * 8 / 20));
  CHECK(time_below_threshold(-40, 8, 70, 50) == doctest::Approx(8 - 20.0 * 8 / 40));
  CHECK(time_below_threshold(10, 8, 20, 50) == 8);
}

TEST_CASE("outage and cost conversions") {
  CHECK(outage_to_cost(0.0, 0.9, 43200) == 0.0);
  CHECK(outage_to_cost(0.01, 0.9, 43200) == doctest::Approx(4320));
  for (double c : {0.0, 17.0, 4320.0, 1e5}) {
    CHECK(outage_to_cost(cost_to_outage(c, 0.7, 3600), 0.7, 3600) == doctest::Approx(c));
  }
}

TEST_CASE("stage reward and cost examples") {
  const RewardCurve& r = curve();
  const EnergySourceModel m = day_night();
  CHECK(stage_reward(m, 0, 100.0, r.u_min(), r) == 0.0);

  const EnergySourceModel rich = one_state(Histogram::uniform(3000, 5000, 8), Histogram::uniform(50, 60, 8));
  const double u = 0.5 * (r.u_min() + r.u_max());
  CHECK(stage_reward(rich, 0, 250.0, u, r) == doctest::Approx(r(u) * 4000.0));
  BatteryConfig b;
  CHECK(stage_cost(rich, 0, b.b_max, u, b) == doctest::Approx(0.0));

  const EnergySourceModel dark = one_state(Histogram::uniform(3000, 5000, 8), Histogram::point_mass(0.0));
  CHECK(stage_cost(dark, 0, 0.0, u, b) == doctest::Approx(4000.0));
}

TEST_CASE("stage reward and cost match Monte Carlo") {
  const RewardCurve& r = curve();
  const EnergySourceModel m = day_night();
  BatteryConfig b;
  std::mt19937_64 rng(31);
  const int n = 1000000;
  struct Probe {
    double x_b;
    double u;
  };
  for (const Probe pr : {Probe{20.0, 10.0}, Probe{60.0, 12.0}, Probe{5.0, 4.0}}) {
    double above = 0.0, below = 0.0;
    for (int k = 0; k < n; ++k) {
      const Stage st = sample_stage(m, 0, rng);
      const double d = st.tau * (st.iota - pr.u) / 3600.0;
      above += time_above_zero(d, st.tau, pr.x_b) / n;
      below += time_below_threshold(d, st.tau, pr.x_b, b.b_th) / n;
    }
    CHECK(stage_reward(m, 0, pr.x_b, pr.u, r) == doctest::Approx(r(pr.u) * above).epsilon(0.01));
    CHECK(stage_cost(m, 0, pr.x_b, pr.u, b) == doctest::Approx(below).epsilon(0.01));
  }
}

TEST_CASE("value iteration geometric series") {
  DiscreteCmdp c;
  c.n_s = 1;
  c.n_b = 5;
  c.n_u = 3;
  c.battery = {0, 1, 2, 3, 4};
  c.controls = {1, 2, 3};
  c.source = {{1.0}};
  const double t = 3600.0, alpha = 0.9;
  const double r[3] = {0.0, 0.01, 0.02};
  for (int j = 0; j < 5; ++j) {
    for (int u = 0; u < 3; ++u) {
      c.reward.push_back(r[u] * t);
      c.cost.push_back(0.0);
    }
  }
  for (int u = 0; u < 3; ++u) {
    for (int j = 0; j < 5; ++j) {
      for (int k = 0; k < 5; ++k) c.kernel.push_back(j == k ? 1.0 : 0.0);
    }
  }
  c.value_scale = 0.02 * t;
  const ValueResult v = value_iteration(c, 0.0, alpha, 1e-9);
  for (int j = 0; j < 5; ++j) {
    CHECK(v.value[j] == doctest::Approx(0.02 * t / (1 - alpha)).epsilon(1e-9));
    CHECK(v.policy[j] == 2);
  }
}

TEST_CASE("value iteration matches exhaustive enumeration") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const DiscreteCmdp c = random_instance(rng, 2, 4, 2);
    const double alpha = 0.85, lambda = trial % 2 ? 0.0 : 0.7;
    std::vector<double> stage(c.reward.size());
    for (std::size_t i = 0; i < stage.size(); ++i) stage[i] = c.reward[i] - lambda * c.cost[i];
    const ValueResult vr = value_iteration(c, lambda, alpha, 1e-12);
    std::vector<double> best(8, -1e300);
    for (int mask = 0; mask < 256; ++mask) {
      PurePolicy pol(8);
      for (int x = 0; x < 8; ++x) pol[x] = (mask >> x) & 1;
      const auto v = exact_value(c, pol, alpha, stage);
      for (int x = 0; x < 8; ++x) best[x] = std::max(best[x], v[x]);
    }
    const auto v_opt = exact_value(c, vr.policy, alpha, stage);
    for (int x = 0; x < 8; ++x) {
      CHECK(vr.value[x] == doctest::Approx(best[x]).epsilon(1e-9));
      CHECK(v_opt[x] == doctest::Approx(best[x]).epsilon(1e-9));
    }
  }
}

TEST_CASE("battery-free toy with one bin") {
  std::mt19937_64 rng(78);
  const DiscreteCmdp c = random_instance(rng, 2, 1 + 1, 2);
  const ValueResult vr = value_iteration(c, 0.0, 0.5, 1e-12);
  std::vector<double> best(4, -1e300);
  for (int mask = 0; mask < 16; ++mask) {
    PurePolicy pol(4);
    for (int x = 0; x < 4; ++x) pol[x] = (mask >> x) & 1;
    const auto v = exact_value(c, pol, 0.5, c.reward);
    for (int x = 0; x < 4; ++x) best[x] = std::max(best[x], v[x]);
  }
  for (int x = 0; x < 4; ++x) CHECK(vr.value[x] == doctest::Approx(best[x]).epsilon(1e-9));
}

TEST_CASE("value iteration contracts at rate alpha") {
  const DiscreteCmdp c = build_cmdp(day_night(), curve(), small_battery(), small_solver());
  for (double alpha : {0.5, 0.9}) {
    const ValueResult vr = value_iteration(c, 0.3, alpha, 1e-9 * c.value_scale);
    REQUIRE(vr.deltas.size() > 12);
    for (std::size_t k = 10; k + 1 < vr.deltas.size(); ++k) {
      if (vr.deltas[k] < 1e-12 * c.value_scale) break;
      CHECK(vr.deltas[k + 1] / vr.deltas[k] <= alpha + 0.05);
    }
    const double bound = curve().r_max() * c.cost_scale / (1 - alpha);
    for (double v : vr.value) CHECK(v <= bound * (1 + 1e-9));
  }
}

TEST_CASE("policy cost examples") {
  const RewardCurve& r = curve();
  BatteryConfig b = small_battery();
  SolverConfig cfg = small_solver();
  const double alpha = cfg.alpha;

  const EnergySourceModel rich = one_state(Histogram::uniform(3000, 5000, 8), Histogram::point_mass(80.0));
  const DiscreteCmdp c1 = build_cmdp(rich, r, b, cfg);
  const PurePolicy pol1(static_cast<std::size_t>(b.n_b), cfg.n_u - 1);
  CHECK(policy_cost(c1, pol1, alpha, 1e-9)[b.n_b - 1] == doctest::Approx(0.0));

  const EnergySourceModel dark = one_state(Histogram::uniform(3000, 5000, 8), Histogram::point_mass(0.0));
  const DiscreteCmdp c2 = build_cmdp(dark, r, b, cfg);
  const PurePolicy pol2(static_cast<std::size_t>(b.n_b), 3);
  CHECK(policy_cost(c2, pol2, alpha, 1e-9)[0] == doctest::Approx(4000.0 / (1 - alpha)).epsilon(1e-6));
}

TEST_CASE("policy cost matches discounted rollouts") {
  BatteryConfig b;
  b.n_b = 16;
  const DiscreteCmdp c = build_cmdp(day_night(), curve(), b, small_solver());
  const double alpha = 0.9;
  const ValueResult vr = value_iteration(c, 0.0, alpha, 1e-9 * c.value_scale);
  const auto jc = policy_cost(c, vr.policy, alpha, 1e-9 * c.cost_scale);
  std::mt19937_64 rng(5);
  for (const Sampled start : {Sampled{0, 3}, Sampled{1, 8}}) {
    double total = 0.0;
    const int episodes = 10000;
    for (int e = 0; e < episodes; ++e) {
      Sampled x = start;
      double disc = 1.0;
      while (disc > 1e-6) {
        total += disc * c.cost[c.sju(x.s, x.j, vr.policy[x.s * c.n_b + x.j])];
        x = step(c, vr.policy, x, rng);
        disc *= alpha;
      }
    }
    CHECK(total / episodes == doctest::Approx(jc[start.s * c.n_b + start.j]).epsilon(0.02));
  }
}

TEST_CASE("steady state") {
  DiscreteCmdp c;
  c.n_s = 1;
  c.n_b = 4;
  c.n_u = 1;
  c.battery = {0, 1, 2, 3};
  c.controls = {1};
  c.source = {{1.0}};
  c.reward.assign(4, 0.0);
  c.cost.assign(4, 0.0);
  for (int j = 0; j < 4; ++j) {
    for (int k = 0; k < 4; ++k) c.kernel.push_back(j == k ? 1.0 : 0.0);
  }
  const std::vector<double> start{0, 0, 1, 0};
  const auto p = steady_state(c, PurePolicy(4, 0), &start);
  CHECK(p[2] == doctest::Approx(1.0));

  BatteryConfig b;
  b.n_b = 16;
  const DiscreteCmdp dn = build_cmdp(day_night(), curve(), b, small_solver());
  const ValueResult vr = value_iteration(dn, 0.0, 0.9, 1e-9 * dn.value_scale);
  const auto dist = steady_state(dn, vr.policy);
  double total = 0.0, day = 0.0;
  for (int j = 0; j < dn.n_b; ++j) day += dist[j];
  for (double v : dist) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(day == doctest::Approx(0.5).epsilon(1e-9));
  const auto next = propagate(dn, vr.policy, dist);
  double l1 = 0.0;
  for (std::size_t x = 0; x < dist.size(); ++x) l1 += std::abs(next[x] - dist[x]);
  CHECK(l1 < 1e-9);

  // Empirical occupation of a long run of the discrete chain.
  std::mt19937_64 rng(12);
  std::vector<double> occ(dist.size(), 0.0);
  Sampled x{0, dn.n_b - 1};
  const int n = 1000000;
  for (int k = 0; k < n; ++k) {
    x = step(dn, vr.policy, x, rng);
    occ[static_cast<std::size_t>(x.s * dn.n_b + x.j)] += 1.0 / n;
  }
  double dist_l1 = 0.0;
  for (std::size_t k = 0; k < occ.size(); ++k) dist_l1 += std::abs(occ[k] - dist[k]);
  CHECK(dist_l1 < 0.02);
}

TEST_CASE("expected cost") {
  CHECK(expected_cost({0.25, 0.25, 0.5}, {3.0, 3.0, 3.0}) == doctest::Approx(3.0));
  CHECK(expected_cost({0.0, 1.0, 0.0}, {1.0, 7.0, 2.0}) == 7.0);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u01(0, 1);
  std::vector<double> p(50), c(50);
  double sum = 0.0;
  for (auto& v : p) sum += (v = u01(rng));
  for (auto& v : p) v /= sum;
  double direct = 0.0;
  for (int k = 0; k < 50; ++k) direct += p[k] * (c[k] = 100 * u01(rng));
  CHECK(expected_cost(p, c) == doctest::Approx(direct).epsilon(1e-14));
}

TEST_CASE("Lagrangian search") {
  const EnergySourceModel m = day_night();
  const DiscreteCmdp c = build_cmdp(m, curve(), small_battery(), small_solver());
  SolverConfig cfg = small_solver();
  const double c_th = outage_to_cost(0.01, cfg.alpha, m.mean_stage_duration());
  const P2Result res = solve_p2(c, cfg, c_th);
  const MixedPolicy& pol = res.policy;
  CHECK(pol.p >= 0.0);
  CHECK(pol.p <= 1.0);
  CHECK(std::abs(pol.p * pol.cost_minus + (1 - pol.p) * pol.cost_plus - c_th) <= cfg.eps_lambda);
  CHECK(pol.lambda_minus <= pol.lambda_plus);

  std::vector<LagrangeStep> visited = res.trace;
  std::sort(visited.begin(), visited.end(), [](auto& a, auto& b) { return a.lambda < b.lambda; });
  for (std::size_t k = 1; k < visited.size(); ++k) {
    CHECK(visited[k].cost <= visited[k - 1].cost * (1 + 1e-9) + 1e-9);
  }

  // Doubling phase then bisection.
  int doubling = 0;
  for (std::size_t k = 0; k < res.trace.size(); ++k) {
    const double l = res.trace[k].lambda;
    if (l == 0.0 || (k == 1 && l == 1.0) || (k > 1 && l == 2 * res.trace[k - 1].lambda)) {
      ++doubling;
    } else {
      break;
    }
  }
  const double lmax = std::max(1.0, res.trace[static_cast<std::size_t>(doubling) - 1].lambda);
  CHECK(res.iterations <= doubling + static_cast<int>(std::ceil(std::log2(lmax / cfg.eps_lambda))));
  CHECK(res.iterations == static_cast<int>(res.trace.size()));

  const P2Result slack = solve_p2(c, cfg, 1e12);
  CHECK(slack.policy.p == 1.0);
  CHECK(slack.iterations == 1);
  CHECK(slack.pure_minus == value_iteration(c, 0.0, cfg.alpha, cfg.eps_vi * c.value_scale).policy);
}

TEST_CASE("unavoidable outage is infeasible") {
  // Even the day current stays below u_min, so the battery drains for good.
  DayNightParams weak;
  weak.day_mean_current = 0.1;
  weak.day_current_sigma = 0.02;
  weak.bins = 16;
  const EnergySourceModel m = synthetic_day_night(weak);
  REQUIRE(m.state(0).current.hi() < curve().u_min());
  const DiscreteCmdp c = build_cmdp(m, curve(), small_battery(), small_solver());
  try {
    solve_p2(c, small_solver(), 0.0);
    FAIL("expected Infeasible");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInfeasible);
  }
}

TEST_CASE("policy files round trip") {
  const EnergySourceModel m = day_night();
  const DiscreteCmdp c = build_cmdp(m, curve(), small_battery(), small_solver());
  SolverConfig cfg = small_solver();
  const MixedPolicy pol = solve_p2(c, cfg, outage_to_cost(0.01, cfg.alpha, m.mean_stage_duration())).policy;
  const std::string dir = "test_cmdp_policy_dir";
  save_policy(pol, dir);
  const MixedPolicy back = load_policy(dir);
  std::filesystem::remove_all(dir);
  CHECK(back.p == pol.p);
  CHECK(back.lambda_minus == pol.lambda_minus);
  CHECK(back.lambda_plus == pol.lambda_plus);
  CHECK(back.c_th == pol.c_th);
  CHECK(back.battery.b_max == pol.battery.b_max);
  CHECK(back.battery.b_th == pol.battery.b_th);
  CHECK(back.u_minus == pol.u_minus);
  CHECK(back.u_plus == pol.u_plus);
  for (double x : {0.0, 3.1, 77.0, 249.9, 250.0}) {
    CHECK(back.control(true, 0, x) == pol.control(true, 0, x));
    CHECK(back.control(false, 1, x) == pol.control(false, 1, x));
  }
  CHECK_THROWS_AS(load_policy("no_such_policy_dir"), Error);
}
