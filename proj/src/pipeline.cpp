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

#include "ehopt/pipeline.hpp"

#include <fstream>

#include "ehopt/errors.hpp"

namespace ehopt {

Problem build_problem(const RunConfig& config) {
  CorrectedSolver solver(config.profile, config.topo);
  const auto& range = solver.range();
  RewardCurve curve = reward_curve(solver, uniform_grid(range.u_min, range.u_max, config.reward_samples));
  return {std::move(solver), std::move(curve)};
}

P2Result solve_policy(const RunConfig& config, const Problem& problem) {
  const EnergySourceModel source = config.source();
  const DiscreteCmdp cmdp = build_cmdp(source, problem.curve, config.battery, config.solver, config.shading);
  P2Result r = solve_p2(cmdp, config.solver, config.solver.resolve_c_th(source.mean_stage_duration()));
  r.policy.battery.b_th = config.battery.b_th;
  return r;
}

StageFeed make_feed(const RunConfig& config, const EnergySourceModel& source) {
  if (!config.trace.empty()) {
    if (config.source_scale == 1.0) return StageFeed::from_trace(config.trace);
    auto scaled = config.trace;
    for (auto& r : scaled) r.current_ma *= config.source_scale;
    return StageFeed::from_trace(std::move(scaled));
  }
  return StageFeed::from_model(source);
}

namespace {

void check_policy(const RunConfig& config, const MixedPolicy& policy) {
  if (policy.n_s != config.base_source.n_states()) {
    fail(ErrorCode::kInvalidInput, "policy source states do not match the configured source");
  }
  if (policy.battery.b_max != config.battery.b_max) {
    fail(ErrorCode::kInvalidInput, "policy b_max does not match the configured battery");
  }
}

}  // namespace

SimReport simulate_policy(const RunConfig& config, const Problem& problem, const MixedPolicy& policy) {
  check_policy(config, policy);
  const EnergySourceModel source = config.source();
  return run_policy(policy, problem.curve, make_feed(config, source), config.battery, config.sim);
}

SimReport simulate_kansal(const RunConfig& config, const Problem& problem) {
  const EnergySourceModel source = config.source();
  return run_kansal(config.baseline, problem.curve, make_feed(config, source), config.battery, config.sim);
}

HeteroReport simulate_heterogeneous(const RunConfig& config, const Problem& problem,
                                    const MixedPolicy& policy) {
  check_policy(config, policy);
  if (config.hetero_nodes.empty()) {
    fail(ErrorCode::kInvalidInput, "heterogeneous simulation needs heterogeneous.nodes in the config");
  }
  const EnergySourceModel source = config.source();
  HeteroOptions opts{config.sim, config.report_delay};
  return run_heterogeneous(policy, problem.curve, problem.solver, config.profile, config.hetero_nodes,
                           make_feed(config, source), config.battery, opts);
}

std::vector<SweepRow> run_sweep(const RunConfig& config, const std::vector<double>& b_max,
                                const std::vector<double>& alpha, const std::vector<double>& scale) {
  const Problem problem = build_problem(config);
  std::vector<SweepRow> rows;
  for (double s : scale.empty() ? std::vector<double>{config.source_scale} : scale) {
    for (double a : alpha.empty() ? std::vector<double>{config.solver.alpha} : alpha) {
      for (double b : b_max.empty() ? std::vector<double>{config.battery.b_max} : b_max) {
        RunConfig c = config;
        set_config_number(c, "source.scale", s);
        set_config_number(c, "solver.alpha", a);
        set_config_number(c, "battery.b_max", b);
        const P2Result r = solve_policy(c, problem);
        const SimReport rep = simulate_policy(c, problem, r.policy);
        rows.push_back({b, a, s, r.policy.p, r.policy.lambda_minus, r.policy.lambda_plus, rep.throughput(),
                        rep.outage_fraction(), rep.empty_fraction()});
      }
    }
  }
  return rows;
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path);
  out.precision(12);
  out << "b_max_mAh,alpha,panel_scale,p,lambda_minus,lambda_plus,throughput_pkt_s,outage_fraction,empty_fraction\n";
  for (const auto& r : rows) {
    out << r.b_max << ',' << r.alpha << ',' << r.scale << ',' << r.p << ',' << r.lambda_minus << ','
        << r.lambda_plus << ',' << r.throughput << ',' << r.outage << ',' << r.empty << '\n';
  }
}

void write_reward_curve_csv(const std::string& path, const Problem& problem, int samples) {
  const auto& range = problem.solver.range();
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path);
  out.precision(12);
  out << "u_mA,t_u_s,t_dc_s,duty_cycle,r_pkt_s\n";
  for (double u : uniform_grid(range.u_min, range.u_max, samples)) {
    const OperatingPoint op = problem.solver(u);
    out << u << ',' << op.t_u << ',' << op.t_dc << ',' << op.duty_cycle(problem.solver.coefficients().t_on)
        << ',' << problem.curve(u) << '\n';
  }
}

void write_lagrange_trace(const std::string& path, const std::vector<LagrangeStep>& trace) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path);
  out.precision(17);
  out << "lambda,cost\n";
  for (const auto& s : trace) out << s.lambda << ',' << s.cost << '\n';
}

}  // namespace ehopt
