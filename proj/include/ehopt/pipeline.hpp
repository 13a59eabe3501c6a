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

#ifndef EHOPT_PIPELINE_HPP_
#define EHOPT_PIPELINE_HPP_

#include <string>
#include <vector>

#include "ehopt/config.hpp"

namespace ehopt {

struct Problem {
  CorrectedSolver solver;
  RewardCurve curve;
};

Problem build_problem(const RunConfig& config);

P2Result solve_policy(const RunConfig& config, const Problem& problem);

StageFeed make_feed(const RunConfig& config, const EnergySourceModel& source);

SimReport simulate_policy(const RunConfig& config, const Problem& problem,
                          const MixedPolicy& policy);

SimReport simulate_kansal(const RunConfig& config, const Problem& problem);

HeteroReport simulate_heterogeneous(const RunConfig& config, const Problem& problem,
                                    const MixedPolicy& policy);

struct SweepRow {
  double b_max;
  double alpha;
  double scale;
  double p;
  double lambda_minus;
  double lambda_plus;
  double throughput;
  double outage;
  double empty;
};

std::vector<SweepRow> run_sweep(const RunConfig& config, const std::vector<double>& b_max,
                                const std::vector<double>& alpha,
                                const std::vector<double>& scale);

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);
void write_reward_curve_csv(const std::string& path, const Problem& problem, int samples);
void write_lagrange_trace(const std::string& path, const std::vector<LagrangeStep>& trace);

}  // namespace ehopt

#endif  // EHOPT_PIPELINE_HPP_
