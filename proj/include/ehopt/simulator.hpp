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

#ifndef EHOPT_SIMULATOR_HPP_
#define EHOPT_SIMULATOR_HPP_

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include "ehopt/cmdp_solver.hpp"
#include "ehopt/energy_source.hpp"
#include "ehopt/operating_point.hpp"

namespace ehopt {

// Stages drawn from a model or replayed from a trace.
class StageFeed {
 public:
  static StageFeed from_model(const EnergySourceModel& model, int initial_state = 0);
  static StageFeed from_trace(std::vector<StageRecord> records);

  // False once a trace is exhausted.
  bool next(std::mt19937_64& rng, Stage& out);

 private:
  const EnergySourceModel* model_ = nullptr;
  int state_ = 0;
  std::vector<StageRecord> records_;
  std::size_t pos_ = 0;
};

struct SimOptions {
  std::int64_t epochs = 10000;
  std::uint64_t seed = 1;
  double update_delay = 0.0;     // s the previous control stays applied
  double initial_battery = -1.0; // mAh, negative means b_max
  bool keep_log = true;
};

struct EpochLog {
  std::int64_t epoch = 0;
  int state = 0;
  double u = 0.0;        // mA
  double tau = 0.0;      // s
  double iota = 0.0;     // mA
  double battery = 0.0;  // mAh at the start of the epoch
  double reward = 0.0;   // packets
  double below_th = 0.0; // s
};

struct SimReport {
  std::int64_t epochs = 0;
  double total_time = 0.0;     // s
  double total_reward = 0.0;   // packets
  double below_time = 0.0;     // s below b_th
  double empty_time = 0.0;     // s at zero charge
  double harvested = 0.0;      // mAh
  double consumed = 0.0;       // mAh requested by the load
  double overflow = 0.0;       // mAh lost to a full buffer
  double underflow = 0.0;      // mAh requested but not available
  double initial_battery = 0.0;
  double final_battery = 0.0;
  double max_balance_error = 0.0;  // worst per-epoch energy identity residual
  std::vector<EpochLog> log;

  double throughput() const { return total_time > 0.0 ? total_reward / total_time : 0.0; }
  double outage_fraction() const { return total_time > 0.0 ? below_time / total_time : 0.0; }
  double empty_fraction() const { return total_time > 0.0 ? empty_time / total_time : 0.0; }
};

// Outcome of draining/charging a buffer at a constant net rate.
struct Segment {
  double above_zero = 0.0;
  double below_th = 0.0;
  double overflow = 0.0;
  double underflow = 0.0;
  double end = 0.0;
};

Segment integrate_segment(double x_b, double iota, double u, double dt,
                          const BatteryConfig& battery);

SimReport run_policy(const MixedPolicy& policy, const RewardCurve& curve,
                     StageFeed feed, const BatteryConfig& battery,
                     const SimOptions& options);

struct BaselineConfig {
  double ewma_alpha = 0.5;
  void validate() const;
};

class EwmaPredictor {
 public:
  explicit EwmaPredictor(double weight) : weight_(weight) {}
  double update(double observation);
  bool ready() const { return ready_; }
  double value() const { return value_; }

 private:
  double weight_;
  double value_ = 0.0;
  bool ready_ = false;
};

// Slot = stage. Consumption follows the predicted harvest clamped to the
// control range; the first slot runs at u_min.
SimReport run_kansal(const BaselineConfig& baseline, const RewardCurve& curve,
                     StageFeed feed, const BatteryConfig& battery,
                     const SimOptions& options);

struct HeteroNode {
  double shading = 1.0;
  TopologyParams topo;
};

struct HeteroOptions {
  SimOptions sim;
  double report_delay = 0.0;  // s of staleness in the reported battery levels
};

struct HeteroReport {
  SimReport network;            // reward counted while every node is alive
  std::vector<SimReport> nodes;
};

// Node 0 is taken as the bottleneck whose consumption equals u.
HeteroReport run_heterogeneous(const MixedPolicy& policy, const RewardCurve& curve,
                               const CorrectedSolver& solver,
                               const NodePowerProfile& profile,
                               const std::vector<HeteroNode>& nodes,
                               StageFeed feed, const BatteryConfig& battery,
                               const HeteroOptions& options);

void write_report_csv(std::ostream& out, const SimReport& report);
void write_summary_csv(std::ostream& out, const SimReport& report, bool header = true);

}  // namespace ehopt

#endif  // EHOPT_SIMULATOR_HPP_
