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

#include "ehopt/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "ehopt/consumption_model.hpp"
#include "ehopt/errors.hpp"

namespace ehopt {
namespace {

constexpr double kSecondsPerHour = 3600.0;

double initial_level(const SimOptions& o, const BatteryConfig& b) {
  const double x = o.initial_battery < 0.0 ? b.b_max : o.initial_battery;
  if (x > b.b_max) fail(ErrorCode::kInvalidInput, "simulation: initial battery above b_max");
  return x;
}

void check_options(const SimOptions& o, const BatteryConfig& b) {
  b.validate();
  if (o.epochs < 0) fail(ErrorCode::kInvalidInput, "simulation: epochs must be >= 0");
  if (!(o.update_delay >= 0.0)) fail(ErrorCode::kInvalidInput, "simulation: update_delay must be >= 0");
}

// One epoch split into a delayed-control segment and the remainder.
struct EpochResult {
  double end = 0.0;
  double reward = 0.0;
  double above_zero = 0.0;
  double below_th = 0.0;
  double overflow = 0.0;
  double underflow = 0.0;
  double consumed = 0.0;
};

struct Piece {
  double dt;
  double u;
};

std::vector<Piece> split_epoch(double tau, double delay, double u_prev, double u) {
  if (delay > 0.0) {
    const double first = std::min(delay, tau);
    if (first >= tau) return {{tau, u_prev}};
    return {{first, u_prev}, {tau - first, u}};
  }
  return {{tau, u}};
}

EpochResult run_epoch(double x, double iota, const std::vector<Piece>& pieces, const RewardCurve& curve,
                      const BatteryConfig& b, double load_scale = 1.0) {
  EpochResult r;
  for (const auto& piece : pieces) {
    const double load = piece.u * load_scale;
    const Segment s = integrate_segment(x, iota, load, piece.dt, b);
    r.reward += curve(piece.u) * s.above_zero;
    r.above_zero += s.above_zero;
    r.below_th += s.below_th;
    r.overflow += s.overflow;
    r.underflow += s.underflow;
    r.consumed += load * piece.dt / kSecondsPerHour;
    x = s.end;
  }
  r.end = x;
  return r;
}

void account(SimReport& rep, double x0, const Stage& st, double u, const EpochResult& e,
             std::int64_t epoch, bool keep_log) {
  const double harvested = st.iota * st.tau / kSecondsPerHour;
  rep.total_time += st.tau;
  rep.total_reward += e.reward;
  rep.below_time += e.below_th;
  rep.empty_time += st.tau - e.above_zero;
  rep.harvested += harvested;
  rep.consumed += e.consumed;
  rep.overflow += e.overflow;
  rep.underflow += e.underflow;
  const double residual = (e.end - x0) - (harvested - e.consumed - e.overflow + e.underflow);
  rep.max_balance_error = std::max(rep.max_balance_error, std::abs(residual));
  rep.epochs = epoch + 1;
  rep.final_battery = e.end;
  if (keep_log) rep.log.push_back({epoch, st.state, u, st.tau, st.iota, x0, e.reward, e.below_th});
}

}  // namespace

StageFeed StageFeed::from_model(const EnergySourceModel& model, int initial_state) {
  model.state(initial_state);
  StageFeed f;
  f.model_ = &model;
  f.state_ = initial_state;
  return f;
}

StageFeed StageFeed::from_trace(std::vector<StageRecord> records) {
  StageFeed f;
  f.records_ = std::move(records);
  return f;
}

bool StageFeed::next(std::mt19937_64& rng, Stage& out) {
  if (model_) {
    out = sample_stage(*model_, state_, rng);
    state_ = out.next_state;
    return true;
  }
  if (pos_ >= records_.size()) return false;
  const StageRecord& r = records_[pos_++];
  out.state = r.state;
  out.tau = r.duration_s;
  out.iota = r.current_ma;
  out.next_state = pos_ < records_.size() ? records_[pos_].state : r.state;
  return true;
}

Segment integrate_segment(double x_b, double iota, double u, double dt, const BatteryConfig& b) {
  Segment s;
  const double d = (iota - u) * dt / kSecondsPerHour;
  s.above_zero = time_above_zero(d, dt, x_b);
  s.below_th = time_below_threshold(d, dt, x_b, b.b_th);
  const double raw = x_b + d;
  if (raw > b.b_max) s.overflow = raw - b.b_max;
  if (raw < 0.0) s.underflow = -raw;
  s.end = clamp_buffer(x_b, d, b.b_max);
  return s;
}

SimReport run_policy(const MixedPolicy& policy, const RewardCurve& curve, StageFeed feed,
                     const BatteryConfig& battery, const SimOptions& options) {
  check_options(options, battery);
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  SimReport rep;
  double x = initial_level(options, battery);
  rep.initial_battery = x;
  rep.final_battery = x;
  double u_prev = -1.0;
  Stage st;
  for (std::int64_t k = 0; k < options.epochs && feed.next(rng, st); ++k) {
    const bool use_minus = coin(rng) < policy.p;
    const double u = policy.control(use_minus, st.state, x);
    const auto pieces = split_epoch(st.tau, u_prev < 0.0 ? 0.0 : options.update_delay, u_prev, u);
    const EpochResult e = run_epoch(x, st.iota, pieces, curve, battery);
    account(rep, x, st, u, e, k, options.keep_log);
    x = e.end;
    u_prev = u;
  }
  return rep;
}

void BaselineConfig::validate() const {
  if (!(ewma_alpha > 0.0) || !(ewma_alpha < 1.0)) {
    fail(ErrorCode::kInvalidInput, "baseline: ewma_alpha must be in (0,1)");
  }
}

double EwmaPredictor::update(double observation) {
  value_ = ready_ ? weight_ * observation + (1.0 - weight_) * value_ : observation;
  ready_ = true;
  return value_;
}

SimReport run_kansal(const BaselineConfig& baseline, const RewardCurve& curve, StageFeed feed,
                     const BatteryConfig& battery, const SimOptions& options) {
  baseline.validate();
  check_options(options, battery);
  std::mt19937_64 rng(options.seed);
  EwmaPredictor predictor(baseline.ewma_alpha);
  SimReport rep;
  double x = initial_level(options, battery);
  rep.initial_battery = x;
  rep.final_battery = x;
  double u_prev = -1.0;
  Stage st;
  for (std::int64_t k = 0; k < options.epochs && feed.next(rng, st); ++k) {
    const double u = predictor.ready() ? std::clamp(predictor.value(), curve.u_min(), curve.u_max())
                                       : curve.u_min();
    const auto pieces = split_epoch(st.tau, u_prev < 0.0 ? 0.0 : options.update_delay, u_prev, u);
    const EpochResult e = run_epoch(x, st.iota, pieces, curve, battery);
    account(rep, x, st, u, e, k, options.keep_log);
    x = e.end;
    u_prev = u;
    predictor.update(st.iota);
  }
  return rep;
}

HeteroReport run_heterogeneous(const MixedPolicy& policy, const RewardCurve& curve,
                               const CorrectedSolver& solver, const NodePowerProfile& profile,
                               const std::vector<HeteroNode>& nodes, StageFeed feed,
                               const BatteryConfig& battery, const HeteroOptions& options) {
  const SimOptions& o = options.sim;
  check_options(o, battery);
  if (nodes.empty()) fail(ErrorCode::kInvalidInput, "heterogeneous: need at least one node");
  if (!(options.report_delay >= 0.0)) fail(ErrorCode::kInvalidInput, "heterogeneous: report_delay must be >= 0");
  for (const auto& n : nodes) {
    n.topo.validate();
    if (!(n.shading >= 0.0)) fail(ErrorCode::kInvalidInput, "heterogeneous: shading must be >= 0");
  }
  const std::size_t n_nodes = nodes.size();

  // Consumption of node k relative to the bottleneck at the operating point
  // chosen for u.
  std::map<double, std::vector<double>> ratio_cache;
  auto ratios = [&](double u) -> const std::vector<double>& {
    auto it = ratio_cache.find(u);
    if (it != ratio_cache.end()) return it->second;
    const OperatingPoint op = solver(u);
    std::vector<double> current(n_nodes);
    for (std::size_t k = 0; k < n_nodes; ++k) {
      double retx = retx_ratio_at(profile, nodes[k].topo, op.t_u, true);
      if (retx < 1.0) retx = profile.collision_free_retx_ratio();
      current[k] = output_current(profile, nodes[k].topo, op, retx);
    }
    std::vector<double> r(n_nodes);
    for (std::size_t k = 0; k < n_nodes; ++k) r[k] = current[k] / current[0];
    return ratio_cache.emplace(u, std::move(r)).first->second;
  };

  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  HeteroReport rep;
  rep.nodes.resize(n_nodes);
  std::vector<double> x(n_nodes, initial_level(o, battery));
  for (auto& r : rep.nodes) r.initial_battery = r.final_battery = x[0];
  rep.network.initial_battery = rep.network.final_battery = x[0];

  struct Previous {
    double start;
    double iota;
    std::vector<Piece> loads;  // u already scaled per node
  };
  std::vector<Previous> prev(n_nodes);
  bool have_prev = false;
  double prev_tau = 0.0;
  double u_prev = -1.0;

  auto reported_level = [&](std::size_t k) {
    if (!have_prev || options.report_delay <= 0.0) return x[k];
    double remaining = prev_tau - options.report_delay;
    double level = prev[k].start;
    for (const auto& piece : prev[k].loads) {
      if (remaining <= 0.0) break;
      const double dt = std::min(piece.dt, remaining);
      level = integrate_segment(level, prev[k].iota, piece.u, dt, battery).end;
      remaining -= dt;
    }
    return level;
  };

  Stage st;
  for (std::int64_t e = 0; e < o.epochs && feed.next(rng, st); ++e) {
    const bool use_minus = coin(rng) < policy.p;
    double reported = reported_level(0);
    for (std::size_t k = 1; k < n_nodes; ++k) reported = std::min(reported, reported_level(k));
    const double u = policy.control(use_minus, st.state, reported);
    const auto pieces = split_epoch(st.tau, u_prev < 0.0 ? 0.0 : o.update_delay, u_prev, u);

    std::vector<std::vector<Segment>> segs(n_nodes);
    std::vector<std::vector<double>> starts(n_nodes);
    for (std::size_t k = 0; k < n_nodes; ++k) {
      const double iota = st.iota * nodes[k].shading;
      Stage local = st;
      local.iota = iota;
      EpochResult er;
      double level = x[k];
      prev[k] = {x[k], iota, {}};
      for (const auto& piece : pieces) {
        const double scale = ratios(piece.u)[k];
        prev[k].loads.push_back({piece.dt, piece.u * scale});
        const Segment s = integrate_segment(level, iota, piece.u * scale, piece.dt, battery);
        segs[k].push_back(s);
        starts[k].push_back(level);
        er.reward += curve(piece.u) * s.above_zero;
        er.above_zero += s.above_zero;
        er.below_th += s.below_th;
        er.overflow += s.overflow;
        er.underflow += s.underflow;
        er.consumed += piece.u * scale * piece.dt / kSecondsPerHour;
        level = s.end;
      }
      er.end = level;
      account(rep.nodes[k], x[k], local, u, er, e, o.keep_log);
      x[k] = level;
    }
    // The network delivers while every node is alive and is in outage while
    // any node is below threshold. Levels move monotonically within a piece,
    // so each node's low stretch is a prefix (charging) or a suffix.
    EpochResult net;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      double alive = segs[0][i].above_zero;
      double prefix = 0.0, suffix = 0.0;
      for (std::size_t k = 0; k < n_nodes; ++k) {
        const Segment& sg = segs[k][i];
        alive = std::min(alive, sg.above_zero);
        if (sg.end > starts[k][i] || sg.below_th >= pieces[i].dt) {
          prefix = std::max(prefix, sg.below_th);
        } else {
          suffix = std::max(suffix, sg.below_th);
        }
      }
      net.reward += curve(pieces[i].u) * alive;
      net.above_zero += alive;
      net.below_th += std::min(pieces[i].dt, prefix + suffix);
    }
    SimReport& nr = rep.network;
    nr.total_time += st.tau;
    nr.total_reward += net.reward;
    nr.empty_time += st.tau - net.above_zero;
    nr.below_time += net.below_th;
    nr.epochs = e + 1;
    nr.final_battery = *std::min_element(x.begin(), x.end());
    if (o.keep_log) nr.log.push_back({e, st.state, u, st.tau, st.iota, reported, net.reward, net.below_th});
    have_prev = true;
    prev_tau = st.tau;
    u_prev = u;
  }
  return rep;
}

void write_report_csv(std::ostream& out, const SimReport& r) {
  out.precision(12);
  out << "epoch,state,u_mA,tau_s,iota_mA,battery_mAh,reward,below_th_s\n";
  for (const auto& e : r.log) {
    out << e.epoch << ',' << e.state << ',' << e.u << ',' << e.tau << ',' << e.iota << ','
        << e.battery << ',' << e.reward << ',' << e.below_th << '\n';
  }
}

void write_summary_csv(std::ostream& out, const SimReport& r, bool header) {
  out.precision(12);
  if (header) {
    out << "epochs,total_time_s,throughput_pkt_s,outage_fraction,empty_fraction,harvested_mAh,"
           "consumed_mAh,overflow_mAh,underflow_mAh,final_battery_mAh\n";
  }
  out << r.epochs << ',' << r.total_time << ',' << r.throughput() << ',' << r.outage_fraction() << ','
      << r.empty_fraction() << ',' << r.harvested << ',' << r.consumed << ',' << r.overflow << ','
      << r.underflow << ',' << r.final_battery << '\n';
}

}  // namespace ehopt
