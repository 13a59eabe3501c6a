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

#ifndef EHOPT_ENERGY_SOURCE_HPP_
#define EHOPT_ENERGY_SOURCE_HPP_

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace ehopt {

// Piecewise-constant density on bins [edges[i], edges[i+1]] carrying
// masses[i]. A zero-width bin is a point mass.
class Histogram {
 public:
  Histogram() = default;
  Histogram(std::vector<double> edges, std::vector<double> masses);

  static Histogram point_mass(double x);
  static Histogram uniform(double lo, double hi, int bins = 1);
  // Normal(mean, sigma) truncated to [lo, hi], binned uniformly.
  static Histogram truncated_normal(double mean, double sigma, double lo,
                                    double hi, int bins);

  std::size_t size() const { return masses_.size(); }
  double lo() const { return edges_.front(); }
  double hi() const { return edges_.back(); }
  const std::vector<double>& edges() const { return edges_; }
  const std::vector<double>& masses() const { return masses_; }

  double mean() const;
  double total_mass() const;
  double cdf(double x) const;
  // Probability of [a, b] assuming uniform density within each bin.
  double mass_between(double a, double b) const;

  // Midpoint-rule nodes: each bin is split into sub-intervals, n nodes in
  // total (at least one per bin). Weights sum to the total mass.
  struct Node {
    double x;
    double w;
  };
  std::vector<Node> nodes(int n) const;

  double sample(std::mt19937_64& rng) const;

  // Same bins re-weighted so that the masses sum to one.
  Histogram normalized() const;
  // Histogram of k*X.
  Histogram scaled(double k) const;
  // Mass re-binned onto the given uniform edges over [lo, hi].
  Histogram rebinned(double lo, double hi, int bins) const;

 private:
  std::vector<double> edges_{0.0, 0.0};
  std::vector<double> masses_{1.0};
  std::vector<double> cumulative_{1.0};
};

// Charge-variation density of one stage, in mAh.
using ChargeDeltaPdf = Histogram;

struct SourceState {
  std::string name;
  Histogram duration;  // s
  Histogram current;   // mA
};

class EnergySourceModel {
 public:
  EnergySourceModel() = default;
  EnergySourceModel(std::vector<std::vector<double>> transition,
                    std::vector<SourceState> states);

  int n_states() const { return static_cast<int>(states_.size()); }
  const SourceState& state(int s) const;
  double transition(int from, int to) const;
  const std::vector<std::vector<double>>& transition_matrix() const { return p_; }

  // Stationary distribution of the embedded (stage-indexed) chain.
  const std::vector<double>& stationary() const { return pi_; }
  // Mean stage duration T under the stationary embedded chain.
  double mean_stage_duration() const { return mean_duration_; }

  // Copy with every harvested current multiplied by k.
  EnergySourceModel with_scaled_current(double k) const;

 private:
  std::vector<std::vector<double>> p_;
  std::vector<SourceState> states_;
  std::vector<double> pi_;
  double mean_duration_ = 0.0;
};

struct ShadingMixture {
  std::vector<double> scale;   // p_k
  std::vector<double> weight;  // f_rho(p_k)

  void validate() const;
  static ShadingMixture none() { return {{1.0}, {1.0}}; }
};

struct DeltaOptions {
  int tau_nodes = 256;
  int bins = 512;
};

// Density of tau * (iota - u) / 3600 for source state s. When edges_lo <
// edges_hi the result is laid on that common grid with opts.bins bins.
ChargeDeltaPdf charge_delta_pdf(const EnergySourceModel& model, int s, double u,
                                const DeltaOptions& opts = {},
                                double grid_lo = 0.0, double grid_hi = 0.0);

ChargeDeltaPdf mixture_delta_pdf(const EnergySourceModel& model,
                                 const ShadingMixture& mixture, int s, double u,
                                 const DeltaOptions& opts = {});

double mixture_mean_current(const EnergySourceModel& model,
                            const ShadingMixture& mixture, int s);

struct Stage {
  int state = 0;
  double tau = 0.0;   // s
  double iota = 0.0;  // mA
  int next_state = 0;
};

Stage sample_stage(const EnergySourceModel& model, int s, std::mt19937_64& rng);

struct DayNightParams {
  double day_mean_current = 12.0;  // mA
  double day_current_sigma = 5.0;  // mA
  double day_hours = 12.0;
  double night_hours = 12.0;
  double hours_spread = 2.0;       // durations span +/- spread
  double night_current = 0.0;      // mA
  int bins = 64;
};

EnergySourceModel synthetic_day_night(const DayNightParams& params);

// Stage-trace records, CSV header epoch_index,state,duration_s,current_mA.
struct StageRecord {
  std::int64_t epoch = 0;
  int state = 0;
  double duration_s = 0.0;
  double current_ma = 0.0;
};

std::vector<StageRecord> read_stage_trace(std::istream& in);
std::vector<StageRecord> read_stage_trace_file(const std::string& path);
void write_stage_trace(std::ostream& out, const std::vector<StageRecord>& records);

// Histograms with `bins` bins per state and transition counts.
EnergySourceModel fit_source_from_trace(const std::vector<StageRecord>& records,
                                        int bins = 32);

// JSON model file: {"transition": [[...]], "states": [{"name", "duration":
// {"edges", "masses"}, "current": {...}}]}.
EnergySourceModel load_source_model(const std::string& path);
void save_source_model(const EnergySourceModel& model, const std::string& path);

}  // namespace ehopt

#endif  // EHOPT_ENERGY_SOURCE_HPP_
