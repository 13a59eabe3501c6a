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

#include "ehopt/energy_source.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "ehopt/errors.hpp"

namespace ehopt {
namespace {

constexpr double kSecondsPerHour = 3600.0;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Adds a uniform mass on [a, b] (a point mass when a == b) onto uniform bins
// of width h starting at lo.
void spread_uniform(double a, double b, double mass, double lo, double h,
                    std::vector<double>& out) {
  const int n = static_cast<int>(out.size());
  auto bin_of = [&](double x) {
    return std::clamp(static_cast<int>(std::floor((x - lo) / h)), 0, n - 1);
  };
  if (!(b - a > 1e-12 * h)) {
    out[static_cast<std::size_t>(bin_of(0.5 * (a + b)))] += mass;
    return;
  }
  const int first = bin_of(a);
  const int last = bin_of(b);
  const double density = mass / (b - a);
  double placed = 0.0;
  for (int k = first; k <= last; ++k) {
    const double left = std::max(a, lo + k * h);
    const double right = k == last ? b : std::min(b, lo + (k + 1) * h);
    const double part = k == last ? mass - placed : density * std::max(0.0, right - left);
    out[static_cast<std::size_t>(k)] += part;
    placed += part;
  }
}

ChargeDeltaPdf delta_pdf_impl(const Histogram& tau, const Histogram& iota, double u,
                              const DeltaOptions& opts, double lo, double hi) {
  if (!(tau.lo() > 0.0)) {
    fail(ErrorCode::kDegenerateSupport, "charge_delta_pdf: duration support must be > 0");
  }
  if (!(hi > lo)) {
    // Deterministic stage: both factors are point masses.
    return Histogram::point_mass(tau.mean() * (iota.mean() - u) / kSecondsPerHour);
  }
  const double h = (hi - lo) / opts.bins;
  std::vector<double> masses(static_cast<std::size_t>(opts.bins), 0.0);
  const auto& ie = iota.edges();
  const auto& im = iota.masses();
  for (const auto& node : tau.nodes(opts.tau_nodes)) {
    const double k = node.x / kSecondsPerHour;
    for (std::size_t i = 0; i < im.size(); ++i) {
      if (im[i] == 0.0) continue;
      spread_uniform(k * (ie[i] - u), k * (ie[i + 1] - u), node.w * im[i], lo, h, masses);
    }
  }
  std::vector<double> edges(static_cast<std::size_t>(opts.bins) + 1);
  for (int k = 0; k <= opts.bins; ++k) edges[static_cast<std::size_t>(k)] = lo + k * h;
  edges.back() = hi;
  return Histogram(std::move(edges), std::move(masses));
}

std::pair<double, double> delta_bounds(const Histogram& tau, const Histogram& iota, double u) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double t : {tau.lo(), tau.hi()}) {
    for (double i : {iota.lo(), iota.hi()}) {
      const double d = t * (i - u) / kSecondsPerHour;
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  }
  if (hi - lo <= 1e-12 * std::max(1.0, std::abs(lo))) hi = lo;
  return {lo, hi};
}

}  // namespace

Histogram::Histogram(std::vector<double> edges, std::vector<double> masses)
    : edges_(std::move(edges)), masses_(std::move(masses)) {
  if (masses_.empty() || edges_.size() != masses_.size() + 1) {
    fail(ErrorCode::kInvalidInput, "histogram: need n masses and n+1 edges");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < masses_.size(); ++i) {
    if (!std::isfinite(edges_[i]) || !std::isfinite(edges_[i + 1]) || edges_[i + 1] < edges_[i]) {
      fail(ErrorCode::kInvalidInput, "histogram: edges must be finite and nondecreasing");
    }
    if (!(masses_[i] >= 0.0)) fail(ErrorCode::kInvalidInput, "histogram: negative mass");
    total += masses_[i];
  }
  if (!(total > 0.0)) fail(ErrorCode::kInvalidInput, "histogram: zero total mass");
  cumulative_.resize(masses_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < masses_.size(); ++i) {
    masses_[i] /= total;
    acc += masses_[i];
    cumulative_[i] = acc;
  }
  cumulative_.back() = 1.0;
}

Histogram Histogram::point_mass(double x) { return Histogram({x, x}, {1.0}); }

Histogram Histogram::uniform(double lo, double hi, int bins) {
  if (!(hi >= lo) || bins < 1) fail(ErrorCode::kInvalidInput, "uniform histogram: bad bounds");
  if (hi == lo) return point_mass(lo);
  std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
  for (int k = 0; k <= bins; ++k) edges[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / bins;
  edges.back() = hi;
  return Histogram(std::move(edges), std::vector<double>(static_cast<std::size_t>(bins), 1.0));
}

Histogram Histogram::truncated_normal(double mean, double sigma, double lo, double hi, int bins) {
  if (!(hi >= lo) || bins < 1 || !(sigma >= 0.0)) {
    fail(ErrorCode::kInvalidInput, "truncated_normal: bad parameters");
  }
  if (sigma == 0.0 || hi == lo) return point_mass(std::clamp(mean, lo, hi));
  std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
  std::vector<double> masses(static_cast<std::size_t>(bins));
  for (int k = 0; k <= bins; ++k) edges[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / bins;
  edges.back() = hi;
  for (std::size_t k = 0; k < masses.size(); ++k) {
    masses[k] = normal_cdf((edges[k + 1] - mean) / sigma) - normal_cdf((edges[k] - mean) / sigma);
  }
  return Histogram(std::move(edges), std::move(masses));
}

double Histogram::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < masses_.size(); ++i) m += masses_[i] * 0.5 * (edges_[i] + edges_[i + 1]);
  return m;
}

double Histogram::total_mass() const {
  return std::accumulate(masses_.begin(), masses_.end(), 0.0);
}

double Histogram::cdf(double x) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < masses_.size(); ++i) {
    const double a = edges_[i];
    const double b = edges_[i + 1];
    if (x >= b) {
      acc += masses_[i];
    } else if (x > a) {
      acc += masses_[i] * (x - a) / (b - a);
    }
  }
  return std::min(acc, 1.0);
}

double Histogram::mass_between(double a, double b) const {
  if (b < a) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < masses_.size(); ++i) {
    const double lo = edges_[i];
    const double hi = edges_[i + 1];
    if (hi == lo) {
      if (lo >= a && lo <= b) acc += masses_[i];
      continue;
    }
    const double overlap = std::min(b, hi) - std::max(a, lo);
    if (overlap > 0.0) acc += masses_[i] * overlap / (hi - lo);
  }
  return acc;
}

std::vector<Histogram::Node> Histogram::nodes(int n) const {
  const int per_bin = std::max(1, n / static_cast<int>(masses_.size()));
  std::vector<Node> out;
  out.reserve(masses_.size() * static_cast<std::size_t>(per_bin));
  for (std::size_t i = 0; i < masses_.size(); ++i) {
    if (masses_[i] == 0.0) continue;
    const double a = edges_[i];
    const double b = edges_[i + 1];
    if (b == a) {
      out.push_back({a, masses_[i]});
      continue;
    }
    for (int k = 0; k < per_bin; ++k) {
      out.push_back({a + (b - a) * (k + 0.5) / per_bin, masses_[i] / per_bin});
    }
  }
  return out;
}

double Histogram::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double v = unit(rng);
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), v);
  if (it == cumulative_.end()) --it;
  const std::size_t i = static_cast<std::size_t>(it - cumulative_.begin());
  const double a = edges_[i];
  const double b = edges_[i + 1];
  return b == a ? a : a + (b - a) * unit(rng);
}

Histogram Histogram::normalized() const { return Histogram(edges_, masses_); }

Histogram Histogram::scaled(double k) const {
  if (!(k >= 0.0)) fail(ErrorCode::kInvalidInput, "histogram scale must be >= 0");
  if (k == 0.0) return point_mass(0.0);
  std::vector<double> e(edges_);
  for (double& x : e) x *= k;
  return Histogram(std::move(e), masses_);
}

Histogram Histogram::rebinned(double lo, double hi, int bins) const {
  if (!(hi > lo) || bins < 1) fail(ErrorCode::kInvalidInput, "rebinned: bad grid");
  const double h = (hi - lo) / bins;
  std::vector<double> out(static_cast<std::size_t>(bins), 0.0);
  for (std::size_t i = 0; i < masses_.size(); ++i) {
    spread_uniform(edges_[i], edges_[i + 1], masses_[i], lo, h, out);
  }
  std::vector<double> e(static_cast<std::size_t>(bins) + 1);
  for (int k = 0; k <= bins; ++k) e[static_cast<std::size_t>(k)] = lo + k * h;
  e.back() = hi;
  return Histogram(std::move(e), std::move(out));
}

EnergySourceModel::EnergySourceModel(std::vector<std::vector<double>> transition,
                                     std::vector<SourceState> states)
    : p_(std::move(transition)), states_(std::move(states)) {
  const std::size_t n = states_.size();
  if (n == 0 || p_.size() != n) fail(ErrorCode::kInvalidInput, "source: transition matrix size mismatch");
  for (const auto& row : p_) {
    if (row.size() != n) fail(ErrorCode::kInvalidInput, "source: transition matrix must be square");
    double sum = 0.0;
    for (double v : row) {
      if (!(v >= 0.0)) fail(ErrorCode::kInvalidInput, "source: negative transition probability");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) fail(ErrorCode::kInvalidInput, "source: rows must sum to 1");
  }
  for (const auto& st : states_) {
    if (!(st.duration.lo() > 0.0)) {
      fail(ErrorCode::kDegenerateSupport, "source: duration support must be > 0");
    }
    if (st.current.lo() < 0.0) fail(ErrorCode::kInvalidInput, "source: negative current support");
  }

  // pi (P - I) = 0 with sum(pi) = 1 replacing the last equation.
  std::vector<std::vector<double>> m(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m[i][j] = p_[j][i] - (i == j ? 1.0 : 0.0);
  }
  for (std::size_t j = 0; j < n; ++j) m[n - 1][j] = 1.0;
  m[n - 1][n] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    }
    if (std::abs(m[piv][c]) < 1e-14) fail(ErrorCode::kInvalidInput, "source: chain has no unique stationary law");
    std::swap(m[c], m[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = m[r][c] / m[c][c];
      for (std::size_t k = c; k <= n; ++k) m[r][k] -= f * m[c][k];
    }
  }
  pi_.resize(n);
  for (std::size_t i = 0; i < n; ++i) pi_[i] = std::max(0.0, m[i][n] / m[i][i]);
  const double total = std::accumulate(pi_.begin(), pi_.end(), 0.0);
  for (double& v : pi_) v /= total;
  for (std::size_t i = 0; i < n; ++i) mean_duration_ += pi_[i] * states_[i].duration.mean();
}

const SourceState& EnergySourceModel::state(int s) const {
  if (s < 0 || s >= n_states()) fail(ErrorCode::kInvalidInput, "source: state index out of range");
  return states_[static_cast<std::size_t>(s)];
}

double EnergySourceModel::transition(int from, int to) const {
  state(from);
  state(to);
  return p_[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)];
}

EnergySourceModel EnergySourceModel::with_scaled_current(double k) const {
  std::vector<SourceState> st(states_);
  for (auto& s : st) s.current = s.current.scaled(k);
  return EnergySourceModel(p_, std::move(st));
}

void ShadingMixture::validate() const {
  if (scale.empty() || scale.size() != weight.size()) {
    fail(ErrorCode::kInvalidInput, "shading mixture: scale/weight size mismatch");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < scale.size(); ++k) {
    if (!(scale[k] >= 0.0) || !(weight[k] >= 0.0)) {
      fail(ErrorCode::kInvalidInput, "shading mixture: negative entry");
    }
    sum += weight[k];
  }
  if (std::abs(sum - 1.0) > 1e-9) fail(ErrorCode::kInvalidInput, "shading mixture: weights must sum to 1");
}

ChargeDeltaPdf charge_delta_pdf(const EnergySourceModel& model, int s, double u,
                                const DeltaOptions& opts, double grid_lo, double grid_hi) {
  if (!(u >= 0.0)) fail(ErrorCode::kInvalidInput, "charge_delta_pdf: u must be >= 0");
  if (opts.bins < 1 || opts.tau_nodes < 1) fail(ErrorCode::kInvalidInput, "charge_delta_pdf: bad options");
  const SourceState& st = model.state(s);
  if (grid_hi > grid_lo) return delta_pdf_impl(st.duration, st.current, u, opts, grid_lo, grid_hi);
  const auto [lo, hi] = delta_bounds(st.duration, st.current, u);
  return delta_pdf_impl(st.duration, st.current, u, opts, lo, hi);
}

ChargeDeltaPdf mixture_delta_pdf(const EnergySourceModel& model, const ShadingMixture& mixture,
                                 int s, double u, const DeltaOptions& opts) {
  mixture.validate();
  const SourceState& st = model.state(s);
  std::vector<Histogram> currents;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double k : mixture.scale) {
    currents.push_back(st.current.scaled(k));
    const auto [a, b] = delta_bounds(st.duration, currents.back(), u);
    lo = std::min(lo, a);
    hi = std::max(hi, b);
  }
  if (!(hi > lo)) return delta_pdf_impl(st.duration, currents.front(), u, opts, lo, hi);
  std::vector<double> masses(static_cast<std::size_t>(opts.bins), 0.0);
  std::vector<double> edges;
  for (std::size_t k = 0; k < currents.size(); ++k) {
    if (mixture.weight[k] == 0.0) continue;
    const Histogram part = delta_pdf_impl(st.duration, currents[k], u, opts, lo, hi);
    for (std::size_t i = 0; i < masses.size(); ++i) masses[i] += mixture.weight[k] * part.masses()[i];
    edges = part.edges();
  }
  return Histogram(std::move(edges), std::move(masses));
}

double mixture_mean_current(const EnergySourceModel& model, const ShadingMixture& mixture, int s) {
  mixture.validate();
  double m = 0.0;
  for (std::size_t k = 0; k < mixture.scale.size(); ++k) {
    m += mixture.weight[k] * mixture.scale[k] * model.state(s).current.mean();
  }
  return m;
}

Stage sample_stage(const EnergySourceModel& model, int s, std::mt19937_64& rng) {
  const SourceState& st = model.state(s);
  Stage out;
  out.state = s;
  out.tau = st.duration.sample(rng);
  out.iota = st.current.sample(rng);
  const auto& row = model.transition_matrix()[static_cast<std::size_t>(s)];
  std::discrete_distribution<int> next(row.begin(), row.end());
  out.next_state = next(rng);
  return out;
}

EnergySourceModel synthetic_day_night(const DayNightParams& p) {
  if (!(p.day_hours > 0.0) || !(p.night_hours > 0.0) || !(p.hours_spread >= 0.0) ||
      !(p.day_hours - p.hours_spread > 0.0) || !(p.night_hours - p.hours_spread > 0.0)) {
    fail(ErrorCode::kInvalidInput, "synthetic_day_night: durations must stay positive");
  }
  if (!(p.day_mean_current >= 0.0) || !(p.day_current_sigma >= 0.0) || !(p.night_current >= 0.0) ||
      p.bins < 1) {
    fail(ErrorCode::kInvalidInput, "synthetic_day_night: bad current parameters");
  }
  auto duration = [&](double hours) {
    const double mean = hours * kSecondsPerHour;
    const double spread = p.hours_spread * kSecondsPerHour;
    return Histogram::truncated_normal(mean, spread / 2.0, mean - spread, mean + spread, p.bins);
  };
  const double sigma = p.day_current_sigma;
  SourceState day{"day", duration(p.day_hours),
                  Histogram::truncated_normal(p.day_mean_current, sigma,
                                              std::max(0.0, p.day_mean_current - 3 * sigma),
                                              p.day_mean_current + 3 * sigma, p.bins)};
  SourceState night{"night", duration(p.night_hours), Histogram::point_mass(p.night_current)};
  return EnergySourceModel({{0.0, 1.0}, {1.0, 0.0}}, {day, night});
}

std::vector<StageRecord> read_stage_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::kTraceFormat, "trace: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "epoch_index,state,duration_s,current_mA") {
    fail(ErrorCode::kTraceFormat, "trace line 1: expected header epoch_index,state,duration_s,current_mA");
  }
  std::vector<StageRecord> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field[4];
    for (int k = 0; k < 4; ++k) {
      if (!std::getline(row, field[k], ',')) {
        fail(ErrorCode::kTraceFormat, "trace line " + std::to_string(line_no) + ": expected 4 fields");
      }
    }
    std::string extra;
    if (std::getline(row, extra)) {
      fail(ErrorCode::kTraceFormat, "trace line " + std::to_string(line_no) + ": too many fields");
    }
    StageRecord r;
    try {
      std::size_t used = 0;
      r.epoch = std::stoll(field[0], &used);
      if (used != field[0].size()) throw std::invalid_argument("epoch");
      r.state = std::stoi(field[1], &used);
      if (used != field[1].size()) throw std::invalid_argument("state");
      r.duration_s = std::stod(field[2], &used);
      if (used != field[2].size()) throw std::invalid_argument("duration");
      r.current_ma = std::stod(field[3], &used);
      if (used != field[3].size()) throw std::invalid_argument("current");
    } catch (const std::exception&) {
      fail(ErrorCode::kTraceFormat, "trace line " + std::to_string(line_no) + ": malformed number");
    }
    if (r.state < 0 || !(r.duration_s > 0.0) || !(r.current_ma >= 0.0) ||
        !std::isfinite(r.duration_s) || !std::isfinite(r.current_ma)) {
      fail(ErrorCode::kTraceFormat, "trace line " + std::to_string(line_no) + ": value out of range");
    }
    out.push_back(r);
  }
  return out;
}

std::vector<StageRecord> read_stage_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot open trace " + path);
  return read_stage_trace(in);
}

void write_stage_trace(std::ostream& out, const std::vector<StageRecord>& records) {
  out << "epoch_index,state,duration_s,current_mA\n";
  out.precision(17);
  for (const auto& r : records) {
    out << r.epoch << ',' << r.state << ',' << r.duration_s << ',' << r.current_ma << '\n';
  }
}

EnergySourceModel fit_source_from_trace(const std::vector<StageRecord>& records, int bins) {
  if (records.empty()) fail(ErrorCode::kTraceFormat, "trace: no records to fit");
  int n = 0;
  for (const auto& r : records) n = std::max(n, r.state + 1);
  const auto ns = static_cast<std::size_t>(n);
  std::vector<std::vector<double>> counts(ns, std::vector<double>(ns, 0.0));
  for (std::size_t k = 1; k < records.size(); ++k) {
    counts[static_cast<std::size_t>(records[k - 1].state)][static_cast<std::size_t>(records[k].state)] += 1.0;
  }
  std::vector<SourceState> states;
  for (std::size_t s = 0; s < ns; ++s) {
    double row = std::accumulate(counts[s].begin(), counts[s].end(), 0.0);
    if (row == 0.0) {
      counts[s][s] = 1.0;
      row = 1.0;
    }
    for (double& v : counts[s]) v /= row;

    std::vector<double> tau, iota;
    for (const auto& r : records) {
      if (static_cast<std::size_t>(r.state) != s) continue;
      tau.push_back(r.duration_s);
      iota.push_back(r.current_ma);
    }
    if (tau.empty()) fail(ErrorCode::kTraceFormat, "trace: state " + std::to_string(s) + " never observed");
    auto fit = [bins](const std::vector<double>& xs) {
      const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
      if (*mx - *mn <= 1e-12 * std::max(1.0, std::abs(*mx))) return Histogram::point_mass(*mn);
      const double h = (*mx - *mn) / bins;
      std::vector<double> m(static_cast<std::size_t>(bins), 0.0);
      for (double x : xs) {
        m[static_cast<std::size_t>(std::clamp(static_cast<int>((x - *mn) / h), 0, bins - 1))] += 1.0;
      }
      std::vector<double> e(static_cast<std::size_t>(bins) + 1);
      for (int k = 0; k <= bins; ++k) e[static_cast<std::size_t>(k)] = *mn + k * h;
      e.back() = *mx;
      return Histogram(std::move(e), std::move(m));
    };
    states.push_back({"s" + std::to_string(s), fit(tau), fit(iota)});
  }
  return EnergySourceModel(std::move(counts), std::move(states));
}

namespace {

Histogram histogram_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("edges") || !j.contains("masses")) {
    fail(ErrorCode::kConfigError, where + ": expected {\"edges\", \"masses\"}");
  }
  for (const auto& [key, _] : j.items()) {
    if (key != "edges" && key != "masses") fail(ErrorCode::kConfigError, where + ": unknown key " + key);
  }
  try {
    return Histogram(j.at("edges").get<std::vector<double>>(), j.at("masses").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kConfigError, where + ": " + e.what());
  } catch (const Error& e) {
    fail(ErrorCode::kConfigError, where + ": " + e.what());
  }
}

nlohmann::json histogram_to_json(const Histogram& h) {
  return {{"edges", h.edges()}, {"masses", h.masses()}};
}

}  // namespace

EnergySourceModel load_source_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot open source model " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kConfigError, path + ": " + e.what());
  }
  if (!j.contains("transition") || !j.contains("states")) {
    fail(ErrorCode::kConfigError, path + ": missing transition or states");
  }
  std::vector<SourceState> states;
  std::size_t idx = 0;
  for (const auto& s : j.at("states")) {
    const std::string where = path + ": states[" + std::to_string(idx++) + "]";
    if (!s.contains("duration") || !s.contains("current")) {
      fail(ErrorCode::kConfigError, where + ": missing duration or current");
    }
    states.push_back({s.value("name", std::string("s") + std::to_string(idx - 1)),
                      histogram_from_json(s.at("duration"), where + ".duration"),
                      histogram_from_json(s.at("current"), where + ".current")});
  }
  try {
    return EnergySourceModel(j.at("transition").get<std::vector<std::vector<double>>>(), std::move(states));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kConfigError, path + ": " + e.what());
  }
}

void save_source_model(const EnergySourceModel& model, const std::string& path) {
  nlohmann::json j;
  j["transition"] = model.transition_matrix();
  j["states"] = nlohmann::json::array();
  for (int s = 0; s < model.n_states(); ++s) {
    const auto& st = model.state(s);
    j["states"].push_back({{"name", st.name},
                           {"duration", histogram_to_json(st.duration)},
                           {"current", histogram_to_json(st.current)}});
  }
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIoError, "cannot write source model " + path);
  out << j.dump(2) << '\n';
}

}  // namespace ehopt
