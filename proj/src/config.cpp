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

#include "ehopt/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ehopt/errors.hpp"

namespace ehopt {
namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& origin, const std::string& field,
                               const std::string& what) {
  fail(ErrorCode::kConfigError, origin + ": " + field + ": " + what);
}

// Object view that tracks consumed keys so leftovers can be rejected.
class Section {
 public:
  Section(const json& j, std::string path, const std::string& origin)
      : j_(j), path_(std::move(path)), origin_(origin) {
    if (!j_.is_object()) config_error(origin_, path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  double number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) config_error(origin_, field(key), "expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) {
    return has(key) ? number(key) : (used_.insert(key), fallback);
  }
  std::optional<double> optional_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return number(key);
  }
  long long integer(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number() || std::floor(v.get<double>()) != v.get<double>()) {
      config_error(origin_, field(key), "expected an integer");
    }
    return static_cast<long long>(v.get<double>());
  }
  long long integer(const std::string& key, long long fallback) {
    return has(key) ? integer(key) : (used_.insert(key), fallback);
  }
  std::string text(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) config_error(origin_, field(key), "expected a string");
    return v.get<std::string>();
  }
  std::string text(const std::string& key, const std::string& fallback) {
    return has(key) ? text(key) : (used_.insert(key), fallback);
  }
  std::vector<double> numbers(const std::string& key) {
    const json& v = at(key);
    if (!v.is_array()) config_error(origin_, field(key), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) config_error(origin_, field(key), "expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }
  Section child(const std::string& key) { return Section(at(key), field(key), origin_); }
  const json& raw(const std::string& key) { return at(key); }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!used_.count(key)) config_error(origin_, field(key), "unknown key");
    }
  }
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& at(const std::string& key) {
    if (!j_.contains(key)) config_error(origin_, field(key), "missing required field");
    used_.insert(key);
    return j_.at(key);
  }

  const json& j_;
  std::string path_;
  const std::string& origin_;
  std::set<std::string> used_;
};

template <typename F>
void guarded(const std::string& origin, const std::string& field, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfigError) throw;
    config_error(origin, field, e.what());
  }
}

NodePowerProfile parse_profile(Section s) {
  NodePowerProfile p;
  p.i_t = s.number("i_t");
  p.i_r = s.number("i_r");
  p.i_c = s.number("i_c");
  p.i_s = s.number("i_s");
  p.t_on = s.number("t_on");
  p.t_data = s.number("t_data");
  p.t_int = s.number("t_int");
  p.t_cpu = s.number("t_cpu");
  p.k_u = s.number("k_u", 1.0);
  p.t_rpl = s.number("t_rpl");
  p.t_v = s.number("t_v");
  p.e_t = s.number("e_t");
  s.finish();
  return p;
}

TopologyParams parse_topology(Section s) {
  TopologyParams t;
  t.n_c = static_cast<int>(s.integer("n_c"));
  t.n_i = static_cast<int>(s.integer("n_i"));
  t.n_int = static_cast<int>(s.integer("n_int"));
  s.finish();
  return t;
}

Histogram parse_histogram(Section s) {
  const auto edges = s.numbers("edges");
  const auto masses = s.numbers("masses");
  s.finish();
  return Histogram(edges, masses);
}

std::string resolve(const std::string& base_dir, const std::string& path) {
  const std::filesystem::path p(path);
  return p.is_absolute() ? path : (std::filesystem::path(base_dir) / p).string();
}

void parse_source(Section s, RunConfig& c, const std::string& base_dir) {
  c.source_kind = s.text("type");
  c.source_scale = s.number("scale", 1.0);
  if (!(c.source_scale > 0.0)) config_error("config", s.field("scale"), "must be > 0");
  if (c.source_kind == "synthetic_day_night") {
    DayNightParams p;
    p.day_mean_current = s.number("day_mean_current", p.day_mean_current);
    p.day_current_sigma = s.number("day_current_sigma", p.day_current_sigma);
    p.day_hours = s.number("day_hours", p.day_hours);
    p.night_hours = s.number("night_hours", p.night_hours);
    p.hours_spread = s.number("hours_spread", p.hours_spread);
    p.night_current = s.number("night_current", p.night_current);
    p.bins = static_cast<int>(s.integer("bins", p.bins));
    s.finish();
    c.base_source = synthetic_day_night(p);
  } else if (c.source_kind == "states") {
    const json& tr = s.raw("transition");
    const json& st = s.raw("states");
    s.finish();
    std::vector<std::vector<double>> p;
    try {
      p = tr.get<std::vector<std::vector<double>>>();
    } catch (const json::exception&) {
      config_error("config", s.field("transition"), "expected a matrix of numbers");
    }
    if (!st.is_array()) config_error("config", s.field("states"), "expected an array");
    std::vector<SourceState> states;
    for (std::size_t k = 0; k < st.size(); ++k) {
      const std::string origin = "config";
      Section one(st[k], s.field("states") + "[" + std::to_string(k) + "]", origin);
      SourceState ss;
      ss.name = one.text("name", "s" + std::to_string(k));
      ss.duration = parse_histogram(one.child("duration"));
      ss.current = parse_histogram(one.child("current"));
      one.finish();
      states.push_back(std::move(ss));
    }
    c.base_source = EnergySourceModel(std::move(p), std::move(states));
  } else if (c.source_kind == "model_file") {
    const std::string path = resolve(base_dir, s.text("path"));
    s.finish();
    c.base_source = load_source_model(path);
  } else if (c.source_kind == "trace") {
    const std::string path = resolve(base_dir, s.text("path"));
    const int bins = static_cast<int>(s.integer("bins", 32));
    s.finish();
    c.trace = read_stage_trace_file(path);
    c.base_source = fit_source_from_trace(c.trace, bins);
  } else {
    config_error("config", s.field("type"),
                 "expected synthetic_day_night, states, model_file or trace");
  }
}

void parse_solver(Section s, RunConfig& c) {
  SolverConfig& v = c.solver;
  v.alpha = s.number("alpha", v.alpha);
  v.c_th = s.optional_number("c_th");
  v.t_out = s.optional_number("t_out");
  if (v.c_th && v.t_out) config_error("config", s.field("t_out"), "t_out and c_th are mutually exclusive");
  if (!v.c_th && !v.t_out) v.t_out = 0.01;
  v.n_u = static_cast<int>(s.integer("n_u", v.n_u));
  v.eps_lambda = s.number("eps_lambda", v.eps_lambda);
  v.eps_vi = s.number("eps_vi", v.eps_vi);
  v.max_vi_iterations = static_cast<int>(s.integer("max_vi_iterations", v.max_vi_iterations));
  v.max_power_iterations = static_cast<int>(s.integer("max_power_iterations", v.max_power_iterations));
  v.quadrature_nodes = static_cast<int>(s.integer("quadrature_nodes", v.quadrature_nodes));
  v.delta.tau_nodes = static_cast<int>(s.integer("tau_nodes", v.delta.tau_nodes));
  v.delta.bins = static_cast<int>(s.integer("delta_bins", v.delta.bins));
  c.reward_samples = static_cast<int>(s.integer("reward_samples", c.reward_samples));
  if (s.has("shading")) {
    Section sh = s.child("shading");
    c.shading.scale = sh.numbers("scale");
    c.shading.weight = sh.numbers("weight");
    sh.finish();
  }
  s.finish();
}

void parse_simulation(Section s, RunConfig& c, const std::string& base_dir) {
  c.sim.epochs = s.integer("epochs", c.sim.epochs);
  const long long seed = s.integer("seed", 1);
  if (seed < 0) config_error("config", s.field("seed"), "must be >= 0");
  c.sim.seed = static_cast<std::uint64_t>(seed);
  c.sim.update_delay = s.number("update_delay", 0.0);
  c.sim.initial_battery = s.number("initial_battery", -1.0);
  if (s.has("trace")) c.trace = read_stage_trace_file(resolve(base_dir, s.text("trace")));
  s.finish();
}

void parse_heterogeneous(Section s, RunConfig& c) {
  c.report_delay = s.number("report_delay", 0.0);
  const json& nodes = s.raw("nodes");
  s.finish();
  if (!nodes.is_array() || nodes.empty()) config_error("config", s.field("nodes"), "expected a non-empty array");
  const std::string origin = "config";
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    Section n(nodes[k], s.field("nodes") + "[" + std::to_string(k) + "]", origin);
    HeteroNode h;
    h.shading = n.number("shading", 1.0);
    h.topo.n_c = static_cast<int>(n.integer("n_c"));
    h.topo.n_i = static_cast<int>(n.integer("n_i"));
    h.topo.n_int = static_cast<int>(n.integer("n_int"));
    n.finish();
    c.hetero_nodes.push_back(h);
  }
}

void validate(const RunConfig& c, const std::string& origin) {
  guarded(origin, "profile", [&] { c.profile.validate(); });
  guarded(origin, "topology", [&] { c.topo.validate(); });
  guarded(origin, "battery", [&] { c.battery.validate(); });
  guarded(origin, "solver", [&] { c.solver.validate(); });
  guarded(origin, "solver.shading", [&] { c.shading.validate(); });
  guarded(origin, "baseline", [&] { c.baseline.validate(); });
  if (c.reward_samples < 2) config_error(origin, "solver.reward_samples", "must be >= 2");
  if (c.sim.epochs < 0) config_error(origin, "simulation.epochs", "must be >= 0");
  if (!(c.sim.update_delay >= 0.0)) config_error(origin, "simulation.update_delay", "must be >= 0");
  if (c.sim.initial_battery > c.battery.b_max) {
    config_error(origin, "simulation.initial_battery", "must not exceed battery.b_max");
  }
  if (!(c.report_delay >= 0.0)) config_error(origin, "heterogeneous.report_delay", "must be >= 0");
  for (const auto& n : c.hetero_nodes) {
    guarded(origin, "heterogeneous.nodes", [&] { n.topo.validate(); });
    if (!(n.shading >= 0.0)) config_error(origin, "heterogeneous.nodes", "shading must be >= 0");
  }
  for (const auto& r : c.trace) {
    if (r.state >= c.base_source.n_states()) {
      config_error(origin, "simulation.trace", "trace state outside the source model");
    }
  }
}

}  // namespace

EnergySourceModel RunConfig::source() const {
  return source_scale == 1.0 ? base_source : base_source.with_scaled_current(source_scale);
}

RunConfig parse_config_text(const std::string& text, const std::string& origin,
                            const std::string& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kConfigError, origin + ": " + e.what());
  }
  RunConfig c;
  Section top(root, "", origin);
  guarded(origin, "profile", [&] { c.profile = parse_profile(top.child("profile")); });
  guarded(origin, "topology", [&] { c.topo = parse_topology(top.child("topology")); });
  guarded(origin, "source", [&] { parse_source(top.child("source"), c, base_dir); });
  {
    Section b = top.child("battery");
    c.battery.b_max = b.number("b_max");
    c.battery.b_th = b.number("b_th");
    c.battery.n_b = static_cast<int>(b.integer("n_b", c.battery.n_b));
    b.finish();
  }
  if (top.has("solver")) guarded(origin, "solver", [&] { parse_solver(top.child("solver"), c); });
  else c.solver.t_out = 0.01;
  if (top.has("simulation")) {
    guarded(origin, "simulation", [&] { parse_simulation(top.child("simulation"), c, base_dir); });
  }
  if (top.has("baseline")) {
    Section b = top.child("baseline");
    c.baseline.ewma_alpha = b.number("ewma_alpha", c.baseline.ewma_alpha);
    b.finish();
  }
  if (top.has("heterogeneous")) {
    guarded(origin, "heterogeneous", [&] { parse_heterogeneous(top.child("heterogeneous"), c); });
  }
  c.output_dir = top.text("output_dir", c.output_dir);
  top.finish();
  validate(c, origin);
  return c;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kConfigError, path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config_text(ss.str(), path, dir.empty() ? "." : dir.string());
}

void set_config_number(RunConfig& config, const std::string& key, double value) {
  RunConfig c = config;
  auto as_int = [&](long long lo) {
    if (std::floor(value) != value || value < static_cast<double>(lo)) {
      fail(ErrorCode::kConfigError, key + ": expected an integer >= " + std::to_string(lo));
    }
    return static_cast<long long>(value);
  };
  if (key == "battery.b_max") c.battery.b_max = value;
  else if (key == "battery.b_th") c.battery.b_th = value;
  else if (key == "battery.n_b") c.battery.n_b = static_cast<int>(as_int(2));
  else if (key == "solver.alpha") c.solver.alpha = value;
  else if (key == "solver.t_out") { c.solver.t_out = value; c.solver.c_th.reset(); }
  else if (key == "solver.c_th") { c.solver.c_th = value; c.solver.t_out.reset(); }
  else if (key == "solver.n_u") c.solver.n_u = static_cast<int>(as_int(2));
  else if (key == "solver.eps_lambda") c.solver.eps_lambda = value;
  else if (key == "solver.reward_samples") c.reward_samples = static_cast<int>(as_int(2));
  else if (key == "source.scale") c.source_scale = value;
  else if (key == "simulation.epochs") c.sim.epochs = as_int(0);
  else if (key == "simulation.seed") c.sim.seed = static_cast<std::uint64_t>(as_int(0));
  else if (key == "simulation.update_delay") c.sim.update_delay = value;
  else if (key == "simulation.initial_battery") c.sim.initial_battery = value;
  else if (key == "baseline.ewma_alpha") c.baseline.ewma_alpha = value;
  else if (key == "heterogeneous.report_delay") c.report_delay = value;
  else fail(ErrorCode::kConfigError, key + ": not an overridable numeric field");
  if (!(c.source_scale > 0.0)) fail(ErrorCode::kConfigError, "source.scale: must be > 0");
  validate(c, "override " + key);
  config = std::move(c);
}

}  // namespace ehopt
