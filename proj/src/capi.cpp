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

#include "ehopt/ehopt.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "ehopt/channel_access.hpp"
#include "ehopt/config.hpp"
#include "ehopt/errors.hpp"
#include "ehopt/pipeline.hpp"

struct ehopt_config {
  ehopt::RunConfig cfg;
};

struct ehopt_policy {
  ehopt::MixedPolicy policy;
  std::vector<ehopt::LagrangeStep> trace;
  int iterations = 0;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
ehopt_status guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return EHOPT_OK;
  } catch (const ehopt::Error& e) {
    g_last_error = e.what();
    return static_cast<ehopt_status>(static_cast<int>(e.code()));
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return EHOPT_INTERNAL_ERROR;
}

void require(const void* p, const char* what) {
  if (!p) ehopt::fail(ehopt::ErrorCode::kInvalidInput, std::string(what) + " must not be NULL");
}

void fill(const ehopt::SimReport& r, ehopt_sim_summary* out) {
  out->epochs = r.epochs;
  out->total_time_s = r.total_time;
  out->throughput = r.throughput();
  out->outage_fraction = r.outage_fraction();
  out->empty_fraction = r.empty_fraction();
  out->harvested_mAh = r.harvested;
  out->consumed_mAh = r.consumed;
  out->final_battery_mAh = r.final_battery;
}

std::ofstream open_out(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
  }
  std::ofstream out(path);
  if (!out) ehopt::fail(ehopt::ErrorCode::kIoError, "cannot write " + path);
  return out;
}

void write_labeled(const std::string& path, const std::vector<std::string>& labels,
                   const std::vector<const ehopt::SimReport*>& reports) {
  std::ofstream out = open_out(path);
  for (std::size_t k = 0; k < reports.size(); ++k) {
    std::ostringstream row;
    ehopt::write_summary_csv(row, *reports[k], k == 0);
    std::string text = row.str();
    if (k == 0) {
      const auto nl = text.find('\n');
      out << "label," << text.substr(0, nl + 1);
      text = text.substr(nl + 1);
    }
    out << labels[k] << ',' << text;
  }
}

}  // namespace

extern "C" {

const char* ehopt_last_error(void) { return g_last_error.c_str(); }

const char* ehopt_status_name(ehopt_status status) {
  if (status == EHOPT_OK) return "Ok";
  if (status == EHOPT_INTERNAL_ERROR) return "InternalError";
  return ehopt::error_code_name(static_cast<ehopt::ErrorCode>(static_cast<int>(status)));
}

ehopt_status ehopt_config_load(const char* path, ehopt_config** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    auto c = std::make_unique<ehopt_config>();
    c->cfg = ehopt::parse_config(path);
    *out = c.release();
  });
}

void ehopt_config_free(ehopt_config* config) { delete config; }

ehopt_status ehopt_config_set_number(ehopt_config* config, const char* key, double value) {
  return guard([&] {
    require(config, "config");
    require(key, "key");
    ehopt::set_config_number(config->cfg, key, value);
  });
}

ehopt_status ehopt_config_output_dir(const ehopt_config* config, char* buf, size_t size) {
  return guard([&] {
    require(config, "config");
    require(buf, "buf");
    const std::string& dir = config->cfg.output_dir;
    if (dir.size() + 1 > size) ehopt::fail(ehopt::ErrorCode::kInvalidInput, "buffer too small for output_dir");
    std::memcpy(buf, dir.c_str(), dir.size() + 1);
  });
}

ehopt_status ehopt_solve_p1(const ehopt_config* config, double u, int mode, ehopt_p1_result* out) {
  return guard([&] {
    require(config, "config");
    require(out, "out");
    const auto& c = config->cfg;
    const auto coeffs = ehopt::derive_coefficients(c.profile, c.topo);
    const auto range = ehopt::control_bounds(coeffs);
    ehopt::OperatingPoint op;
    double retx = c.profile.collision_free_retx_ratio();
    switch (mode) {
      case 0:
        op = ehopt::solve_p1_closed_form(coeffs, range, u);
        break;
      case 1:
        op = ehopt::solve_p1_numerical(c.profile, c.topo, u, false);
        break;
      case 2:
      case 3: {
        op = mode == 2 ? ehopt::solve_p1_numerical(c.profile, c.topo, u, true)
                       : ehopt::CorrectedSolver(c.profile, c.topo)(u);
        const double r = ehopt::retx_ratio_at(c.profile, c.topo, op.t_u, true);
        if (r >= 1.0) retx = r;
        break;
      }
      default:
        ehopt::fail(ehopt::ErrorCode::kInvalidInput, "solve_p1: mode must be 0..3");
    }
    out->t_u = op.t_u;
    out->t_dc = op.t_dc;
    out->duty_cycle = op.duty_cycle(c.profile.t_on);
    out->f_u = op.f_u();
    out->i_out = ehopt::output_current(c.profile, c.topo, op, retx);
    out->u_min = range.u_min;
    out->u_max = range.u_max;
  });
}

ehopt_status ehopt_feasibility(double f_u, double t_v, double e_t, int n_i, ehopt_feasibility_result* out) {
  return guard([&] {
    require(out, "out");
    *out = {};
    if (n_i > 0) {
      const auto lim = ehopt::feasibility_limit(e_t, n_i);
      out->limit = lim.limit;
      out->e_c_max = lim.e_c_max;
    } else {
      out->limit = INFINITY;
    }
    const auto sol = ehopt::solve_fixed_point(f_u, t_v, e_t, n_i);
    out->feasible = sol.feasible ? 1 : 0;
    out->e_c = sol.e_c;
    out->e_p = sol.e_p;
    out->retx_ratio = sol.feasible ? sol.retx_ratio() : INFINITY;
    try {
      out->e_c_approx = ehopt::approx_collision_probability(f_u, t_v, e_t, n_i);
      out->approx_available = 1;
    } catch (const ehopt::Error& e) {
      if (e.code() != ehopt::ErrorCode::kNoRealSolution) throw;
      out->approx_available = 0;
      out->e_c_approx = NAN;
    }
  });
}

ehopt_status ehopt_write_reward_curve(const ehopt_config* config, int samples, const char* csv_path) {
  return guard([&] {
    require(config, "config");
    require(csv_path, "csv_path");
    if (samples < 2) ehopt::fail(ehopt::ErrorCode::kInvalidInput, "reward curve needs >= 2 samples");
    open_out(csv_path);
    ehopt::write_reward_curve_csv(csv_path, ehopt::build_problem(config->cfg), samples);
  });
}

ehopt_status ehopt_solve_p2(const ehopt_config* config, ehopt_policy** out) {
  return guard([&] {
    require(config, "config");
    require(out, "out");
    *out = nullptr;
    const auto problem = ehopt::build_problem(config->cfg);
    auto r = ehopt::solve_policy(config->cfg, problem);
    auto p = std::make_unique<ehopt_policy>();
    p->policy = std::move(r.policy);
    p->trace = std::move(r.trace);
    p->iterations = r.iterations;
    *out = p.release();
  });
}

ehopt_status ehopt_policy_save(const ehopt_policy* policy, const char* dir) {
  return guard([&] {
    require(policy, "policy");
    require(dir, "dir");
    ehopt::save_policy(policy->policy, dir);
    if (!policy->trace.empty()) {
      ehopt::write_lagrange_trace((std::filesystem::path(dir) / "lagrange_trace.csv").string(), policy->trace);
    }
  });
}

ehopt_status ehopt_policy_load(const char* dir, ehopt_policy** out) {
  return guard([&] {
    require(dir, "dir");
    require(out, "out");
    *out = nullptr;
    auto p = std::make_unique<ehopt_policy>();
    p->policy = ehopt::load_policy(dir);
    *out = p.release();
  });
}

void ehopt_policy_free(ehopt_policy* policy) { delete policy; }

ehopt_status ehopt_policy_info_get(const ehopt_policy* policy, ehopt_policy_info* out) {
  return guard([&] {
    require(policy, "policy");
    require(out, "out");
    const auto& m = policy->policy;
    *out = {m.p, m.lambda_minus, m.lambda_plus, m.alpha, m.c_th, m.cost_minus, m.cost_plus,
            m.battery.b_max, m.battery.b_th, m.n_s, m.battery.n_b, policy->iterations};
  });
}

ehopt_status ehopt_policy_control(const ehopt_policy* policy, int use_minus, int source_state,
                                  double battery_mAh, double* out) {
  return guard([&] {
    require(policy, "policy");
    require(out, "out");
    *out = policy->policy.control(use_minus != 0, source_state, battery_mAh);
  });
}

ehopt_status ehopt_simulate(const ehopt_config* config, const ehopt_policy* policy, const char* report_csv,
                            const char* summary_csv, ehopt_sim_summary* out) {
  return guard([&] {
    require(config, "config");
    require(policy, "policy");
    ehopt::RunConfig c = config->cfg;
    c.sim.keep_log = report_csv != nullptr;
    const auto problem = ehopt::build_problem(c);
    const auto rep = ehopt::simulate_policy(c, problem, policy->policy);
    if (report_csv) {
      auto f = open_out(report_csv);
      ehopt::write_report_csv(f, rep);
    }
    if (summary_csv) {
      auto f = open_out(summary_csv);
      ehopt::write_summary_csv(f, rep);
    }
    if (out) fill(rep, out);
  });
}

ehopt_status ehopt_compare_baseline(const ehopt_config* config, const ehopt_policy* policy,
                                    const char* out_dir, ehopt_sim_summary* policy_out,
                                    ehopt_sim_summary* baseline_out) {
  return guard([&] {
    require(config, "config");
    require(policy, "policy");
    ehopt::RunConfig c = config->cfg;
    c.sim.keep_log = out_dir != nullptr;
    const auto problem = ehopt::build_problem(c);
    const auto cmdp = ehopt::simulate_policy(c, problem, policy->policy);
    const auto kansal = ehopt::simulate_kansal(c, problem);
    if (out_dir) {
      const std::filesystem::path base(out_dir);
      auto a = open_out((base / "policy_report.csv").string());
      ehopt::write_report_csv(a, cmdp);
      auto b = open_out((base / "baseline_report.csv").string());
      ehopt::write_report_csv(b, kansal);
      write_labeled((base / "comparison.csv").string(), {"cmdp", "kansal"}, {&cmdp, &kansal});
    }
    if (policy_out) fill(cmdp, policy_out);
    if (baseline_out) fill(kansal, baseline_out);
  });
}

ehopt_status ehopt_simulate_heterogeneous(const ehopt_config* config, const ehopt_policy* policy,
                                          const char* summary_csv, ehopt_sim_summary* network_out,
                                          ehopt_sim_summary* nodes_out, size_t n_nodes) {
  return guard([&] {
    require(config, "config");
    require(policy, "policy");
    ehopt::RunConfig c = config->cfg;
    c.sim.keep_log = false;
    const auto problem = ehopt::build_problem(c);
    const auto rep = ehopt::simulate_heterogeneous(c, problem, policy->policy);
    if (nodes_out && n_nodes < rep.nodes.size()) {
      ehopt::fail(ehopt::ErrorCode::kInvalidInput, "nodes_out holds fewer entries than configured nodes");
    }
    if (summary_csv) {
      std::vector<std::string> labels{"network"};
      std::vector<const ehopt::SimReport*> reports{&rep.network};
      for (std::size_t k = 0; k < rep.nodes.size(); ++k) {
        labels.push_back("node" + std::to_string(k));
        reports.push_back(&rep.nodes[k]);
      }
      write_labeled(summary_csv, labels, reports);
    }
    if (network_out) fill(rep.network, network_out);
    if (nodes_out) {
      for (std::size_t k = 0; k < rep.nodes.size(); ++k) fill(rep.nodes[k], nodes_out + k);
    }
  });
}

ehopt_status ehopt_sweep(const ehopt_config* config, const double* b_max, size_t n_b_max, const double* alpha,
                         size_t n_alpha, const double* scale, size_t n_scale, const char* csv_path) {
  return guard([&] {
    require(config, "config");
    require(csv_path, "csv_path");
    auto list = [](const double* p, size_t n) {
      if (n > 0) require(p, "sweep list");
      return std::vector<double>(p, p + n);
    };
    const auto rows = ehopt::run_sweep(config->cfg, list(b_max, n_b_max), list(alpha, n_alpha), list(scale, n_scale));
    open_out(csv_path);
    ehopt::write_sweep_csv(csv_path, rows);
  });
}

}  // extern "C"
