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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ehopt/ehopt.h"

namespace {

constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

int report(ehopt_status st) {
  if (st == EHOPT_OK) return 0;
  std::fprintf(stderr, "error [%s]: %s\n", ehopt_status_name(st), ehopt_last_error());
  return st == EHOPT_CONFIG_ERROR ? kExitUsage : kExitDomain;
}

struct Common {
  std::string config;
  std::string out_dir;
  std::string format = "csv";
  long long seed = -1;
  long long epochs = -1;
};

void add_common(CLI::App* sub, Common& c, bool sim) {
  sub->add_option("--config", c.config, "configuration file (JSON)")->required()->check(CLI::ExistingFile);
  sub->add_option("--out-dir", c.out_dir, "output directory (overrides output_dir)");
  sub->add_option("--format", c.format, "output format")->check(CLI::IsMember({"csv"}));
  if (sim) {
    sub->add_option("--seed", c.seed, "simulation seed")->check(CLI::NonNegativeNumber);
    sub->add_option("--epochs", c.epochs, "number of simulated stages")->check(CLI::NonNegativeNumber);
  }
}

// Loads the config and applies flag overrides.
class Session {
 public:
  ~Session() {
    ehopt_policy_free(policy_);
    ehopt_config_free(config_);
  }

  ehopt_status open(const Common& c) {
    ehopt_status st = ehopt_config_load(c.config.c_str(), &config_);
    if (st != EHOPT_OK) return st;
    if (c.seed >= 0) st = ehopt_config_set_number(config_, "simulation.seed", static_cast<double>(c.seed));
    if (st == EHOPT_OK && c.epochs >= 0) {
      st = ehopt_config_set_number(config_, "simulation.epochs", static_cast<double>(c.epochs));
    }
    if (st != EHOPT_OK) return st;
    if (!c.out_dir.empty()) {
      out_dir_ = c.out_dir;
    } else {
      char buf[4096];
      st = ehopt_config_output_dir(config_, buf, sizeof buf);
      out_dir_ = buf;
    }
    return st;
  }

  ehopt_status policy_from(const std::string& dir) {
    if (!dir.empty()) return ehopt_policy_load(dir.c_str(), &policy_);
    return ehopt_solve_p2(config_, &policy_);
  }

  ehopt_config* config() { return config_; }
  ehopt_policy* policy() { return policy_; }
  std::string path(const std::string& name) const {
    std::filesystem::create_directories(out_dir_);
    return (std::filesystem::path(out_dir_) / name).string();
  }

 private:
  ehopt_config* config_ = nullptr;
  ehopt_policy* policy_ = nullptr;
  std::string out_dir_;
};

void print_summary(const char* label, const ehopt_sim_summary& s) {
  std::printf("%s epochs=%lld time_s=%.6g throughput=%.6g outage=%.6g empty=%.6g final_battery_mAh=%.6g\n",
              label, s.epochs, s.total_time_s, s.throughput, s.outage_fraction, s.empty_fraction,
              s.final_battery_mAh);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Operating-point and energy-management optimizer for energy-harvesting sensor networks"};
  app.require_subcommand(1);

  Common common;
  double u = 0.0;
  bool collisions = false;
  bool numerical = false;
  auto* p1 = app.add_subcommand("solve-p1", "optimal (t_U, t_dc) for a current budget");
  add_common(p1, common, false);
  p1->add_option("--u", u, "current budget in mA")->required();
  p1->add_flag("--collisions", collisions, "account for packet collisions");
  p1->add_flag("--numerical", numerical, "use the nested numerical search");

  int samples = 200;
  std::string out_file;
  auto* rc = app.add_subcommand("reward-curve", "sample r(u) over [u_min, u_max]");
  add_common(rc, common, false);
  rc->add_option("--samples", samples, "number of samples")->check(CLI::Range(2, 1000000));
  rc->add_option("--out", out_file, "output CSV (default <out-dir>/reward_curve.csv)");

  double f_u = 0.0, t_v = 0.0, e_t = 0.0;
  int n_i = 0;
  auto* fe = app.add_subcommand("feasibility", "channel feasibility bound and collision probability");
  fe->add_option("--f-u", f_u, "packet generation rate (1/s)")->required();
  fe->add_option("--t-v", t_v, "vulnerability window (s)")->required();
  fe->add_option("--e-t", e_t, "channel error probability")->required();
  fe->add_option("--n-i", n_i, "number of interferers")->required();

  std::string policy_dir;
  auto* p2 = app.add_subcommand("solve-p2", "solve the constrained MDP and write the mixed policy");
  add_common(p2, common, false);
  p2->add_option("--out", policy_dir, "policy directory (default <out-dir>/policy)");

  bool hetero = false;
  auto* sim = app.add_subcommand("simulate", "simulate a policy against the configured source");
  add_common(sim, common, true);
  sim->add_option("--policy", policy_dir, "policy directory (solved on the fly when omitted)");
  sim->add_flag("--heterogeneous", hetero, "simulate the configured shaded node set");

  auto* cb = app.add_subcommand("compare-baseline", "policy versus the EWMA baseline on a common seed");
  add_common(cb, common, true);
  cb->add_option("--policy", policy_dir, "policy directory (solved on the fly when omitted)");

  std::vector<double> b_max_list, alpha_list, scale_list;
  auto* sw = app.add_subcommand("sweep", "grid over b_max, alpha and panel scale");
  add_common(sw, common, true);
  sw->add_option("--b-max", b_max_list, "battery capacities (mAh)")->delimiter(',');
  sw->add_option("--alpha", alpha_list, "discount factors")->delimiter(',');
  sw->add_option("--panel-scale", scale_list, "harvested-current scale factors")->delimiter(',');
  sw->add_option("--out", out_file, "output CSV (default <out-dir>/sweep.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::fprintf(stderr, "%s", app.help().c_str());
    return kExitUsage;
  }

  if (fe->parsed()) {
    ehopt_feasibility_result r;
    if (ehopt_status st = ehopt_feasibility(f_u, t_v, e_t, n_i, &r); st != EHOPT_OK) return report(st);
    std::printf("limit=%.10g e_c_max=%.10g f_u_t_v=%.10g feasible=%d\n", r.limit, r.e_c_max, f_u * t_v, r.feasible);
    std::printf("e_c=%.10g e_p=%.10g retx_ratio=%.10g\n", r.e_c, r.e_p, r.retx_ratio);
    if (r.approx_available) std::printf("e_c_approx=%.10g\n", r.e_c_approx);
    else std::printf("e_c_approx=none\n");
    return r.feasible ? 0 : kExitDomain;
  }

  Session s;
  if (ehopt_status st = s.open(common); st != EHOPT_OK) return report(st);

  if (p1->parsed()) {
    const int mode = collisions ? (numerical ? 2 : 3) : (numerical ? 1 : 0);
    ehopt_p1_result r;
    if (ehopt_status st = ehopt_solve_p1(s.config(), u, mode, &r); st != EHOPT_OK) return report(st);
    std::printf("t_U_s=%.10g\nt_dc_s=%.10g\nd_c=%.10g\nf_U_pkt_s=%.10g\nI_out_mA=%.10g\nu_min_mA=%.10g\nu_max_mA=%.10g\n",
                r.t_u, r.t_dc, r.duty_cycle, r.f_u, r.i_out, r.u_min, r.u_max);
    return 0;
  }
  if (rc->parsed()) {
    const std::string path = out_file.empty() ? s.path("reward_curve.csv") : out_file;
    if (ehopt_status st = ehopt_write_reward_curve(s.config(), samples, path.c_str()); st != EHOPT_OK) {
      return report(st);
    }
    std::printf("wrote %s\n", path.c_str());
    return 0;
  }
  if (p2->parsed()) {
    if (ehopt_status st = s.policy_from(""); st != EHOPT_OK) return report(st);
    const std::string dir = policy_dir.empty() ? s.path("policy") : policy_dir;
    if (ehopt_status st = ehopt_policy_save(s.policy(), dir.c_str()); st != EHOPT_OK) return report(st);
    ehopt_policy_info info;
    ehopt_policy_info_get(s.policy(), &info);
    std::printf("p=%.10g lambda_minus=%.10g lambda_plus=%.10g c_th=%.10g cost_minus=%.10g cost_plus=%.10g evaluations=%d\n",
                info.p, info.lambda_minus, info.lambda_plus, info.c_th, info.cost_minus, info.cost_plus,
                info.iterations);
    std::printf("wrote %s\n", dir.c_str());
    return 0;
  }
  if (sim->parsed()) {
    if (ehopt_status st = s.policy_from(policy_dir); st != EHOPT_OK) return report(st);
    if (hetero) {
      ehopt_sim_summary net;
      std::vector<ehopt_sim_summary> nodes(64);
      const std::string path = s.path("heterogeneous_summary.csv");
      if (ehopt_status st = ehopt_simulate_heterogeneous(s.config(), s.policy(), path.c_str(), &net, nodes.data(),
                                                         nodes.size());
          st != EHOPT_OK) {
        return report(st);
      }
      print_summary("network", net);
      std::printf("wrote %s\n", path.c_str());
      return 0;
    }
    ehopt_sim_summary sum;
    const std::string report_path = s.path("report.csv");
    const std::string summary_path = s.path("summary.csv");
    if (ehopt_status st = ehopt_simulate(s.config(), s.policy(), report_path.c_str(), summary_path.c_str(), &sum);
        st != EHOPT_OK) {
      return report(st);
    }
    print_summary("policy", sum);
    std::printf("wrote %s\n", summary_path.c_str());
    return 0;
  }
  if (cb->parsed()) {
    if (ehopt_status st = s.policy_from(policy_dir); st != EHOPT_OK) return report(st);
    ehopt_sim_summary a, b;
    const std::string dir = s.path("");
    if (ehopt_status st = ehopt_compare_baseline(s.config(), s.policy(), dir.c_str(), &a, &b); st != EHOPT_OK) {
      return report(st);
    }
    print_summary("cmdp", a);
    print_summary("kansal", b);
    return 0;
  }
  if (sw->parsed()) {
    const std::string path = out_file.empty() ? s.path("sweep.csv") : out_file;
    if (ehopt_status st = ehopt_sweep(s.config(), b_max_list.data(), b_max_list.size(), alpha_list.data(),
                                      alpha_list.size(), scale_list.data(), scale_list.size(), path.c_str());
        st != EHOPT_OK) {
      return report(st);
    }
    std::printf("wrote %s\n", path.c_str());
    return 0;
  }
  std::fprintf(stderr, "%s", app.help().c_str());
  return kExitUsage;
}
