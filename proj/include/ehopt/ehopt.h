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

#ifndef EHOPT_EHOPT_H_
#define EHOPT_EHOPT_H_

#include <stddef.h>

#if defined(_WIN32)
#if defined(EHOPT_BUILDING_LIBRARY)
#define EHOPT_API __declspec(dllexport)
#else
#define EHOPT_API __declspec(dllimport)
#endif
#else
#define EHOPT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ehopt_status {
  EHOPT_OK = 0,
  EHOPT_INVALID_INPUT = 1,
  EHOPT_INFEASIBLE_LOAD = 2,
  EHOPT_SATURATED = 3,
  EHOPT_NO_REAL_SOLUTION = 4,
  EHOPT_NO_FEASIBLE_LIMIT = 5,
  EHOPT_NUMERICAL_FAILURE = 6,
  EHOPT_INFEASIBLE = 7,
  EHOPT_DEGENERATE_SUPPORT = 8,
  EHOPT_NON_CONVERGENCE = 9,
  EHOPT_TRACE_FORMAT = 10,
  EHOPT_CONFIG_ERROR = 11,
  EHOPT_IO_ERROR = 12,
  EHOPT_INTERNAL_ERROR = 99
} ehopt_status;

typedef struct ehopt_config ehopt_config;
typedef struct ehopt_policy ehopt_policy;

// Message of the last failed call on this thread; empty after success.
EHOPT_API const char* ehopt_last_error(void);
EHOPT_API const char* ehopt_status_name(ehopt_status status);

EHOPT_API ehopt_status ehopt_config_load(const char* path, ehopt_config** out);
EHOPT_API void ehopt_config_free(ehopt_config* config);
// Dotted numeric override such as "battery.b_max".
EHOPT_API ehopt_status ehopt_config_set_number(ehopt_config* config, const char* key,
                                               double value);
// Copies the configured output directory into buf (NUL-terminated).
EHOPT_API ehopt_status ehopt_config_output_dir(const ehopt_config* config, char* buf,
                                               size_t size);

typedef struct ehopt_p1_result {
  double t_u;         // s, INFINITY when no data is generated
  double t_dc;        // s
  double duty_cycle;
  double f_u;         // packets/s
  double i_out;       // mA at the returned point
  double u_min;       // mA
  double u_max;       // mA
} ehopt_p1_result;

// mode 0: closed form, 1: numerical without collisions,
// 2: numerical with collisions, 3: collision-corrected closed form.
EHOPT_API ehopt_status ehopt_solve_p1(const ehopt_config* config, double u, int mode,
                                      ehopt_p1_result* out);

typedef struct ehopt_feasibility_result {
  double limit;         // bound on f_U * t_v
  double e_c_max;
  int feasible;
  double e_c;           // fixed point, 1 when infeasible
  double e_p;
  double retx_ratio;    // f_U'/f_U, INFINITY when infeasible
  int approx_available;
  double e_c_approx;
} ehopt_feasibility_result;

EHOPT_API ehopt_status ehopt_feasibility(double f_u, double t_v, double e_t, int n_i,
                                         ehopt_feasibility_result* out);

EHOPT_API ehopt_status ehopt_write_reward_curve(const ehopt_config* config, int samples,
                                                const char* csv_path);

EHOPT_API ehopt_status ehopt_solve_p2(const ehopt_config* config, ehopt_policy** out);
EHOPT_API ehopt_status ehopt_policy_save(const ehopt_policy* policy, const char* dir);
EHOPT_API ehopt_status ehopt_policy_load(const char* dir, ehopt_policy** out);
EHOPT_API void ehopt_policy_free(ehopt_policy* policy);

typedef struct ehopt_policy_info {
  double p;
  double lambda_minus;
  double lambda_plus;
  double alpha;
  double c_th;
  double cost_minus;
  double cost_plus;
  double b_max;
  double b_th;
  int n_states;
  int n_battery;
  int iterations;       // Lagrangian evaluations, 0 for loaded policies
} ehopt_policy_info;

EHOPT_API ehopt_status ehopt_policy_info_get(const ehopt_policy* policy,
                                             ehopt_policy_info* out);
// Control in mA of one pure map (use_minus != 0 selects the lambda- map).
EHOPT_API ehopt_status ehopt_policy_control(const ehopt_policy* policy, int use_minus,
                                            int source_state, double battery_mAh,
                                            double* out);

typedef struct ehopt_sim_summary {
  long long epochs;
  double total_time_s;
  double throughput;        // packets/s
  double outage_fraction;
  double empty_fraction;
  double harvested_mAh;
  double consumed_mAh;
  double final_battery_mAh;
} ehopt_sim_summary;

// Report CSVs are written when the paths are non-NULL.
EHOPT_API ehopt_status ehopt_simulate(const ehopt_config* config, const ehopt_policy* policy,
                                      const char* report_csv, const char* summary_csv,
                                      ehopt_sim_summary* out);

EHOPT_API ehopt_status ehopt_compare_baseline(const ehopt_config* config,
                                              const ehopt_policy* policy, const char* out_dir,
                                              ehopt_sim_summary* policy_out,
                                              ehopt_sim_summary* baseline_out);

// One summary per configured node. n_nodes is the capacity of nodes_out and
// must cover every configured node.
EHOPT_API ehopt_status ehopt_simulate_heterogeneous(const ehopt_config* config,
                                                    const ehopt_policy* policy,
                                                    const char* summary_csv,
                                                    ehopt_sim_summary* network_out,
                                                    ehopt_sim_summary* nodes_out,
                                                    size_t n_nodes);

// Empty lists keep the configured value.
EHOPT_API ehopt_status ehopt_sweep(const ehopt_config* config, const double* b_max,
                                   size_t n_b_max, const double* alpha, size_t n_alpha,
                                   const double* scale, size_t n_scale, const char* csv_path);

#ifdef __cplusplus
}
#endif

#endif  // EHOPT_EHOPT_H_
