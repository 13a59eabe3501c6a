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

#ifndef EHOPT_CONFIG_HPP_
#define EHOPT_CONFIG_HPP_

#include <string>
#include <vector>

#include "ehopt/cmdp_solver.hpp"
#include "ehopt/consumption_model.hpp"
#include "ehopt/energy_source.hpp"
#include "ehopt/simulator.hpp"

namespace ehopt {

struct RunConfig {
  NodePowerProfile profile;
  TopologyParams topo;

  std::string source_kind;      // synthetic_day_night | states | model_file | trace
  EnergySourceModel base_source;
  double source_scale = 1.0;    // panel scale applied to harvested current
  std::vector<StageRecord> trace;  // replayed by simulations when non-empty

  BatteryConfig battery;
  SolverConfig solver;
  int reward_samples = 400;
  ShadingMixture shading = ShadingMixture::none();

  SimOptions sim;
  BaselineConfig baseline;
  std::vector<HeteroNode> hetero_nodes;
  double report_delay = 0.0;

  std::string output_dir = "out";

  EnergySourceModel source() const;
};

// Throws ConfigError naming the offending field.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin,
                            const std::string& base_dir = ".");

// Dotted-key numeric override, e.g. "battery.b_max".
void set_config_number(RunConfig& config, const std::string& key, double value);

}  // namespace ehopt

#endif  // EHOPT_CONFIG_HPP_
