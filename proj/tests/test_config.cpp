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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "ehopt/config.hpp"
#include "ehopt/errors.hpp"

using namespace ehopt;

namespace {

const std::string kProfile = R"("profile": {"i_t": 17.4, "i_r": 19.7, "i_c": 8.0, "i_s": 0.02,
  "t_on": 0.005, "t_data": 0.010, "t_int": 0.002, "t_cpu": 0.005, "k_u": 1, "t_rpl": 600,
  "t_v": 0.004, "e_t": 0.1},
  "topology": {"n_c": 4, "n_i": 5, "n_int": 15},
  "source": {"type": "synthetic_day_night"})";

std::string with(const std::string& extra) { return "{" + kProfile + (extra.empty() ? "" : ", " + extra) + "}"; }

// Message of the ConfigError raised while parsing `text`.
std::string config_error(const std::string& text) {
  try {
    parse_config_text(text, "test.json");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConfigError);
    return e.what();
  }
  FAIL("expected ConfigError");
  return {};
}

}  // namespace

TEST_CASE("minimal config gets defaults") {
  const RunConfig c = parse_config_text(with(R"("battery": {"b_max": 250, "b_th": 50})"), "test.json");
  CHECK(c.battery.n_b == 200);
  CHECK(c.solver.n_u == 64);
  CHECK(c.solver.eps_lambda == 1e-4);
  CHECK(c.solver.eps_vi == 1e-6);
  CHECK(c.solver.alpha == 0.9);
  REQUIRE(c.solver.t_out.has_value());
  CHECK(*c.solver.t_out == 0.01);
  CHECK_FALSE(c.solver.c_th.has_value());
  CHECK(c.sim.update_delay == 0.0);
  CHECK(c.baseline.ewma_alpha == 0.5);
  CHECK(c.source_kind == "synthetic_day_night");
  CHECK(c.source().n_states() == 2);
  CHECK(c.output_dir == "out");
}

TEST_CASE("missing b_max is named") {
  const std::string msg = config_error(with(R"("battery": {"b_th": 50})"));
  CHECK(msg.find("battery.b_max") != std::string::npos);
}

TEST_CASE("t_out and c_th are mutually exclusive") {
  const std::string msg =
      config_error(with(R"("battery": {"b_max": 250, "b_th": 50}, "solver": {"t_out": 0.01, "c_th": 100})"));
  CHECK(msg.find("exclusive") != std::string::npos);
}

TEST_CASE("unknown keys are rejected") {
  const std::string msg = config_error(with(R"("battery": {"b_max": 250, "b_th": 50, "bmax": 3})"));
  CHECK(msg.find("battery.bmax") != std::string::npos);
  config_error(with(R"("battery": {"b_max": 250, "b_th": 50}, "extra": 1)"));
}

TEST_CASE("invalid values and syntax") {
  config_error(with(R"("battery": {"b_max": 250, "b_th": 500})"));
  config_error(with(R"("battery": {"b_max": 250, "b_th": 50}, "solver": {"alpha": 1.0})"));
  config_error(with(R"("battery": {"b_max": "big", "b_th": 50})"));
  config_error("{ not json");
  try {
    parse_config("definitely/not/here.json");
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConfigError);
  }
}

TEST_CASE("explicit cost bound and source states") {
  const RunConfig c = parse_config_text(
      "{" + kProfile.substr(0, kProfile.find("\"source\"")) +
          R"("source": {"type": "states", "transition": [[0, 1], [1, 0]], "states": [
             {"name": "day", "duration": {"edges": [36000, 50000], "masses": [1]},
                             "current": {"edges": [2, 10], "masses": [1]}},
             {"name": "night", "duration": {"edges": [36000, 50000], "masses": [1]},
                               "current": {"edges": [0, 0], "masses": [1]}}]},
          "battery": {"b_max": 100, "b_th": 20, "n_b": 32},
          "solver": {"c_th": 1000}})",
      "test.json");
  CHECK(*c.solver.c_th == 1000);
  CHECK_FALSE(c.solver.t_out.has_value());
  CHECK(c.source().state(0).current.mean() == doctest::Approx(6.0));
  CHECK(c.source().mean_stage_duration() == doctest::Approx(43000.0));
}

TEST_CASE("numeric overrides") {
  RunConfig c = parse_config_text(with(R"("battery": {"b_max": 250, "b_th": 50})"), "test.json");
  set_config_number(c, "battery.b_max", 500);
  set_config_number(c, "solver.alpha", 0.5);
  set_config_number(c, "source.scale", 2.0);
  set_config_number(c, "simulation.seed", 11);
  CHECK(c.battery.b_max == 500);
  CHECK(c.solver.alpha == 0.5);
  CHECK(c.sim.seed == 11u);
  CHECK(c.source().state(0).current.mean() == doctest::Approx(2.0 * c.base_source.state(0).current.mean()));
  CHECK_THROWS_AS(set_config_number(c, "battery.colour", 1), Error);
  // A rejected override leaves the config untouched.
  CHECK_THROWS_AS(set_config_number(c, "battery.b_max", 10), Error);
  CHECK(c.battery.b_max == 500);
}
