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

#include "ehopt/channel_access.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ehopt/errors.hpp"

namespace ehopt {
namespace {

constexpr int kMaxBisection = 200;

// (1 - e_t)(1 - e_c)(1 - (1-e_c)^(1/n_i)); the fixed point satisfies
// g3(e_c) = f_U t_v.
double g3(double e_c, double e_t, int n_i) {
  const double keep = 1.0 - e_c;
  return (1.0 - e_t) * keep * (1.0 - std::pow(keep, 1.0 / n_i));
}

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    fail(ErrorCode::kInvalidInput, std::string(name) + " must lie in [0,1]");
  }
}

}  // namespace

double g1(double e_c, double t_v, int n_i) {
  if (n_i <= 0) fail(ErrorCode::kInvalidInput, "g1: n_i must be >= 1");
  if (!(t_v > 0)) fail(ErrorCode::kInvalidInput, "g1: t_v must be > 0");
  check_probability(e_c, "e_c");
  return (1.0 - std::pow(1.0 - e_c, 1.0 / n_i)) / t_v;
}

double g2(double e_c, double e_t, double f_u) {
  check_probability(e_c, "e_c");
  check_probability(e_t, "e_t");
  const double success = 1.0 - e_c - e_t + e_c * e_t;
  if (success <= 0.0) fail(ErrorCode::kSaturated, "g2: total packet error probability >= 1");
  return f_u / success;
}

FeasibilityLimit feasibility_limit(double e_t, int n_i) {
  if (n_i <= 0) fail(ErrorCode::kInvalidInput, "feasibility_limit: n_i must be >= 1");
  check_probability(e_t, "e_t");
  const double ratio = static_cast<double>(n_i) / (1.0 + n_i);
  const double pow_n = std::pow(ratio, n_i);
  return {(1.0 - e_t) * (1.0 / (1.0 + n_i)) * pow_n, 1.0 - pow_n};
}

CollisionSolution solve_fixed_point(double f_u, double t_v, double e_t, int n_i) {
  if (n_i < 0) fail(ErrorCode::kInvalidInput, "solve_fixed_point: n_i must be >= 0");
  if (!(f_u >= 0)) fail(ErrorCode::kInvalidInput, "solve_fixed_point: f_u must be >= 0");
  if (!(t_v > 0)) fail(ErrorCode::kInvalidInput, "solve_fixed_point: t_v must be > 0");
  if (!(e_t >= 0.0 && e_t < 1.0)) fail(ErrorCode::kInvalidInput, "solve_fixed_point: e_t must be in [0,1)");

  CollisionSolution s;
  if (n_i == 0 || f_u == 0.0) {
    s.e_c = 0.0;
    s.e_p = e_t;
    s.f_u_prime = f_u / (1.0 - e_t);
    return s;
  }

  const double load = f_u * t_v;
  const FeasibilityLimit lim = feasibility_limit(e_t, n_i);
  if (load > lim.limit) {
    s.feasible = false;
    s.e_c = 1.0;
    s.e_p = 1.0;
    s.f_u_prime = std::numeric_limits<double>::infinity();
    return s;
  }

  // load - g3 is positive at 0 and non-positive at e_c_max; the smaller root
  // lies between them. Bisect to the last bit: a 1e-10 bracket alone leaves
  // a residual above 1e-8 relative when f_u is small.
  double lo = 0.0;
  double hi = lim.e_c_max;
  for (int it = 0; it < kMaxBisection; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (load - g3(mid, e_t, n_i) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  s.e_c = 0.5 * (lo + hi);
  s.e_p = s.e_c + e_t - s.e_c * e_t;
  s.f_u_prime = f_u / (1.0 - s.e_p);
  return s;
}

double approx_collision_probability(double f_u, double t_v, double e_t, int n_i) {
  if (n_i < 0) fail(ErrorCode::kInvalidInput, "approx_collision_probability: n_i must be >= 0");
  if (!(e_t >= 0.0 && e_t < 1.0)) fail(ErrorCode::kInvalidInput, "approx_collision_probability: e_t must be in [0,1)");
  const double load = f_u * t_v;
  const double delta = 1.0 - 4.0 * load * n_i / (1.0 - e_t);
  if (delta < 0.0) {
    std::ostringstream os;
    os << "no real collision probability: discriminant " << delta
       << " < 0; need n_i <= " << std::floor((1.0 - e_t) / (4.0 * load));
    fail(ErrorCode::kNoRealSolution, os.str());
  }
  return (1.0 - std::sqrt(delta)) / 2.0;
}

}  // namespace ehopt
