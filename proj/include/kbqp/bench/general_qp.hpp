/*
 Copyright 2026 The kbqp Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "kbqp/bench/manifest.hpp"
#include "kbqp/bench/random_boxqp.hpp"
#include "kbqp/qp_adapter/adapter.hpp"

namespace kbqp {

/// Random general QP with a known interior point x0: Q SPD with spectrum
/// log-spaced in [1, 10], q and A standard normal, x in [-2, 1.5]^n_x and
/// y bounds A x0 -/+ U(0.1, 1). Feasible by construction.
GeneralQp gen_random_general_qp(Index n_x, Index n_y, std::uint64_t seed, Vector* interior = nullptr);

struct GeneralQpSweepConfig {
  std::vector<Index> n_x{5, 10, 20, 40};
  std::vector<Index> row_factors{20, 40};
  Index repeats = 10;
  double rho = 1e6;
  double epsilon = 1e-6;
  std::uint64_t seed = 7;
  Backend backend = Backend::Auto;

  void validate() const;
  Manifest manifest() const;
};

struct GeneralQpRecord {
  Index n_x = 0;
  Index n_y = 0;
  Index repeat = 0;
  int iterations = 0;
  bool converged = false;
  double solve_time = 0.0;
  double max_violation = 0.0;
  Index factorization_dimension = 0;
};

struct GeneralQpSweep {
  GeneralQpSweepConfig config;
  std::vector<GeneralQpRecord> records;

  IterationStats iteration_stats() const;
  double worst_violation() const;
};

GeneralQpSweep run_generalqp_sweep(const GeneralQpSweepConfig& config);

void write_generalqp_csv(std::ostream& out, const GeneralQpSweep& sweep);

}  // namespace kbqp
