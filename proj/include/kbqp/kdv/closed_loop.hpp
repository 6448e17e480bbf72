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

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "kbqp/kdv/simulator.hpp"
#include "kbqp/mpc/config.hpp"

namespace kbqp {

struct ClosedLoopConfig {
  MpcConfig mpc = default_kdv_mpc_config();
  double duration = 50.0;
  KdvOptions sim;
  Vector y0;  // empty: start from rest
  bool record_field = true;
};

struct ClosedLoopStep {
  double t = 0.0;
  int iterations = 0;
  double mu_final = 0.0;
  double solve_time = 0.0;  // seconds: lift, linear term, initialization and IPM
  Vector u;
  double tracking_rmse = 0.0;
  double max_abs_y = 0.0;
  bool converged = true;
};

struct ClosedLoopLog {
  std::vector<ClosedLoopStep> steps;
  Vector times;  // sample times of the field rows
  Matrix field;  // one row per sample time, one column per node
  bool warm_start = false;

  double mean_iterations() const;
  double mean_solve_time() const;
  double median_solve_time() const;
  double max_solve_time() const;
  double max_abs_input() const;
  Index max_iter_hits() const;
};

/// Receding-horizon loop around the KdV simulator. The measured profile is the
/// full grid state; the first sample always starts cold.
ClosedLoopLog run_closed_loop(const MpcBuilder& builder, const ClosedLoopConfig& config);

/// Convenience overload building the MPC problem from the config.
ClosedLoopLog run_closed_loop(const KoopmanModel& model, const ClosedLoopConfig& config);

/// Columns t, iterations, mu_final, solve_time, u1..u4, tracking_rmse, max_abs_y.
void write_closed_loop_csv(std::ostream& out, const ClosedLoopLog& log);
void save_field(const std::filesystem::path& path, const ClosedLoopLog& log, const KdvGrid& grid);

}  // namespace kbqp
