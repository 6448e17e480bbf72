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

#include <iosfwd>
#include <memory>
#include <vector>

#include "kbqp/boxqp/iterate.hpp"
#include "kbqp/boxqp/newton.hpp"

namespace kbqp {

enum class StopMode {
  AverageGap,       // mu <= epsilon
  DimensionScaled,  // mu <= 2 n epsilon
};

struct SolverConfig {
  double epsilon = 1e-6;
  int max_iters = 100;
  double boundary_fraction = 0.99;
  StopMode stop_mode = StopMode::AverageGap;
  // Start from infeasible_start() and carry the equality residuals in the
  // Newton right-hand side. Convergence then also requires the residuals to
  // drop below epsilon * max(1, |h|_inf).
  bool infeasible_variant = false;
  Backend backend = Backend::Auto;
  // Record per-iteration diagnostics (costs one Hessian product per iteration).
  bool record_trace = false;

  void validate() const;
  double threshold(Index n) const;
};

enum class SolveStatus { Converged, MaxIters };

struct IterationRecord {
  int iteration = 0;
  double mu = 0.0;
  double alpha_aff = 0.0;
  double alpha = 0.0;
  double sigma = 0.0;
  KktResiduals residuals;
};

struct SolveResult {
  Vector z_star;
  int iterations = 0;
  double final_mu = 0.0;
  SolveStatus status = SolveStatus::MaxIters;
  std::vector<double> per_iteration_mu;
  std::vector<IterationRecord> trace;
  IpmIterate final_iterate;
  int floor_activations = 0;
  int regularizations = 0;
  Index factorization_dimension = 0;

  bool converged() const { return status == SolveStatus::Converged; }
};

/// Mehrotra predictor-corrector interior-point method for box-constrained QPs.
///
/// Every iteration factorizes the reduced Newton matrix once and uses it for
/// both the affine-scaling predictor and the centering corrector; all five
/// variable blocks move with one common step length. The Newton workspace is
/// kept between calls as long as the Hessian is shared, so an MPC loop that
/// only changes h reuses its allocations.
class BoxQpSolver {
 public:
  explicit BoxQpSolver(SolverConfig config = {});

  SolveResult solve(const BoxQpProblem& problem, const IpmIterate& init);

  const SolverConfig& config() const { return config_; }

 private:
  NewtonSolver& newton_for(const BoxQpProblem& problem);

  SolverConfig config_;
  std::unique_ptr<NewtonSolver> newton_;
  std::unique_ptr<BoxQpProblem> cached_problem_;
};

SolveResult solve(const BoxQpProblem& problem, const IpmIterate& init, const SolverConfig& config);

/// One CSV row per iteration: iteration,mu,alpha_aff,alpha,sigma,res_stationarity,res_upper,res_lower.
void write_trace_csv(std::ostream& out, const SolveResult& result);

}  // namespace kbqp
