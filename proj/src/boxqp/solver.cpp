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

#include "kbqp/boxqp/solver.hpp"

#include <cmath>
#include <ostream>

namespace kbqp {

void SolverConfig::validate() const {
  require(epsilon > 0.0, "solver epsilon must be positive");
  require(max_iters >= 0, "solver max_iters must be nonnegative");
  require(boundary_fraction > 0.0 && boundary_fraction < 1.0, "boundary fraction must lie in (0, 1)");
}

double SolverConfig::threshold(Index n) const {
  if (stop_mode == StopMode::DimensionScaled) return 2.0 * static_cast<double>(n) * epsilon;
  return epsilon;
}

BoxQpSolver::BoxQpSolver(SolverConfig config) : config_(config) { config_.validate(); }

NewtonSolver& BoxQpSolver::newton_for(const BoxQpProblem& problem) {
  if (!newton_ || !cached_problem_ || !cached_problem_->shares_hessian_with(problem)) {
    newton_ = make_newton_solver(problem, config_.backend);
    cached_problem_ = std::make_unique<BoxQpProblem>(problem);
  }
  return *newton_;
}

namespace {

double complementarity_after_step(const IpmIterate& it, const StepDirection& d, double alpha) {
  const double upper = (it.gamma + alpha * d.dgamma).dot(it.phi + alpha * d.dphi);
  const double lower = (it.theta + alpha * d.dtheta).dot(it.psi + alpha * d.dpsi);
  return (upper + lower) / (2.0 * static_cast<double>(it.size()));
}

void fill_equality_residuals(const BoxQpProblem& problem, const IpmIterate& it, NewtonRhs& rhs) {
  rhs.stationarity = -(problem.hessian_times(it.z) + problem.linear() + it.gamma - it.theta);
  rhs.upper = (1.0 - (it.z + it.phi).array()).matrix();
  rhs.lower = (-1.0 - (it.z - it.psi).array()).matrix();
}

}  // namespace

SolveResult BoxQpSolver::solve(const BoxQpProblem& problem, const IpmIterate& init) {
  const Index n = problem.size();
  require(init.size() == n && init.gamma.size() == n && init.theta.size() == n && init.phi.size() == n &&
              init.psi.size() == n,
          "initial iterate has the wrong size");
  require(init.strictly_positive(), "initial multipliers and slacks must be strictly positive");

  SolveResult result;
  IpmIterate it = init;
  if (n == 0) {
    result.status = SolveStatus::Converged;
    result.final_iterate = it;
    return result;
  }

  NewtonSolver& newton = newton_for(problem);
  const int regularizations_before = newton.regularizations();
  result.factorization_dimension = newton.factorization_dimension();

  const bool infeasible = config_.infeasible_variant;
  const double threshold = config_.threshold(n);
  const double residual_tolerance = config_.epsilon * std::max(1.0, inf_norm(problem.linear()));
  const double fraction = config_.boundary_fraction;

  auto converged = [&](double mu) {
    if (mu > threshold) return false;
    return !infeasible || kkt_residuals(problem, it).max() <= residual_tolerance;
  };

  int k = 0;
  bool done = false;
  for (; k < config_.max_iters; ++k) {
    const double mu = duality_measure(it);
    if (!std::isfinite(mu)) throw FactorizationError("interior-point iterate became non-finite");
    result.per_iteration_mu.push_back(mu);
    if (converged(mu)) {
      done = true;
      break;
    }

    IterationRecord record;
    record.iteration = k;
    record.mu = mu;
    if (config_.record_trace) record.residuals = kkt_residuals(problem, it);

    const NewtonReduction reduction(it);
    result.floor_activations += reduction.floor_activations();
    newton.factorize(reduction.barrier_diag());

    NewtonRhs rhs;
    if (infeasible) fill_equality_residuals(problem, it, rhs);
    rhs.r1 = -it.gamma.cwiseProduct(it.phi);
    rhs.r2 = -it.theta.cwiseProduct(it.psi);
    const StepDirection affine = reduction.recover(newton.solve(reduction.reduced_rhs(rhs)), rhs);
    const double alpha_aff = step_length(it, affine, fraction);
    const double mu_aff = complementarity_after_step(it, affine, alpha_aff);
    const double sigma = std::pow(mu_aff / mu, 3);

    const double centering = sigma * mu;
    rhs.r1 = (-it.gamma.cwiseProduct(it.phi) - affine.dgamma.cwiseProduct(affine.dphi)).array() + centering;
    rhs.r2 = (-it.theta.cwiseProduct(it.psi) - affine.dtheta.cwiseProduct(affine.dpsi)).array() + centering;
    const StepDirection direction = reduction.recover(newton.solve(reduction.reduced_rhs(rhs)), rhs);
    const double alpha = step_length(it, direction, fraction);
    apply_step(it, direction, alpha);

    if (config_.record_trace) {
      record.alpha_aff = alpha_aff;
      record.alpha = alpha;
      record.sigma = sigma;
      result.trace.push_back(record);
    }
  }
  if (!done) {
    const double mu = duality_measure(it);
    result.per_iteration_mu.push_back(mu);
    done = converged(mu);
  }

  result.status = done ? SolveStatus::Converged : SolveStatus::MaxIters;
  result.iterations = k;
  result.final_mu = result.per_iteration_mu.back();
  result.z_star = it.z.cwiseMax(-1.0).cwiseMin(1.0);
  result.regularizations = newton.regularizations() - regularizations_before;
  result.final_iterate = std::move(it);
  return result;
}

SolveResult solve(const BoxQpProblem& problem, const IpmIterate& init, const SolverConfig& config) {
  BoxQpSolver solver(config);
  return solver.solve(problem, init);
}

void write_trace_csv(std::ostream& out, const SolveResult& result) {
  out << "iteration,mu,alpha_aff,alpha,sigma,res_stationarity,res_upper,res_lower\n";
  const auto old_precision = out.precision(17);
  for (const auto& r : result.trace) {
    out << r.iteration << ',' << r.mu << ',' << r.alpha_aff << ',' << r.alpha << ',' << r.sigma << ','
        << r.residuals.stationarity << ',' << r.residuals.upper << ',' << r.residuals.lower << '\n';
  }
  out.precision(old_precision);
}

}  // namespace kbqp
