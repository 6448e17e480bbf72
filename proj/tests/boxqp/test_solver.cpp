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

#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "kbqp/boxqp/solver.hpp"
#include "support/oracles.hpp"

using namespace kbqp;
using kbqp::testing::Rng;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("interior unconstrained optimum") {
  const auto problem = BoxQpProblem::from_dense(Matrix::Identity(2, 2), Vector::Zero(2));
  const SolveResult r = solve(problem, cold_start(problem.linear()), SolverConfig{});
  CHECK(r.converged());
  CHECK(r.final_mu <= 1e-6);
  CHECK(r.z_star.lpNorm<Eigen::Infinity>() <= 1e-6);
}

TEST_CASE("separable objective clips -h onto the box") {
  const auto problem = BoxQpProblem::from_dense(Matrix::Identity(2, 2), vec({-3.0, 0.5}));
  const SolveResult r = solve(problem, cold_start(problem.linear()), SolverConfig{});
  CHECK(r.converged());
  CHECK(r.z_star[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.z_star[1] == doctest::Approx(-0.5).epsilon(1e-6));
}

TEST_CASE("ill-conditioned instance matches the projected-gradient oracle") {
  Rng rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix H = testing::random_spd(6, 1e6, rng);
    const Vector h = testing::random_vector(6, rng, 1e3);
    const auto oracle = testing::projected_gradient_boxqp(H, h, 1e-10);
    REQUIRE(oracle.fixed_point_residual <= 1e-10);
    const auto problem = BoxQpProblem::from_dense(H, h);
    const SolveResult r = solve(problem, cold_start(h), SolverConfig{});
    CHECK(r.converged());
    CHECK((r.z_star - oracle.z).lpNorm<Eigen::Infinity>() <= 1e-5);
  }
}

TEST_CASE("feasibility is preserved along the iterations") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 2 + trial % 15;
    const Matrix H = testing::random_spd(n, std::pow(10.0, trial % 7), rng);
    const Vector h = testing::random_vector(n, rng, std::pow(10.0, trial % 4));
    const auto problem = BoxQpProblem::from_dense(H, h);
    SolverConfig config;
    config.max_iters = 0;
    IpmIterate it = cold_start(h);
    const double tol = 1e-8 * std::max(1.0, inf_norm(h));
    // Replay the solve one iteration at a time and inspect each iterate.
    for (int k = 0; k < 40; ++k) {
      const KktResiduals res = kkt_residuals(problem, it);
      CHECK(res.max() <= tol);
      CHECK(it.strictly_positive());
      config.max_iters = 1;
      const SolveResult step = solve(problem, it, config);
      it = step.final_iterate;
      if (step.converged()) break;
    }
  }
}

TEST_CASE("per-iteration trace records residuals within the feasibility tolerance") {
  Rng rng(13);
  const Matrix H = testing::random_spd(30, 1e5, rng);
  const Vector h = testing::random_vector(30, rng, 10.0);
  SolverConfig config;
  config.record_trace = true;
  const SolveResult r = solve(BoxQpProblem::from_dense(H, h), cold_start(h), config);
  REQUIRE(r.converged());
  REQUIRE(static_cast<int>(r.trace.size()) == r.iterations);
  for (const auto& rec : r.trace) {
    CHECK(rec.residuals.max() <= 1e-8 * std::max(1.0, inf_norm(h)));
    CHECK(rec.alpha > 0.0);
    CHECK(rec.alpha <= 1.0);
    CHECK(rec.sigma >= 0.0);
  }
  std::ostringstream csv;
  write_trace_csv(csv, r);
  const std::string text = csv.str();
  CHECK(text.rfind("iteration,mu,alpha_aff,alpha,sigma,res_stationarity,res_upper,res_lower\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == r.iterations + 1);
}

TEST_CASE("termination and gap properties") {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 1 + trial % 20;
    const Matrix H = testing::random_spd(n, 1e3, rng);
    const Vector h = testing::random_vector(n, rng, 5.0);
    for (StopMode mode : {StopMode::AverageGap, StopMode::DimensionScaled}) {
      SolverConfig config;
      config.stop_mode = mode;
      const SolveResult r = solve(BoxQpProblem::from_dense(H, h), cold_start(h), config);
      REQUIRE(r.converged());
      CHECK(r.final_mu <= config.threshold(n));
      CHECK(r.per_iteration_mu.back() <= r.per_iteration_mu.front());
      CHECK(r.z_star.cwiseAbs().maxCoeff() <= 1.0);
    }
  }
}

TEST_CASE("dimension-scaled stop threshold scales with n") {
  SolverConfig config;
  config.stop_mode = StopMode::DimensionScaled;
  CHECK(config.threshold(50) == doctest::Approx(100 * 1e-6));
  config.stop_mode = StopMode::AverageGap;
  CHECK(config.threshold(50) == 1e-6);
}

TEST_CASE("invalid configurations are rejected") {
  SolverConfig config;
  config.epsilon = 0.0;
  CHECK_THROWS_AS(BoxQpSolver{config}, InvalidInput);
  config = SolverConfig{};
  config.boundary_fraction = 1.0;
  CHECK_THROWS_AS(BoxQpSolver{config}, InvalidInput);
}

TEST_CASE("iteration cap reports MaxIters") {
  Rng rng(4);
  const Matrix H = testing::random_spd(10, 1e6, rng);
  const Vector h = testing::random_vector(10, rng, 100.0);
  SolverConfig config;
  config.max_iters = 2;
  const SolveResult r = solve(BoxQpProblem::from_dense(H, h), cold_start(h), config);
  CHECK(r.status == SolveStatus::MaxIters);
  CHECK(r.iterations == 2);
  CHECK(r.per_iteration_mu.size() == 3);
}

TEST_CASE("solution satisfies the variational inequality") {
  Rng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 5 + 5 * trial;
    const Matrix H = testing::random_spd(n, 1e4, rng);
    const Vector h = testing::random_vector(n, rng, 10.0);
    const SolveResult r = solve(BoxQpProblem::from_dense(H, h), cold_start(h), SolverConfig{});
    REQUIRE(r.converged());
    const Vector g = H * r.z_star + h;
    const double slack = -1e-5 * g.norm() * std::sqrt(static_cast<double>(n));
    for (int s = 0; s < 1000; ++s) {
      const Vector z = testing::random_box_point(n, rng);
      CHECK(g.dot(z - r.z_star) >= slack);
    }
  }
}

TEST_CASE("warm starts on a slowly drifting sequence need no more iterations than cold starts") {
  Rng rng(101);
  const Index n = 50;
  const Matrix H = testing::random_spd(n, 1e4, rng);
  Vector h = testing::random_vector(n, rng, 20.0);
  const auto base = BoxQpProblem::from_dense(H, Vector::Zero(n));
  BoxQpSolver solver;
  double warm_total = 0.0, cold_total = 0.0;
  Vector previous;
  const int steps = 30;
  for (int k = 0; k < steps; ++k) {
    const Vector drift = testing::random_vector(n, rng);
    h += 0.01 * h.cwiseAbs().cwiseProduct(drift.cwiseMax(-1.0).cwiseMin(1.0));
    const auto problem = base.with_linear(h);
    const SolveResult cold = solver.solve(problem, cold_start(h));
    REQUIRE(cold.converged());
    cold_total += cold.iterations;
    const SolveResult warm = solver.solve(problem, previous.size() ? warm_start(problem, previous) : cold_start(h));
    REQUIRE(warm.converged());
    warm_total += warm.iterations;
    previous = warm.z_star;
  }
  CHECK(warm_total / steps <= cold_total / steps);
}

TEST_CASE("structured and dense backends reach the same solution") {
  Rng rng(55);
  const Index n1 = 8, n2 = 40;
  std::uniform_real_distribution<double> pos(0.5, 2.0);
  Vector wx(n2);
  for (Index i = 0; i < n2; ++i) wx[i] = pos(rng);
  const StructuredHessian sh(10.0, testing::random_matrix(n2, n1, rng, 0.3), testing::random_spd(n1, 10.0, rng), wx);
  const Vector h = testing::random_vector(n1 + n2, rng, 30.0);
  const auto problem = BoxQpProblem::from_structured(sh, h, true);
  SolverConfig dense_cfg;
  dense_cfg.backend = Backend::Dense;
  SolverConfig structured_cfg;
  structured_cfg.backend = Backend::Structured;
  const SolveResult a = solve(problem, cold_start(h), dense_cfg);
  const SolveResult b = solve(problem, cold_start(h), structured_cfg);
  REQUIRE(a.converged());
  REQUIRE(b.converged());
  CHECK(a.factorization_dimension == n1 + n2);
  CHECK(b.factorization_dimension == n1);
  CHECK((a.z_star - b.z_star).lpNorm<Eigen::Infinity>() <= 1e-6);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("infeasible-start variant converges to the same point") {
  Rng rng(33);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 10 + trial;
    const Matrix H = testing::random_spd(n, 1e4, rng);
    const Vector h = testing::random_vector(n, rng, 10.0);
    const auto problem = BoxQpProblem::from_dense(H, h);
    SolverConfig config;
    config.epsilon = 1e-9;
    const SolveResult feasible = solve(problem, cold_start(h), config);
    config.infeasible_variant = true;
    const SolveResult infeasible = solve(problem, infeasible_start(n), config);
    REQUIRE(feasible.converged());
    REQUIRE(infeasible.converged());
    CHECK(kkt_residuals(problem, infeasible.final_iterate).max() <= 1e-9 * std::max(1.0, inf_norm(h)));
    CHECK((feasible.z_star - infeasible.z_star).lpNorm<Eigen::Infinity>() <= 1e-5);
  }
}

TEST_CASE("the solver reuses its workspace only while the Hessian is shared") {
  Rng rng(3);
  const Matrix H = testing::random_spd(12, 100.0, rng);
  const auto p1 = BoxQpProblem::from_dense(H, testing::random_vector(12, rng));
  const auto p2 = p1.with_linear(testing::random_vector(12, rng));
  const auto p3 = BoxQpProblem::from_dense(2.0 * H, p1.linear());
  BoxQpSolver solver;
  const SolveResult r1 = solver.solve(p1, cold_start(p1.linear()));
  const SolveResult r2 = solver.solve(p2, cold_start(p2.linear()));
  const SolveResult r3 = solver.solve(p3, cold_start(p3.linear()));
  const SolveResult r3_fresh = solve(p3, cold_start(p3.linear()), SolverConfig{});
  CHECK(r1.converged());
  CHECK(r2.converged());
  CHECK(r3.z_star == r3_fresh.z_star);
}

TEST_CASE("random box QPs converge in a dimension-independent number of iterations") {
  Rng rng(2024);
  std::vector<int> iterations;
  for (int trial = 0; trial < 15; ++trial) {
    const Matrix H = testing::random_spd(100, 1e6, rng);
    const Vector h = testing::random_vector(100, rng);
    const SolveResult r = solve(BoxQpProblem::from_dense(H, h), cold_start(h), SolverConfig{});
    REQUIRE(r.converged());
    iterations.push_back(r.iterations);
  }
  std::nth_element(iterations.begin(), iterations.begin() + 7, iterations.end());
  CHECK(iterations[7] <= 15);
}
