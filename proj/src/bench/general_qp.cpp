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

#include "kbqp/bench/general_qp.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <random>

#include "kbqp/boxqp/iterate.hpp"
#include "kbqp/common/checksum.hpp"

namespace kbqp {

GeneralQp gen_random_general_qp(Index n_x, Index n_y, std::uint64_t seed, Vector* interior) {
  require(n_x >= 1 && n_y >= 0, "gen_random_general_qp: invalid sizes");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> width(0.1, 1.0);
  auto gaussian = [&](Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index c = 0; c < cols; ++c)
      for (Index r = 0; r < rows; ++r) m(r, c) = normal(rng);
    return m;
  };

  GeneralQp qp;
  const Matrix basis = Eigen::HouseholderQR<Matrix>(gaussian(n_x, n_x)).householderQ();
  Vector lambda(n_x);
  for (Index i = 0; i < n_x; ++i)
    lambda[i] = n_x == 1 ? 1.0 : std::pow(10.0, static_cast<double>(i) / static_cast<double>(n_x - 1));
  qp.Q = basis * lambda.asDiagonal() * basis.transpose();
  qp.Q = (0.5 * (qp.Q + qp.Q.transpose())).eval();
  qp.q = gaussian(n_x, 1);
  qp.A = gaussian(n_y, n_x);
  qp.x_min = Vector::Constant(n_x, -2.0);
  qp.x_max = Vector::Constant(n_x, 1.5);
  // Interior point well inside the x box.
  std::uniform_real_distribution<double> inside(-1.5, 1.0);
  Vector x0(n_x);
  for (Index i = 0; i < n_x; ++i) x0[i] = inside(rng);
  const Vector ax = qp.A * x0;
  qp.y_min.resize(n_y);
  qp.y_max.resize(n_y);
  for (Index i = 0; i < n_y; ++i) {
    qp.y_min[i] = ax[i] - width(rng);
    qp.y_max[i] = ax[i] + width(rng);
  }
  if (interior) *interior = x0;
  return qp;
}

void GeneralQpSweepConfig::validate() const {
  require(!n_x.empty() && !row_factors.empty(), "general QP sweep: empty sweep");
  for (Index n : n_x) require(n >= 1, "general QP sweep: n_x must be positive");
  for (Index f : row_factors) require(f >= 0, "general QP sweep: row factors must be nonnegative");
  require(repeats >= 1 && rho > 0.0 && epsilon > 0.0, "general QP sweep: invalid repeats, rho or epsilon");
}

Manifest GeneralQpSweepConfig::manifest() const {
  Manifest m("general-qp");
  std::string nx, rf;
  for (Index n : n_x) nx += (nx.empty() ? "" : " ") + std::to_string(n);
  for (Index f : row_factors) rf += (rf.empty() ? "" : " ") + std::to_string(f);
  m.add("n_x", nx)
      .add("row_factors", rf)
      .add("repeats", static_cast<long long>(repeats))
      .add("rho", rho)
      .add("epsilon", epsilon)
      .add("seed", std::to_string(seed));
  return m;
}

IterationStats GeneralQpSweep::iteration_stats() const {
  std::vector<double> its;
  for (const auto& r : records) its.push_back(r.iterations);
  return IterationStats::of(std::move(its));
}

double GeneralQpSweep::worst_violation() const {
  double w = 0.0;
  for (const auto& r : records) w = std::max(w, r.max_violation);
  return w;
}

GeneralQpSweep run_generalqp_sweep(const GeneralQpSweepConfig& config) {
  config.validate();
  using Clock = std::chrono::steady_clock;
  GeneralQpSweep sweep;
  sweep.config = config;
  SolverConfig sc;
  sc.epsilon = config.epsilon;
  sc.backend = config.backend;
  SoftenOptions so;
  so.rho = config.rho;
  so.materialize_dense = config.backend == Backend::Dense;
  std::uint64_t stream = 0;
  for (Index n_x : config.n_x) {
    for (Index factor : config.row_factors) {
      const Index n_y = factor * n_x;
      for (Index r = 0; r < config.repeats; ++r) {
        const GeneralQp qp = gen_random_general_qp(n_x, n_y, derive_seed(config.seed, stream++));
        const auto t0 = Clock::now();
        const SoftBoxQp soft = soften(qp, so);
        BoxQpSolver solver(sc);
        const SolveResult res = solver.solve(soft.problem, cold_start(soft.problem.linear()));
        const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
        const SoftSolution sol = desoften(res, soft, qp);
        GeneralQpRecord rec;
        rec.n_x = n_x;
        rec.n_y = n_y;
        rec.repeat = r;
        rec.iterations = res.iterations;
        rec.converged = res.converged();
        rec.solve_time = elapsed;
        rec.max_violation = sol.violation.size() == 0 ? 0.0 : sol.violation.maxCoeff();
        rec.factorization_dimension = res.factorization_dimension;
        sweep.records.push_back(rec);
      }
    }
  }
  return sweep;
}

void write_generalqp_csv(std::ostream& out, const GeneralQpSweep& sweep) {
  sweep.config.manifest().write(out);
  out << "n_x,n_y,repeat,iterations,converged,solve_time,max_violation,factorization_dimension\n";
  const auto old = out.precision(17);
  for (const auto& r : sweep.records) {
    out << r.n_x << ',' << r.n_y << ',' << r.repeat << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << ','
        << r.solve_time << ',' << r.max_violation << ',' << r.factorization_dimension << '\n';
  }
  out.precision(old);
}

}  // namespace kbqp
