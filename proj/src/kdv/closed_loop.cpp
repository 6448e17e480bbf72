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

#include "kbqp/kdv/closed_loop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include "kbqp/boxqp/iterate.hpp"
#include "kbqp/common/matrix_io.hpp"

namespace kbqp {

double ClosedLoopLog::mean_iterations() const {
  if (steps.empty()) return 0.0;
  double s = 0.0;
  for (const auto& st : steps) s += st.iterations;
  return s / static_cast<double>(steps.size());
}

double ClosedLoopLog::mean_solve_time() const {
  if (steps.empty()) return 0.0;
  double s = 0.0;
  for (const auto& st : steps) s += st.solve_time;
  return s / static_cast<double>(steps.size());
}

double ClosedLoopLog::median_solve_time() const {
  if (steps.empty()) return 0.0;
  std::vector<double> t;
  t.reserve(steps.size());
  for (const auto& st : steps) t.push_back(st.solve_time);
  const auto mid = t.begin() + static_cast<std::ptrdiff_t>(t.size() / 2);
  std::nth_element(t.begin(), mid, t.end());
  return *mid;
}

double ClosedLoopLog::max_solve_time() const {
  double m = 0.0;
  for (const auto& st : steps) m = std::max(m, st.solve_time);
  return m;
}

double ClosedLoopLog::max_abs_input() const {
  double m = 0.0;
  for (const auto& st : steps) m = std::max(m, st.u.cwiseAbs().maxCoeff());
  return m;
}

Index ClosedLoopLog::max_iter_hits() const {
  return static_cast<Index>(std::count_if(steps.begin(), steps.end(), [](const auto& s) { return !s.converged; }));
}

ClosedLoopLog run_closed_loop(const MpcBuilder& builder, const ClosedLoopConfig& config) {
  using Clock = std::chrono::steady_clock;
  const DecisionLayout& layout = builder.layout();
  const KdvGrid grid = KdvGrid::make(layout.n_x);
  require(layout.n_u == 4, "closed loop: the KdV plant has four actuators");
  require(config.duration > 0.0, "closed loop: duration must be positive");
  KdvSimulator sim(grid, config.sim);
  const double dt = config.sim.dt;
  const Index n_steps = static_cast<Index>(std::llround(config.duration / dt));

  Vector y = config.y0.size() == 0 ? Vector::Zero(grid.n_nodes) : config.y0;
  require(y.size() == grid.n_nodes, "closed loop: initial profile has the wrong length");

  BoxQpSolver solver(config.mpc.solver());
  const bool warm = config.mpc.warm_start;
  MpcReferences refs{Vector(), config.mpc.reference.input(layout.n_u)};

  ClosedLoopLog log;
  log.warm_start = warm;
  log.steps.reserve(static_cast<std::size_t>(n_steps));
  if (config.record_field) {
    log.field.resize(n_steps + 1, grid.n_nodes);
    log.times.resize(n_steps + 1);
    log.field.row(0) = y.transpose();
    log.times[0] = 0.0;
  }

  Vector previous;
  Vector h;
  for (Index k = 0; k < n_steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    refs.x_r = config.mpc.reference.state_at(t, k, grid.x);

    const auto start = Clock::now();
    const Vector psi = lift(builder.model().lift, y);
    builder.linear_term(refs, psi, h);
    const BoxQpProblem problem = builder.base_problem().with_linear(h);
    const IpmIterate init =
        warm && previous.size() > 0 ? warm_start(problem, shift_guess(previous, layout)) : cold_start(problem.linear());
    const SolveResult result = solver.solve(problem, init);
    const auto stop = Clock::now();

    ClosedLoopStep step;
    step.t = t;
    step.iterations = result.iterations;
    step.mu_final = result.final_mu;
    step.solve_time = std::chrono::duration<double>(stop - start).count();
    step.u = extract_policy(result, layout);
    step.tracking_rmse = std::sqrt((y - refs.x_r).squaredNorm() / static_cast<double>(y.size()));
    step.max_abs_y = y.cwiseAbs().maxCoeff();
    step.converged = result.converged();
    previous = result.z_star;

    sim.advance(y, step.u);
    if (config.record_field) {
      log.field.row(k + 1) = y.transpose();
      log.times[k + 1] = t + dt;
    }
    log.steps.push_back(std::move(step));
  }
  return log;
}

ClosedLoopLog run_closed_loop(const KoopmanModel& model, const ClosedLoopConfig& config) {
  const MpcWeights weights = config.mpc.weights(model.n_x(), model.n_u());
  const MpcBuilder builder(model, build_prediction_matrices(model, weights.N), weights,
                           config.mpc.backend == Backend::Dense);
  return run_closed_loop(builder, config);
}

void write_closed_loop_csv(std::ostream& out, const ClosedLoopLog& log) {
  out << "t,iterations,mu_final,solve_time,u1,u2,u3,u4,tracking_rmse,max_abs_y\n";
  const auto old = out.precision(17);
  for (const auto& s : log.steps) {
    out << s.t << ',' << s.iterations << ',' << s.mu_final << ',' << s.solve_time;
    for (Index i = 0; i < s.u.size(); ++i) out << ',' << s.u[i];
    out << ',' << s.tracking_rmse << ',' << s.max_abs_y << '\n';
  }
  out.precision(old);
}

void save_field(const std::filesystem::path& path, const ClosedLoopLog& log, const KdvGrid& grid) {
  MatrixFile f;
  f.set_text("format", "kdv_field");
  f.set_vector("x", grid.x);
  f.set_vector("t", log.times);
  f.set_matrix("y", log.field);
  Matrix inputs(static_cast<Index>(log.steps.size()), 4);
  for (std::size_t k = 0; k < log.steps.size(); ++k) inputs.row(static_cast<Index>(k)) = log.steps[k].u.transpose();
  f.set_matrix("u", inputs);
  f.save(path);
}

}  // namespace kbqp
