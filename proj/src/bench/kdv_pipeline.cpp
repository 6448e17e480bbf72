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

#include "kbqp/bench/kdv_pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>
#include <random>

#include "kbqp/boxqp/newton.hpp"

namespace kbqp {

Manifest KdvTrainingConfig::manifest() const {
  Manifest m("kdv-training");
  m.add("data_seed", std::to_string(data.seed))
      .add("n_traj", static_cast<long long>(data.n_traj))
      .add("n_samples", static_cast<long long>(data.n_samples))
      .add("dt", data.sim.dt)
      .add("n_sub", static_cast<long long>(data.sim.n_sub))
      .add("input_amplitude", data.input_amplitude)
      .add("n_rbf", static_cast<long long>(n_rbf))
      .add("lift_seed", std::to_string(lift_seed));
  return m;
}

KoopmanModel train_kdv_model(const KdvTrainingConfig& config, KdvTrainingReport* report) {
  using Clock = std::chrono::steady_clock;
  const KdvGrid grid = KdvGrid::make(100);
  const auto t0 = Clock::now();
  DatasetReport data_report;
  const SnapshotDataset data = generate_dataset(grid, config.data, &data_report);
  const auto t1 = Clock::now();
  const LiftSpec spec = LiftSpec::random_centers(data.X.rowwise().minCoeff(), data.X.rowwise().maxCoeff(),
                                                 config.n_rbf, config.lift_seed);
  KoopmanModel model = fit(data, spec, config.fit);
  const auto t2 = Clock::now();
  if (report) {
    report->dataset = std::move(data_report);
    report->generation_time = std::chrono::duration<double>(t1 - t0).count();
    report->fit_time = std::chrono::duration<double>(t2 - t1).count();
  }
  return model;
}

BackendTiming time_newton_backends(const BoxQpProblem& problem, int repeats, std::uint64_t seed) {
  require(repeats >= 1, "backend timing: repeats must be positive");
  require(problem.has_dense() && problem.has_structured(), "backend timing needs both Hessian forms");
  using Clock = std::chrono::steady_clock;
  const Index n = problem.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log_barrier(-4.0, 2.0);
  std::normal_distribution<double> normal;

  DenseNewtonSolver dense(problem);
  StructuredNewtonSolver structured(problem);
  BackendTiming t;
  t.n = n;
  t.structured_dimension = structured.factorization_dimension();
  std::vector<double> dense_times, structured_times;
  Vector barrier(n), rhs(n);
  for (int r = 0; r <= repeats; ++r) {
    for (Index i = 0; i < n; ++i) {
      barrier[i] = std::pow(10.0, log_barrier(rng));
      rhs[i] = normal(rng);
    }
    auto a = Clock::now();
    dense.factorize(barrier);
    const Vector dz_dense = dense.solve(rhs);
    auto b = Clock::now();
    structured.factorize(barrier);
    const Vector dz_structured = structured.solve(rhs);
    auto c = Clock::now();
    if (r == 0) continue;  // warm-up
    dense_times.push_back(std::chrono::duration<double>(b - a).count());
    structured_times.push_back(std::chrono::duration<double>(c - b).count());
    const double scale = std::max(1.0, dz_dense.lpNorm<Eigen::Infinity>());
    t.max_difference = std::max(t.max_difference, (dz_dense - dz_structured).lpNorm<Eigen::Infinity>() / scale);
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  t.dense_seconds = median(dense_times);
  t.structured_seconds = median(structured_times);
  return t;
}

KdvStudy run_kdv_study(const KoopmanModel& model, const KdvStudyConfig& config) {
  const MpcWeights weights = config.loop.mpc.weights(model.n_x(), model.n_u());
  const MpcBuilder builder(model, build_prediction_matrices(model, weights.N), weights, true);
  KdvStudy study;
  study.n_variables = builder.layout().size();
  study.n_constraints = builder.layout().bound_constraints();

  ClosedLoopConfig loop = config.loop;
  loop.mpc.warm_start = false;
  study.cold = run_closed_loop(builder, loop);
  loop.mpc.warm_start = true;
  study.warm = run_closed_loop(builder, loop);
  study.timing = time_newton_backends(builder.base_problem(), config.timing_repeats, config.timing_seed);
  return study;
}

void write_kdv_study_csv(std::ostream& out, const KdvStudy& study, const Manifest& manifest) {
  manifest.write(out);
  out << "mode,t,iterations,mu_final,solve_time,u1,u2,u3,u4,tracking_rmse,max_abs_y\n";
  const auto old = out.precision(17);
  for (const ClosedLoopLog* log : {&study.cold, &study.warm}) {
    const char* mode = log->warm_start ? "warm" : "cold";
    for (const auto& s : log->steps) {
      out << mode << ',' << s.t << ',' << s.iterations << ',' << s.mu_final << ',' << s.solve_time;
      for (Index i = 0; i < s.u.size(); ++i) out << ',' << s.u[i];
      out << ',' << s.tracking_rmse << ',' << s.max_abs_y << '\n';
    }
  }
  out << "# summary\n";
  out << "# mode,mean_iterations,mean_solve_time,median_solve_time,max_solve_time,max_iter_hits\n";
  for (const ClosedLoopLog* log : {&study.cold, &study.warm}) {
    out << "# " << (log->warm_start ? "warm" : "cold") << ',' << log->mean_iterations() << ','
        << log->mean_solve_time() << ',' << log->median_solve_time() << ',' << log->max_solve_time() << ','
        << log->max_iter_hits() << '\n';
  }
  out << "# n_variables," << study.n_variables << "\n# n_constraints," << study.n_constraints << '\n';
  out << "# backend_timing,dense_s=" << study.timing.dense_seconds << ",structured_s=" << study.timing.structured_seconds
      << ",ratio=" << study.timing.ratio() << ",max_difference=" << study.timing.max_difference
      << ",structured_dimension=" << study.timing.structured_dimension << '\n';
  out.precision(old);
}

}  // namespace kbqp
