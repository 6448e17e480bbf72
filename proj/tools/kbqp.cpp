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

// Command-line front end: benchmarks, model training and single-problem solves.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "kbqp/bench/general_qp.hpp"
#include "kbqp/bench/kdv_pipeline.hpp"
#include "kbqp/bench/random_boxqp.hpp"
#include "kbqp/boxqp/io.hpp"
#include "kbqp/boxqp/iterate.hpp"

namespace fs = std::filesystem;
using namespace kbqp;

namespace {

std::ofstream open_output(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(dir / name);
  if (!out) throw InvalidInput("cannot write " + (dir / name).string());
  return out;
}

struct TrainingFlags {
  std::uint64_t seed = 1;
  Index n_traj = 1000;
  Index n_samples = 200;
  Index n_rbf = 200;
  std::uint64_t lift_seed = 17;
  unsigned threads = 0;

  void attach(CLI::App* app) {
    app->add_option("--seed", seed, "Dataset seed")->capture_default_str();
    app->add_option("--n-traj", n_traj, "Number of simulated trajectories")->capture_default_str();
    app->add_option("--n-samples", n_samples, "Samples per trajectory")->capture_default_str();
    app->add_option("--n-rbf", n_rbf, "Thin-plate RBF count")->capture_default_str();
    app->add_option("--lift-seed", lift_seed, "Seed for the RBF centers")->capture_default_str();
    app->add_option("--threads", threads, "Worker threads (0 = all cores)");
  }

  KdvTrainingConfig config() const {
    KdvTrainingConfig c;
    c.data.seed = seed;
    c.data.n_traj = n_traj;
    c.data.n_samples = n_samples;
    c.data.threads = threads;
    c.n_rbf = n_rbf;
    c.lift_seed = lift_seed;
    return c;
  }
};

KoopmanModel train_and_report(const KdvTrainingConfig& config) {
  KdvTrainingReport report;
  KoopmanModel model = train_kdv_model(config, &report);
  std::cerr << "trained: " << config.data.n_traj * config.data.n_samples << " snapshots, n_psi = " << model.n_psi()
            << ", resampled trajectories = " << report.dataset.resampled << ", rank = " << model.fit.rank << "/"
            << model.fit.regressors << (model.fit.rank_deficient ? " (rank deficient)" : "")
            << ", residual = " << model.fit.residual << ", simulate " << report.generation_time << " s, fit "
            << report.fit_time << " s\n";
  return model;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interior-point box-QP solver for Koopman MPC"};
  app.require_subcommand(1);

  // bench -------------------------------------------------------------------
  CLI::App* bench = app.add_subcommand("bench", "Run a benchmark experiment");
  bench->require_subcommand(1);

  IterationStudyConfig study;
  std::string out_dir = "results";
  std::string stop = "average-gap";
  bool feasible_only = false;
  CLI::App* random = bench->add_subcommand("random-boxqp", "Iteration counts on random ill-conditioned box QPs");
  random->add_option("--dims", study.dims, "Problem sizes")->delimiter(',')->capture_default_str();
  random->add_option("--repeats", study.repeats, "Instances per size")->capture_default_str();
  random->add_option("--cond", study.cond, "Hessian condition number")->capture_default_str();
  random->add_option("--seed", study.seed, "Master seed")->capture_default_str();
  random->add_option("--eps", study.epsilon, "Stopping tolerance")->capture_default_str();
  random->add_option("--stop", stop, "Stopping rule")->check(CLI::IsMember({"average-gap", "dimension-scaled"}));
  std::string placement = "from-one";
  random->add_option("--spectrum", placement, "Eigenvalue range: [1, cond] or centered on 1")
      ->check(CLI::IsMember({"from-one", "centered"}))
      ->capture_default_str();
  random->add_option("--threads", study.threads, "Worker threads (0 = all cores)");
  random->add_flag("--feasible-only", feasible_only, "Skip the infeasible-start variant");
  random->add_option("--out", out_dir, "Output directory")->capture_default_str();

  TrainingFlags kdv_train;
  KdvStudyConfig kdv_study;
  std::string model_path, config_path, kdv_backend = "auto";
  double kdv_eps = 1e-6;
  bool kdv_warm = false, kdv_cold = false;
  CLI::App* kdv = bench->add_subcommand("kdv", "Closed-loop KdV control, cold versus warm start");
  kdv_train.attach(kdv);
  kdv->add_option("--model", model_path, "Use a trained model file instead of training");
  kdv->add_option("--config", config_path, "MPC configuration (JSON)");
  kdv->add_option("--duration", kdv_study.loop.duration, "Simulated seconds")->capture_default_str();
  kdv->add_option("--eps", kdv_eps, "Stopping tolerance")->capture_default_str();
  kdv->add_option("--backend", kdv_backend, "Newton backend")->check(CLI::IsMember({"dense", "structured", "auto"}));
  kdv->add_flag("--warm", kdv_warm, "Only run the warm-start loop");
  kdv->add_flag("--cold", kdv_cold, "Only run the cold-start loop");
  kdv->add_option("--out", out_dir, "Output directory")->capture_default_str();

  GeneralQpSweepConfig sweep;
  CLI::App* general = bench->add_subcommand("general-qp", "Soft-constrained general QPs through the adapter");
  general->add_option("--dims", sweep.n_x, "Values of n_x")->delimiter(',')->capture_default_str();
  general->add_option("--row-factors", sweep.row_factors, "n_y / n_x ratios")->delimiter(',')->capture_default_str();
  general->add_option("--repeats", sweep.repeats, "Instances per size")->capture_default_str();
  general->add_option("--rho", sweep.rho, "Penalty")->capture_default_str();
  general->add_option("--seed", sweep.seed, "Master seed")->capture_default_str();
  general->add_option("--eps", sweep.epsilon, "Stopping tolerance")->capture_default_str();
  std::string general_backend = "auto";
  general->add_option("--backend", general_backend, "Newton backend")
      ->check(CLI::IsMember({"dense", "structured", "auto"}));
  general->add_option("--out", out_dir, "Output directory")->capture_default_str();

  // train-koopman -------------------------------------------------------------
  TrainingFlags train_flags;
  std::string model_out = "kdv_model.kbqp", dataset_out;
  CLI::App* train = app.add_subcommand("train-koopman", "Simulate KdV data and fit the lifted predictor");
  train_flags.attach(train);
  train->add_option("--out", model_out, "Model file")->capture_default_str();
  train->add_option("--dataset-out", dataset_out, "Also save the snapshot dataset");

  // gen-boxqp ------------------------------------------------------------------
  Index gen_n = 100;
  double gen_cond = 1e6;
  std::uint64_t gen_seed = 1;
  std::string gen_out = "problem.kbqp";
  CLI::App* gen = app.add_subcommand("gen-boxqp", "Write one random box QP to a problem file");
  gen->add_option("--n", gen_n, "Dimension")->capture_default_str();
  gen->add_option("--cond", gen_cond, "Condition number")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Seed")->capture_default_str();
  gen->add_option("--out", gen_out, "Problem file")->capture_default_str();

  // solve ----------------------------------------------------------------------
  std::string problem_path, guess_path, trace_path, solution_out, solve_backend = "auto";
  double solve_eps = 1e-6, solve_rho = 1e6;
  bool solve_warm = false, solve_cold = false, solve_infeasible = false;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Solve a box QP or general QP problem file");
  solve_cmd->add_option("problem", problem_path, "Problem file")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--eps", solve_eps, "Stopping tolerance")->capture_default_str();
  solve_cmd->add_option("--rho", solve_rho, "Penalty for general QPs")->capture_default_str();
  solve_cmd->add_option("--backend", solve_backend, "Newton backend")
      ->check(CLI::IsMember({"dense", "structured", "auto"}));
  solve_cmd->add_flag("--warm", solve_warm, "Warm start from --guess");
  solve_cmd->add_flag("--cold", solve_cold, "Cold start (default)");
  solve_cmd->add_flag("--infeasible", solve_infeasible, "Use the infeasible-start variant");
  solve_cmd->add_option("--guess", guess_path, "Matrix file with a vector section 'z'");
  solve_cmd->add_option("--trace", trace_path, "Write the per-iteration trace CSV");
  solve_cmd->add_option("--out", solution_out, "Write the solution to a matrix file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*random) {
      study.stop_mode = stop == "dimension-scaled" ? StopMode::DimensionScaled : StopMode::AverageGap;
      study.run_infeasible = !feasible_only;
      study.placement = parse_placement(placement);
      const IterationStudy result = run_iteration_study(study);
      auto summary = open_output(out_dir, "random_boxqp_summary.csv");
      write_iteration_summary_csv(summary, result);
      auto records = open_output(out_dir, "random_boxqp_records.csv");
      write_iteration_records_csv(records, result);
      write_iteration_summary_csv(std::cout, result);
    } else if (*kdv) {
      if (kdv_warm && kdv_cold) throw InvalidInput("--warm and --cold are mutually exclusive");
      const KoopmanModel model = model_path.empty() ? train_and_report(kdv_train.config()) : load_model(model_path);
      if (!config_path.empty()) {
        const double duration = kdv_study.loop.duration;
        kdv_study.loop.mpc = load_mpc_config(config_path);
        kdv_study.loop.duration = duration;
      } else {
        kdv_study.loop.mpc.epsilon = kdv_eps;
        kdv_study.loop.mpc.backend = parse_backend(kdv_backend);
      }
      Manifest manifest = kdv_train.config().manifest();
      manifest.add("model", model_path.empty() ? std::string("trained in-process") : model_path)
          .add("model_data_checksum", model.data_checksum)
          .add("mpc_config", mpc_config_to_json(kdv_study.loop.mpc).substr(0, std::string::npos))
          .add("duration", kdv_study.loop.duration);
      const KdvGrid grid = KdvGrid::make(model.n_x());
      if (kdv_warm || kdv_cold) {
        kdv_study.loop.mpc.warm_start = kdv_warm;
        const ClosedLoopLog log = run_closed_loop(model, kdv_study.loop);
        auto out = open_output(out_dir, kdv_warm ? "kdv_warm.csv" : "kdv_cold.csv");
        manifest.write(out);
        write_closed_loop_csv(out, log);
        save_field(fs::path(out_dir) / (kdv_warm ? "kdv_field_warm.kbqp" : "kdv_field_cold.kbqp"), log, grid);
        std::cout << (kdv_warm ? "warm" : "cold") << ": mean iterations " << log.mean_iterations()
                  << ", mean solve " << 1e3 * log.mean_solve_time() << " ms, max solve "
                  << 1e3 * log.max_solve_time() << " ms\n";
      } else {
        const KdvStudy result = run_kdv_study(model, kdv_study);
        auto out = open_output(out_dir, "kdv_study.csv");
        write_kdv_study_csv(out, result, manifest);
        save_field(fs::path(out_dir) / "kdv_field_cold.kbqp", result.cold, grid);
        save_field(fs::path(out_dir) / "kdv_field_warm.kbqp", result.warm, grid);
        std::cout << "variables " << result.n_variables << ", bound constraints " << result.n_constraints << '\n'
                  << "cold: mean iterations " << result.cold.mean_iterations() << ", mean solve "
                  << 1e3 * result.cold.mean_solve_time() << " ms\n"
                  << "warm: mean iterations " << result.warm.mean_iterations() << ", mean solve "
                  << 1e3 * result.warm.mean_solve_time() << " ms\n"
                  << "warm/cold iteration ratio " << result.warm.mean_iterations() / result.cold.mean_iterations()
                  << '\n'
                  << "Newton step: dense " << 1e3 * result.timing.dense_seconds << " ms, structured "
                  << 1e3 * result.timing.structured_seconds << " ms (ratio " << result.timing.ratio() << ")\n";
      }
    } else if (*general) {
      sweep.backend = parse_backend(general_backend);
      const GeneralQpSweep result = run_generalqp_sweep(sweep);
      auto out = open_output(out_dir, "general_qp.csv");
      write_generalqp_csv(out, result);
      const IterationStats s = result.iteration_stats();
      std::cout << "instances " << s.count << ", iterations median " << s.median << " (min " << s.min << ", max "
                << s.max << "), worst violation " << result.worst_violation() << '\n';
    } else if (*train) {
      const KdvTrainingConfig config = train_flags.config();
      if (!dataset_out.empty()) {
        const SnapshotDataset data = generate_dataset(KdvGrid::make(100), config.data);
        save_dataset(dataset_out, data);
      }
      save_model(model_out, train_and_report(config));
      std::cout << "model written to " << model_out << '\n';
    } else if (*gen) {
      save_boxqp(gen_out, gen_random_boxqp(gen_n, gen_cond, gen_seed));
      std::cout << "problem written to " << gen_out << '\n';
    } else if (*solve_cmd) {
      if (solve_warm && solve_cold) throw InvalidInput("--warm and --cold are mutually exclusive");
      if (solve_warm && guess_path.empty()) throw InvalidInput("--warm needs --guess");
      const MatrixFile file = MatrixFile::load(problem_path);
      const std::string format = file.has("format") ? file.text("format") : "boxqp";
      std::optional<GeneralQp> general_qp;
      std::optional<SoftBoxQp> soft;
      BoxQpProblem problem = [&]() {
        if (format == "general_qp") {
          general_qp = general_qp_from_file(file);
          SoftenOptions so;
          so.rho = solve_rho;
          so.materialize_dense = solve_backend == "dense";
          soft = soften(*general_qp, so);
          return soft->problem;
        }
        return boxqp_from_file(file);
      }();
      SolverConfig sc;
      sc.epsilon = solve_eps;
      sc.backend = parse_backend(solve_backend);
      sc.infeasible_variant = solve_infeasible;
      sc.record_trace = !trace_path.empty();
      IpmIterate init;
      if (solve_infeasible) {
        init = infeasible_start(problem.size());
      } else if (solve_warm) {
        init = warm_start(problem, MatrixFile::load(guess_path).vector("z"));
      } else {
        init = cold_start(problem.linear());
      }
      BoxQpSolver solver(sc);
      const SolveResult r = solver.solve(problem, init);
      std::cout << "status " << (r.converged() ? "converged" : "max-iterations") << ", iterations " << r.iterations
                << ", mu " << r.final_mu << ", objective " << problem.objective(r.z_star)
                << ", factorization dimension " << r.factorization_dimension << '\n';
      if (!trace_path.empty()) {
        std::ofstream trace(trace_path);
        write_trace_csv(trace, r);
      }
      if (!solution_out.empty()) {
        MatrixFile out;
        out.set_text("format", "solution");
        out.set_vector("z", r.z_star);
        if (soft) {
          const SoftSolution s = desoften(r, *soft, *general_qp);
          out.set_vector("x", s.x);
          out.set_vector("y", s.y);
          out.set_vector("violation", s.violation);
          std::cout << "max violation " << (s.violation.size() ? s.violation.maxCoeff() : 0.0) << '\n';
        }
        out.save(solution_out);
      }
      return r.converged() ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
