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

#include "kbqp/bench/random_boxqp.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <ostream>
#include <random>
#include <thread>

#include "kbqp/boxqp/iterate.hpp"
#include "kbqp/common/checksum.hpp"

namespace kbqp {

std::string placement_name(SpectrumPlacement placement) {
  return placement == SpectrumPlacement::Centered ? "centered" : "from-one";
}

SpectrumPlacement parse_placement(const std::string& name) {
  if (name == "from-one") return SpectrumPlacement::FromOne;
  if (name == "centered") return SpectrumPlacement::Centered;
  throw InvalidInput("unknown spectrum placement '" + name + "'");
}

BoxQpProblem gen_random_boxqp(Index n, double cond, std::uint64_t seed, SpectrumPlacement placement) {
  require(n >= 1, "gen_random_boxqp: n must be positive");
  require(std::isfinite(cond) && cond >= 1.0, "gen_random_boxqp: cond must be at least 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix G(n, n);
  for (Index c = 0; c < n; ++c)
    for (Index r = 0; r < n; ++r) G(r, c) = normal(rng);
  Vector h(n);
  for (Index i = 0; i < n; ++i) h[i] = normal(rng);

  const Matrix Q = Eigen::HouseholderQR<Matrix>(G).householderQ();
  const double offset = placement == SpectrumPlacement::Centered ? -0.5 : 0.0;
  Vector sqrt_lambda(n);
  for (Index i = 0; i < n; ++i) {
    const double frac = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    sqrt_lambda[i] = std::sqrt(std::pow(cond, frac + offset));
  }
  // H = (Q S)(Q S)^T is symmetric by construction when only the lower half is formed.
  const Matrix QS = Q * sqrt_lambda.asDiagonal();
  Matrix H = Matrix::Zero(n, n);
  H.selfadjointView<Eigen::Lower>().rankUpdate(QS);
  H.triangularView<Eigen::StrictlyUpper>() = H.transpose();
  return BoxQpProblem::from_dense(std::move(H), std::move(h));
}

IterationStats IterationStats::of(std::vector<double> values) {
  IterationStats s;
  s.count = static_cast<Index>(values.size());
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  s.min = values.front();
  s.max = values.back();
  const std::size_t m = values.size() / 2;
  s.median = values.size() % 2 == 1 ? values[m] : 0.5 * (values[m - 1] + values[m]);
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  return s;
}

void IterationStudyConfig::validate() const {
  require(!dims.empty(), "iteration study: dims must not be empty");
  for (Index n : dims) require(n >= 1, "iteration study: dims must be positive");
  require(repeats >= 1, "iteration study: repeats must be at least 1");
  require(cond >= 1.0, "iteration study: cond must be at least 1");
  require(epsilon > 0.0, "iteration study: epsilon must be positive");
}

Manifest IterationStudyConfig::manifest() const {
  Manifest m("random-boxqp");
  std::string d;
  for (Index n : dims) d += (d.empty() ? "" : " ") + std::to_string(n);
  m.add("dims", d)
      .add("repeats", static_cast<long long>(repeats))
      .add("cond", cond)
      .add("seed", std::to_string(seed))
      .add("epsilon", epsilon)
      .add("spectrum", placement_name(placement))
      .add("stop_mode", stop_mode == StopMode::AverageGap ? std::string("average-gap") : std::string("dimension-scaled"))
      .add("infeasible_variant", std::string(run_infeasible ? "yes" : "no"));
  return m;
}

const IterationSummary& IterationStudy::find(Index n, bool feasible_variant) const {
  for (const auto& s : summary)
    if (s.n == n && s.feasible_variant == feasible_variant) return s;
  throw InvalidInput("iteration study: no summary row for n = " + std::to_string(n));
}

IterationStudy run_iteration_study(const IterationStudyConfig& config) {
  config.validate();
  using Clock = std::chrono::steady_clock;
  IterationStudy study;
  study.config = config;
  const Index per_instance = config.run_infeasible ? 2 : 1;
  struct Job {
    Index n;
    Index repeat;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t d = 0; d < config.dims.size(); ++d)
    for (Index r = 0; r < config.repeats; ++r)
      jobs.push_back({config.dims[d], r, derive_seed(config.seed, (static_cast<std::uint64_t>(d) << 32) | r)});
  // Largest instances first keeps the worker pool balanced.
  std::stable_sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) { return a.n > b.n; });
  study.records.resize(jobs.size() * static_cast<std::size_t>(per_instance));

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const Job& job = jobs[j];
      InstanceRecord* out = &study.records[j * static_cast<std::size_t>(per_instance)];
      for (Index v = 0; v < per_instance; ++v) {
        out[v].n = job.n;
        out[v].repeat = job.repeat;
        out[v].seed = job.seed;
        out[v].feasible_variant = v == 0;
      }
      try {
        const BoxQpProblem problem = gen_random_boxqp(job.n, config.cond, job.seed, config.placement);
        for (Index v = 0; v < per_instance; ++v) {
          SolverConfig sc;
          sc.epsilon = config.epsilon;
          sc.stop_mode = config.stop_mode;
          sc.backend = Backend::Dense;
          sc.infeasible_variant = v == 1;
          try {
            BoxQpSolver solver(sc);
            const IpmIterate init = v == 0 ? cold_start(problem.linear()) : infeasible_start(job.n);
            const auto t0 = Clock::now();
            const SolveResult r = solver.solve(problem, init);
            out[v].solve_time = std::chrono::duration<double>(Clock::now() - t0).count();
            out[v].iterations = r.iterations;
            out[v].converged = r.converged();
            if (!r.converged()) out[v].error = "max iterations";
          } catch (const std::exception& e) {
            out[v].error = e.what();
          }
        }
      } catch (const std::exception& e) {
        for (Index v = 0; v < per_instance; ++v) out[v].error = e.what();
      }
    }
  };
  unsigned threads = config.threads != 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::stable_sort(study.records.begin(), study.records.end(), [](const auto& a, const auto& b) {
    if (a.n != b.n) return a.n < b.n;
    if (a.feasible_variant != b.feasible_variant) return a.feasible_variant;
    return a.repeat < b.repeat;
  });

  for (Index n : config.dims) {
    for (Index v = 0; v < per_instance; ++v) {
      IterationSummary s;
      s.n = n;
      s.feasible_variant = v == 0;
      std::vector<double> its;
      for (const auto& r : study.records) {
        if (r.n != n || r.feasible_variant != s.feasible_variant) continue;
        if (r.error.empty()) {
          its.push_back(r.iterations);
        } else {
          ++s.failures;
        }
      }
      s.stats = IterationStats::of(std::move(its));
      study.summary.push_back(s);
    }
  }
  return study;
}

void write_iteration_summary_csv(std::ostream& out, const IterationStudy& study) {
  study.config.manifest().write(out);
  out << "n,variant,count,failures,min,median,max,mean\n";
  for (const auto& s : study.summary) {
    out << s.n << ',' << (s.feasible_variant ? "feasible" : "infeasible") << ',' << s.stats.count << ','
        << s.failures << ',' << s.stats.min << ',' << s.stats.median << ',' << s.stats.max << ',' << s.stats.mean
        << '\n';
  }
}

namespace {

std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

void write_iteration_records_csv(std::ostream& out, const IterationStudy& study) {
  study.config.manifest().write(out);
  out << "n,repeat,seed,variant,iterations,converged,solve_time,error\n";
  const auto old = out.precision(17);
  for (const auto& r : study.records) {
    out << r.n << ',' << r.repeat << ',' << r.seed << ',' << (r.feasible_variant ? "feasible" : "infeasible") << ','
        << r.iterations << ',' << (r.converged ? 1 : 0) << ',' << r.solve_time << ',' << csv_safe(r.error) << '\n';
  }
  out.precision(old);
}

}  // namespace kbqp
