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
#include <filesystem>
#include <iosfwd>

#include "kbqp/bench/manifest.hpp"
#include "kbqp/kdv/closed_loop.hpp"

namespace kbqp {

struct KdvTrainingConfig {
  DatasetOptions data;
  Index n_rbf = 200;
  std::uint64_t lift_seed = 17;
  FitOptions fit;

  Manifest manifest() const;
};

struct KdvTrainingReport {
  DatasetReport dataset;
  double generation_time = 0.0;
  double fit_time = 0.0;
};

/// Simulates the training set, draws RBF centers in its bounding box and fits the predictor.
KoopmanModel train_kdv_model(const KdvTrainingConfig& config, KdvTrainingReport* report = nullptr);

/// Paired timing of one Newton factorization + solve on identical systems.
struct BackendTiming {
  Index n = 0;
  Index structured_dimension = 0;
  double dense_seconds = 0.0;       // median per iteration
  double structured_seconds = 0.0;  // median per iteration
  double max_difference = 0.0;      // |dz_dense - dz_structured|_inf over the sampled systems
  double ratio() const { return dense_seconds > 0.0 ? structured_seconds / dense_seconds : 0.0; }
};

/// Samples barrier diagonals and right-hand sides from `seed`, times both
/// backends (one warm-up call excluded) and compares their solutions.
BackendTiming time_newton_backends(const BoxQpProblem& problem, int repeats, std::uint64_t seed);

struct KdvStudyConfig {
  ClosedLoopConfig loop;
  int timing_repeats = 50;
  std::uint64_t timing_seed = 99;
};

struct KdvStudy {
  ClosedLoopLog cold;
  ClosedLoopLog warm;
  BackendTiming timing;
  Index n_variables = 0;
  Index n_constraints = 0;
};

KdvStudy run_kdv_study(const KoopmanModel& model, const KdvStudyConfig& config);

/// Per-step rows for both modes followed by summary rows.
void write_kdv_study_csv(std::ostream& out, const KdvStudy& study, const Manifest& manifest);

}  // namespace kbqp
