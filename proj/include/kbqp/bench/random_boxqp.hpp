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
#include <iosfwd>
#include <string>
#include <vector>

#include "kbqp/bench/manifest.hpp"
#include "kbqp/boxqp/solver.hpp"

namespace kbqp {

/// Where the log-spaced spectrum sits. FromOne spans [1, cond]; Centered spans
/// [cond^-1/2, cond^1/2], which leaves many bounds active for a standard normal h.
enum class SpectrumPlacement { FromOne, Centered };

/// H = Q D(lambda) Q^T with Q from the QR factorization of a Gaussian matrix
/// and lambda log-spaced with ratio cond; h is standard normal.
BoxQpProblem gen_random_boxqp(Index n, double cond, std::uint64_t seed,
                              SpectrumPlacement placement = SpectrumPlacement::FromOne);

std::string placement_name(SpectrumPlacement placement);
SpectrumPlacement parse_placement(const std::string& name);

/// Statistics over a list of iteration counts.
struct IterationStats {
  Index count = 0;
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
  double mean = 0.0;

  static IterationStats of(std::vector<double> values);
};

struct IterationStudyConfig {
  std::vector<Index> dims{100, 500, 1000, 2000};
  Index repeats = 100;
  double cond = 1e6;
  std::uint64_t seed = 2024;
  double epsilon = 1e-6;
  StopMode stop_mode = StopMode::AverageGap;
  SpectrumPlacement placement = SpectrumPlacement::FromOne;
  bool run_infeasible = true;
  unsigned threads = 0;  // 0: hardware concurrency

  void validate() const;
  Manifest manifest() const;
};

struct InstanceRecord {
  Index n = 0;
  Index repeat = 0;
  std::uint64_t seed = 0;
  bool feasible_variant = true;
  int iterations = 0;
  bool converged = false;
  double solve_time = 0.0;
  std::string error;  // non-empty when the instance failed
};

struct IterationSummary {
  Index n = 0;
  bool feasible_variant = true;
  IterationStats stats;
  Index failures = 0;
};

struct IterationStudy {
  IterationStudyConfig config;
  std::vector<InstanceRecord> records;
  std::vector<IterationSummary> summary;

  const IterationSummary& find(Index n, bool feasible_variant) const;
};

/// Solves every instance with the feasible cold start and, optionally, the
/// infeasible-start variant. Instances run in parallel with per-instance seeds.
IterationStudy run_iteration_study(const IterationStudyConfig& config);

void write_iteration_summary_csv(std::ostream& out, const IterationStudy& study);
void write_iteration_records_csv(std::ostream& out, const IterationStudy& study);

}  // namespace kbqp
