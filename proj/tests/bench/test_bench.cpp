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

#include <Eigen/Eigenvalues>

#include <sstream>

#include "kbqp/bench/general_qp.hpp"
#include "kbqp/bench/random_boxqp.hpp"
#include "kbqp/boxqp/io.hpp"
#include "support/oracles.hpp"

using namespace kbqp;

TEST_CASE("unit condition number gives the identity") {
  const BoxQpProblem p = gen_random_boxqp(30, 1.0, 4);
  CHECK((p.dense_hessian() - Matrix::Identity(30, 30)).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(gen_random_boxqp(30, 1.0, 4, SpectrumPlacement::Centered).dense_hessian().isApprox(p.dense_hessian(), 1e-14));
}

TEST_CASE("generated spectrum has the requested condition number") {
  for (auto placement : {SpectrumPlacement::FromOne, SpectrumPlacement::Centered}) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const BoxQpProblem p = gen_random_boxqp(60, 1e6, seed, placement);
      const auto [lo, hi] = testing::spectrum_extremes(p.dense_hessian());
      CHECK(hi / lo == doctest::Approx(1e6).epsilon(1e-6));
      if (placement == SpectrumPlacement::FromOne) {
        CHECK(lo == doctest::Approx(1.0).epsilon(1e-6));
      } else {
        CHECK(lo == doctest::Approx(1e-3).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("same seed gives identical problem bytes") {
  std::ostringstream a, b, c;
  boxqp_to_file(gen_random_boxqp(40, 1e6, 9)).write(a);
  boxqp_to_file(gen_random_boxqp(40, 1e6, 9)).write(b);
  boxqp_to_file(gen_random_boxqp(40, 1e6, 10)).write(c);
  CHECK(a.str() == b.str());
  CHECK(a.str() != c.str());
  CHECK_THROWS_AS(gen_random_boxqp(10, 0.5, 1), InvalidInput);
}

TEST_CASE("iteration statistics") {
  const IterationStats s = IterationStats::of({4, 9, 5, 7});
  CHECK(s.count == 4);
  CHECK(s.min == 4);
  CHECK(s.max == 9);
  CHECK(s.median == 6);
  CHECK(s.mean == 6.25);
  CHECK(IterationStats::of({3, 1, 2}).median == 2);
}

TEST_CASE("iteration study is deterministic and summarizes both variants") {
  IterationStudyConfig c;
  c.dims = {20, 40};
  c.repeats = 3;
  c.threads = 2;
  const IterationStudy a = run_iteration_study(c);
  c.threads = 1;
  const IterationStudy b = run_iteration_study(c);
  std::ostringstream sa, sb;
  write_iteration_summary_csv(sa, a);
  write_iteration_summary_csv(sb, b);
  CHECK(sa.str() == sb.str());
  CHECK(sa.str().find("# config_hash: ") != std::string::npos);
  CHECK(a.summary.size() == 4);
  CHECK(a.records.size() == 12);
  for (const auto& r : a.records) {
    CHECK(r.error.empty());
    CHECK(r.converged);
  }
  CHECK(a.find(40, true).stats.count == 3);
  CHECK_THROWS_AS(a.find(10, true), InvalidInput);

  c.repeats = 0;
  CHECK_THROWS_AS(run_iteration_study(c), InvalidInput);
}

TEST_CASE("manifest hash tracks the configuration") {
  IterationStudyConfig c;
  const std::string h = c.manifest().config_hash();
  c.seed += 1;
  CHECK(c.manifest().config_hash() != h);
  c.seed -= 1;
  CHECK(c.manifest().config_hash() == h);
}

TEST_CASE("random general QPs are feasible at their interior point") {
  Vector x0;
  const GeneralQp qp = gen_random_general_qp(5, 100, 3, &x0);
  CHECK_NOTHROW(qp.validate());
  CHECK(qp.violation(x0).maxCoeff() == 0.0);
  CHECK(((x0.array() > qp.x_min.array()) && (x0.array() < qp.x_max.array())).all());
}

TEST_CASE("general QP sweep: violation, iterations and factorization size") {
  GeneralQpSweepConfig c;
  c.n_x = {3, 6};
  c.repeats = 3;
  const GeneralQpSweep s = run_generalqp_sweep(c);
  CHECK(s.records.size() == 12);
  CHECK(s.worst_violation() <= 1e-4);
  CHECK(s.iteration_stats().median <= 15);
  for (const auto& r : s.records) {
    CHECK(r.converged);
    CHECK(r.factorization_dimension == r.n_x);
  }
  std::ostringstream out;
  write_generalqp_csv(out, s);
  CHECK(out.str().find("n_x,n_y,repeat,iterations") != std::string::npos);
}
