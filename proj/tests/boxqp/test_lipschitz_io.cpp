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

#include <filesystem>
#include <sstream>

#include "kbqp/boxqp/io.hpp"
#include "kbqp/boxqp/lipschitz.hpp"
#include "support/oracles.hpp"

using namespace kbqp;
using kbqp::testing::Rng;

TEST_CASE("lipschitz bound of a zero observable map is zero") {
  const Matrix E = Matrix::Zero(3, 4);
  const Matrix F = Matrix::Ones(3, 2);
  CHECK(lipschitz_bound(E, F, 1.0, Matrix::Identity(5, 5), 1.0) == 0.0);
}

TEST_CASE("lipschitz bound with identity data is one") {
  const Matrix E = Matrix::Identity(3, 3);
  const Matrix F = Matrix::Zero(3, 2);
  CHECK(lipschitz_bound(E, F, 1.0, Matrix::Identity(5, 5), 1.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("lipschitz bound matches the full-spectrum oracle") {
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix E = testing::random_matrix(6, 4, rng);
    const Matrix F = testing::random_matrix(6, 2, rng);
    const Matrix H = testing::random_spd(8, 50.0, rng);
    const double rho = 3.0, L = 0.7;
    const Matrix M = E.transpose() * (F * F.transpose() + Matrix::Identity(6, 6)) * E;
    const auto [lmin_m, lmax_m] = testing::spectrum_extremes(0.5 * (M + M.transpose()));
    const auto [lmin_h, lmax_h] = testing::spectrum_extremes(H);
    (void)lmin_m;
    (void)lmax_h;
    const double expected = rho * std::sqrt(lmax_m) * L / lmin_h;
    CHECK(lipschitz_bound(E, F, rho, H, L) == doctest::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("eigenvalue iteration reports non-convergence") {
  Rng rng(1);
  const Matrix M = testing::random_spd(30, 1.0001, rng);
  EigenIterationOptions options;
  options.max_iters = 3;
  options.rel_tol = 1e-15;
  CHECK_THROWS(largest_eigenvalue(M, options));
}

TEST_CASE("lipschitz bound rejects inconsistent sizes") {
  CHECK_THROWS_AS(lipschitz_bound(Matrix::Identity(3, 3), Matrix::Zero(3, 2), 1.0, Matrix::Identity(4, 4), 1.0),
                  InvalidInput);
  CHECK_THROWS_AS(lipschitz_bound(Matrix::Identity(3, 3), Matrix::Zero(3, 2), 1.0, Matrix::Identity(5, 5), 0.0),
                  InvalidInput);
}

TEST_CASE("problem validation") {
  Matrix H = Matrix::Identity(3, 3);
  H(0, 1) = 0.5;
  CHECK_THROWS_AS(BoxQpProblem::from_dense(H, Vector::Zero(3)), InvalidInput);
  H(0, 1) = 1e-13;
  const auto p = BoxQpProblem::from_dense(H, Vector::Zero(3));
  CHECK(p.dense_hessian()(0, 1) == p.dense_hessian()(1, 0));
  Matrix indefinite = Matrix::Identity(2, 2);
  indefinite(1, 1) = -1.0;
  CHECK_THROWS(BoxQpProblem::from_dense(indefinite, Vector::Zero(2)));
  CHECK_THROWS_AS(BoxQpProblem::from_dense(Matrix::Identity(2, 2), Vector::Zero(3)), InvalidInput);
  CHECK_THROWS_AS(StructuredHessian(0.0, Matrix::Zero(2, 1), Matrix::Identity(1, 1), Vector::Ones(2)), InvalidInput);
  CHECK_THROWS_AS(StructuredHessian(1.0, Matrix::Zero(2, 1), Matrix::Identity(1, 1), Vector::Zero(2)), InvalidInput);
}

TEST_CASE("structured and dense forms agree") {
  Rng rng(10);
  const Index n1 = 4, n2 = 9;
  const StructuredHessian sh(7.0, testing::random_matrix(n2, n1, rng), testing::random_spd(n1, 3.0, rng),
                             Vector::Constant(n2, 0.4));
  const auto p = BoxQpProblem::from_structured(sh, testing::random_vector(n1 + n2, rng), true);
  const Matrix H = p.dense_hessian();
  CHECK((H - H.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
  const Vector z = testing::random_vector(n1 + n2, rng);
  CHECK((sh.multiply(z) - H * z).lpNorm<Eigen::Infinity>() <= 1e-12 * (H * z).lpNorm<Eigen::Infinity>());
  CHECK(p.objective(z) == doctest::Approx(0.5 * z.dot(H * z) + z.dot(p.linear())).epsilon(1e-12));
}

TEST_CASE("problem files round-trip bit-exactly") {
  Rng rng(14);
  const auto dir = std::filesystem::temp_directory_path();
  for (int trial = 0; trial < 20; ++trial) {
    const Index n1 = 1 + trial % 4, n2 = 1 + trial % 7;
    const Index n = n1 + n2;
    BoxQpProblem original = trial % 2 == 0
                                ? BoxQpProblem::from_dense(testing::random_spd(n, 1e3, rng), testing::random_vector(n, rng))
                                : BoxQpProblem::from_structured(
                                      StructuredHessian(2.5, testing::random_matrix(n2, n1, rng),
                                                        testing::random_spd(n1, 10.0, rng),
                                                        Vector::Constant(n2, 0.25 + trial)),
                                      testing::random_vector(n, rng), trial % 4 == 1);
    const auto path = dir / ("kbqp_roundtrip_" + std::to_string(trial) + ".bin");
    save_boxqp(path, original);
    const BoxQpProblem loaded = load_boxqp(path);
    std::filesystem::remove(path);
    CHECK(loaded.linear() == original.linear());
    CHECK(loaded.has_dense() == original.has_dense());
    CHECK(loaded.has_structured() == original.has_structured());
    if (original.has_dense()) CHECK(loaded.dense_hessian() == original.dense_hessian());
    if (original.has_structured()) {
      const auto& a = original.structured_hessian();
      const auto& b = loaded.structured_hessian();
      CHECK(a.rho() == b.rho());
      CHECK(a.F() == b.F());
      CHECK(a.M11() == b.M11());
      CHECK(a.wx_diag() == b.wx_diag());
      CHECK(a.bare_schur() == b.bare_schur());
    }
  }
}

TEST_CASE("corrupt problem files are rejected") {
  std::stringstream bad("not a matrix file");
  CHECK_THROWS(MatrixFile::read(bad));
  MatrixFile f;
  f.set_text("format", "boxqp");
  f.set_vector("h", Vector::Ones(3));
  CHECK_THROWS(boxqp_from_file(f));
}
