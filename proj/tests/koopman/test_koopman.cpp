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

#include <cmath>
#include <filesystem>

#include "kbqp/koopman/model.hpp"
#include "support/oracles.hpp"

using namespace kbqp;
using kbqp::testing::Rng;

namespace {

LiftSpec small_lift(Index n_x, Index n_rbf, std::uint64_t seed) {
  return LiftSpec::random_centers(Vector::Constant(n_x, -1.0), Vector::Constant(n_x, 1.0), n_rbf, seed);
}

KoopmanModel random_model(Index n_x, Index n_rbf, Index n_u, Rng& rng) {
  KoopmanModel m;
  m.lift = small_lift(n_x, n_rbf, rng());
  const Index n_psi = m.lift.lifted_dim();
  m.A = testing::random_matrix(n_psi, n_psi, rng, 0.3);
  m.B = testing::random_matrix(n_psi, n_u, rng);
  m.C = output_matrix(n_x, n_psi);
  return m;
}

}  // namespace

TEST_CASE("thin-plate values") {
  CHECK(thin_plate(0.0) == 0.0);
  CHECK(thin_plate(1.0) == 0.0);
  CHECK(thin_plate(std::exp(1.0)) == doctest::Approx(std::exp(2.0)).epsilon(1e-14));
}

TEST_CASE("lift at a center and at unit distance") {
  LiftSpec spec;
  spec.n_x = 2;
  spec.centers.resize(2, 3);
  spec.centers << 0.5, 0.0, 1.5, -0.25, 0.0, -0.25;
  Vector x(2);
  x << 0.5, -0.25;
  const Vector psi = lift(spec, x);
  REQUIRE(psi.size() == 5);
  CHECK(psi[0] == 0.5);
  CHECK(psi[1] == -0.25);
  CHECK(psi[2] == 0.0);
  CHECK(psi[4] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(psi[3] == doctest::Approx(thin_plate(std::hypot(0.5, 0.25))).epsilon(1e-14));
}

TEST_CASE("lift keeps the state in its leading entries") {
  Rng rng(1);
  const LiftSpec spec = small_lift(7, 20, 3);
  const Matrix X = testing::random_matrix(7, 50, rng, 3.0);
  const Matrix batch = lift_columns(spec, X);
  for (Index c = 0; c < X.cols(); ++c) {
    const Vector single = lift(spec, X.col(c));
    CHECK(single.head(7) == X.col(c));
    CHECK(batch.col(c).head(7) == X.col(c));
    CHECK((single - batch.col(c)).lpNorm<Eigen::Infinity>() <= 1e-11 * (1.0 + single.lpNorm<Eigen::Infinity>()));
  }
}

TEST_CASE("random centers stay in the bounding box and are reproducible") {
  Vector lo(3), hi(3);
  lo << -1.0, 0.0, 2.0;
  hi << 1.0, 0.5, 2.0;
  const LiftSpec a = LiftSpec::random_centers(lo, hi, 40, 9);
  const LiftSpec b = LiftSpec::random_centers(lo, hi, 40, 9);
  CHECK(a.centers == b.centers);
  for (Index j = 0; j < 40; ++j) {
    CHECK((a.centers.col(j).array() >= lo.array()).all());
    CHECK((a.centers.col(j).array() <= hi.array()).all());
  }
}

TEST_CASE("fit recovers an exactly linear generator") {
  Rng rng(2);
  const Index n_x = 5, n_u = 2, samples = 200;
  const Matrix A = testing::random_matrix(n_x, n_x, rng, 0.4);
  const Matrix B = testing::random_matrix(n_x, n_u, rng);
  SnapshotDataset data;
  data.X = testing::random_matrix(n_x, samples, rng);
  data.U = testing::random_matrix(n_u, samples, rng);
  data.Xp = A * data.X + B * data.U;
  LiftSpec spec;
  spec.n_x = n_x;
  spec.centers.resize(n_x, 0);
  const KoopmanModel model = fit(data, spec, FitOptions{.block_size = 37});
  CHECK((model.A - A).lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK((model.B - B).lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK(!model.fit.rank_deficient);
  CHECK(model.fit.residual <= 1e-16 * model.fit.zero_residual);
  CHECK(model.C == output_matrix(n_x, n_x));
}

TEST_CASE("fixed-point data with zero inputs") {
  Rng rng(3);
  const Index n_x = 3, samples = 60;
  SnapshotDataset data;
  data.X = testing::random_matrix(n_x, samples, rng);
  data.U = Matrix::Zero(2, samples);
  data.Xp = data.X;
  const LiftSpec spec = small_lift(n_x, 5, 1);
  const KoopmanModel model = fit(data, spec);
  CHECK(model.fit.rank_deficient);
  CHECK(model.fit.residual <= 1e-10);
  CHECK(model.B.lpNorm<Eigen::Infinity>() == 0.0);
  const Matrix Psi = lift_columns(spec, data.X);
  CHECK((model.A * Psi - Psi).lpNorm<Eigen::Infinity>() <= 1e-8);
}

TEST_CASE("fit residual is optimal among nearby models") {
  Rng rng(4);
  const Index n_x = 4, n_u = 2, samples = 300;
  SnapshotDataset data;
  data.X = testing::random_matrix(n_x, samples, rng);
  data.U = testing::random_matrix(n_u, samples, rng);
  data.Xp = data.X.array().sin().matrix() + 0.3 * testing::random_matrix(n_x, n_u, rng) * data.U;
  const LiftSpec spec = small_lift(n_x, 6, 5);
  const KoopmanModel model = fit(data, spec);
  CHECK(model.fit.residual <= model.fit.zero_residual);
  CHECK(model.fit.residual == doctest::Approx(lifted_residual(data, spec, model.A, model.B)).epsilon(1e-12));
  for (int trial = 0; trial < 50; ++trial) {
    Matrix dA = testing::random_matrix(model.n_psi(), model.n_psi(), rng);
    Matrix dB = testing::random_matrix(model.n_psi(), n_u, rng);
    const double norm = std::sqrt(dA.squaredNorm() + dB.squaredNorm());
    dA *= 1e-4 / norm;
    dB *= 1e-4 / norm;
    CHECK(lifted_residual(data, spec, model.A + dA, model.B + dB) >= model.fit.residual * (1.0 - 1e-12));
  }
}

TEST_CASE("underdetermined data is flagged") {
  Rng rng(6);
  SnapshotDataset data;
  data.X = testing::random_matrix(3, 4, rng);
  data.U = testing::random_matrix(1, 4, rng);
  data.Xp = testing::random_matrix(3, 4, rng);
  const KoopmanModel model = fit(data, small_lift(3, 4, 2));
  CHECK(model.fit.underdetermined);
  CHECK(model.fit.rank_deficient);
}

TEST_CASE("prediction matrices for N = 1 and B = 0") {
  Rng rng(7);
  KoopmanModel m = random_model(3, 4, 2, rng);
  const PredictionMatrices one = build_prediction_matrices(m, 1);
  CHECK(one.E == m.C * m.A);
  CHECK(one.F == m.C * m.B);
  m.B.setZero();
  const PredictionMatrices pm = build_prediction_matrices(m, 5);
  CHECK(pm.F.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("condensed prediction equals the step-by-step rollout") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Index N = 1 + trial % 6;
    const KoopmanModel m = random_model(3, 5, 2, rng);
    const PredictionMatrices pm = build_prediction_matrices(m, N);
    REQUIRE(pm.E.rows() == N * 3);
    REQUIRE(pm.F.cols() == N * 2);
    const Vector x0 = testing::random_vector(3, rng);
    const Matrix inputs = testing::random_matrix(N, 2, rng);

    // Oracle: explicit powers, independent of the condensation code.
    Vector psi = lift(m.lift, x0);
    const Vector psi0 = psi;
    Vector expected(N * 3);
    for (Index k = 0; k < N; ++k) {
      psi = m.A * psi + m.B * inputs.row(k).transpose();
      expected.segment(k * 3, 3) = m.C * psi;
    }
    Vector U(N * 2);
    for (Index k = 0; k < N; ++k) U.segment(k * 2, 2) = inputs.row(k).transpose();
    const Vector condensed = pm.E * psi0 + pm.F * U;
    const double tol = 1e-10 * (1.0 + psi0.lpNorm<Eigen::Infinity>()) * (1.0 + expected.lpNorm<Eigen::Infinity>());
    CHECK((condensed - expected).lpNorm<Eigen::Infinity>() <= tol);

    const Matrix rollout = predict(m, x0, inputs);
    for (Index k = 0; k < N; ++k)
      CHECK((rollout.row(k).transpose() - condensed.segment(k * 3, 3)).lpNorm<Eigen::Infinity>() <= tol);
  }
}

TEST_CASE("identity model keeps the state") {
  Rng rng(9);
  KoopmanModel m = random_model(2, 3, 1, rng);
  m.A.setIdentity();
  m.B.setZero();
  const Vector x0 = testing::random_vector(2, rng);
  const Matrix traj = predict(m, x0, Matrix::Ones(4, 1));
  for (Index k = 0; k < 4; ++k) CHECK(traj.row(k).transpose() == x0);
}

TEST_CASE("one-step prediction error on training data follows the lifted residual") {
  Rng rng(10);
  const Index n_x = 3, samples = 100;
  SnapshotDataset data;
  data.X = testing::random_matrix(n_x, samples, rng);
  data.U = testing::random_matrix(1, samples, rng);
  data.Xp = (data.X.array() * 0.9).tanh().matrix();
  data.Xp.row(0) += 0.2 * data.U.row(0);
  const LiftSpec spec = small_lift(n_x, 4, 11);
  const KoopmanModel model = fit(data, spec);
  double state_error = 0.0;
  for (Index j = 0; j < samples; ++j) {
    const Matrix one = predict(model, data.X.col(j), data.U.col(j).transpose());
    const Vector lifted_res = lift(spec, data.Xp.col(j)) - model.A * lift(spec, data.X.col(j)) - model.B * data.U.col(j);
    CHECK((data.Xp.col(j) - one.row(0).transpose() - model.C * lifted_res).lpNorm<Eigen::Infinity>() <= 1e-12);
    state_error += (data.Xp.col(j) - one.row(0).transpose()).squaredNorm();
  }
  CHECK(state_error <= model.fit.residual + 1e-12);
}

TEST_CASE("dataset and model files round-trip") {
  Rng rng(12);
  SnapshotDataset data;
  data.X = testing::random_matrix(3, 40, rng);
  data.U = testing::random_matrix(2, 40, rng);
  data.Xp = testing::random_matrix(3, 40, rng);
  const LiftSpec spec = small_lift(3, 6, 0xfeedfacecafebeefULL);
  const auto dir = std::filesystem::temp_directory_path();
  save_dataset(dir / "kbqp_ds.bin", data, &spec);
  const SnapshotDataset loaded = load_dataset(dir / "kbqp_ds.bin");
  CHECK(loaded.X == data.X);
  CHECK(loaded.U == data.U);
  CHECK(loaded.Xp == data.Xp);

  const KoopmanModel model = fit(data, spec);
  save_model(dir / "kbqp_model.bin", model);
  const KoopmanModel back = load_model(dir / "kbqp_model.bin");
  CHECK(back.A == model.A);
  CHECK(back.B == model.B);
  CHECK(back.lift.centers == model.lift.centers);
  CHECK(back.lift.seed == 0xfeedfacecafebeefULL);
  CHECK(back.fit.residual == model.fit.residual);
  CHECK(back.data_checksum == data.checksum());
  std::filesystem::remove(dir / "kbqp_ds.bin");
  std::filesystem::remove(dir / "kbqp_model.bin");
}

TEST_CASE("invalid datasets are rejected") {
  SnapshotDataset data;
  data.X = Matrix::Ones(2, 3);
  data.U = Matrix::Ones(1, 2);
  data.Xp = Matrix::Ones(2, 3);
  CHECK_THROWS_AS(data.validate(), InvalidInput);
  data.U = Matrix::Ones(1, 3);
  data.Xp(0, 0) = std::nan("");
  CHECK_THROWS_AS(data.validate(), InvalidInput);
}
