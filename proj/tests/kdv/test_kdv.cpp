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
#include <numbers>
#include <sstream>

#include "kbqp/kdv/closed_loop.hpp"
#include "kbqp/kdv/simulator.hpp"
#include "support/oracles.hpp"

using namespace kbqp;

namespace {

constexpr double kPi = std::numbers::pi;

KdvOptions linear_only() {
  KdvOptions o;
  o.nonlinear = false;
  return o;
}

}  // namespace

TEST_CASE("grid layout and wavenumber order") {
  const KdvGrid g = KdvGrid::make(100);
  CHECK(g.n_nodes == 100);
  CHECK(g.dx == doctest::Approx(2 * kPi / 100).epsilon(1e-15));
  CHECK(g.x[0] == -kPi);
  CHECK(g.x[99] == doctest::Approx(kPi - g.dx).epsilon(1e-15));
  CHECK(g.wavenumbers[0] == 0.0);
  CHECK(g.wavenumbers[49] == 49.0);
  CHECK(g.wavenumbers[50] == -50.0);
  CHECK(g.wavenumbers[99] == -1.0);
  CHECK_THROWS_AS(KdvGrid::make(99), InvalidInput);
}

TEST_CASE("actuator shapes and initial profiles") {
  const KdvGrid g = KdvGrid::make(100);
  const Matrix V = control_shapes(g);
  REQUIRE(V.cols() == 4);
  CHECK(V.minCoeff() > 0.0);
  const double centers[4] = {-kPi / 2, -kPi / 6, kPi / 6, kPi / 2};
  for (int i = 0; i < 4; ++i) {
    Index arg = 0;
    const double peak = V.col(i).maxCoeff(&arg);
    CHECK(peak <= 1.0);
    CHECK(peak >= std::exp(-25.0 * 0.25 * g.dx * g.dx));
    CHECK(std::abs(g.x[arg] - centers[i]) <= 0.5 * g.dx + 1e-12);
  }
  const Matrix P = initial_profiles(g);
  CHECK(P(75, 0) == doctest::Approx(1.0).epsilon(1e-12));  // x = pi/2
  CHECK(P(50, 1) == doctest::Approx(0.0).epsilon(1e-15));  // x = 0
  CHECK(P(0, 3) == doctest::Approx(0.0).epsilon(1e-12));   // x = -pi
  for (std::uint64_t s = 0; s < 200; ++s) CHECK(random_initial_profile(P, s).cwiseAbs().maxCoeff() <= 1.0 + 1e-15);
}

TEST_CASE("rest is an exact equilibrium") {
  KdvSimulator sim(KdvGrid::make(100));
  KdvState s{Vector::Zero(100), 0.0};
  for (int k = 0; k < 50; ++k) s = sim.step(s, Vector::Zero(4));
  CHECK(s.y.isZero(0.0));
  CHECK(s.t == doctest::Approx(0.5));
}

TEST_CASE("linear dispersion advances each mode's phase by k^3 dt") {
  const KdvGrid g = KdvGrid::make(100);
  KdvSimulator sim(g, linear_only());
  const double dt = sim.options().dt;
  for (int k : {1, 2, 3, 5, 10, 20, 33, 49}) {
    Vector y = (static_cast<double>(k) * g.x.array()).cos().matrix();
    Vector one = y;
    sim.advance(one, Vector::Zero(4));
    const double kk = static_cast<double>(k);
    const Vector expected_one = (kk * g.x.array() + kk * kk * kk * dt).cos().matrix();
    CHECK((one - expected_one).lpNorm<Eigen::Infinity>() <= 1e-12);
    for (int step = 0; step < 100; ++step) sim.advance(y, Vector::Zero(4));
    const Vector expected = (kk * g.x.array() + kk * kk * kk * 100.0 * dt).cos().matrix();
    INFO("k = " << k);
    CHECK((y - expected).lpNorm<Eigen::Infinity>() <= 1e-10);
  }
}

TEST_CASE("band-limited profile follows the analytic dispersion solution") {
  const KdvGrid g = KdvGrid::make(100);
  KdvSimulator sim(g, linear_only());
  testing::Rng rng(3);
  const Vector a = testing::random_vector(20, rng);
  const Vector b = testing::random_vector(20, rng);
  auto exact = [&](double t) {
    Vector y = Vector::Constant(g.n_nodes, 0.3);
    for (Index k = 1; k <= 20; ++k) {
      const double kk = static_cast<double>(k);
      const auto arg = kk * g.x.array() + kk * kk * kk * t;
      y += (a[k - 1] * arg.cos() + b[k - 1] * arg.sin()).matrix();
    }
    return y;
  };
  Vector y = exact(0.0);
  for (int s = 0; s < 100; ++s) sim.advance(y, Vector::Zero(4));
  CHECK((y - exact(1.0)).lpNorm<Eigen::Infinity>() <= 1e-10);
  CHECK((sim.propagate_linear(exact(0.0), 1.0) - exact(1.0)).lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("unforced mass conservation") {
  const KdvGrid g = KdvGrid::make(100);
  KdvSimulator sim(g);
  const Matrix P = initial_profiles(g);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Vector y = random_initial_profile(P, seed);
    const double m0 = g.mass(y);
    double worst_step = 0.0;
    double prev = m0;
    for (int k = 0; k < 1000; ++k) {
      sim.advance(y, Vector::Zero(4));
      const double m = g.mass(y);
      worst_step = std::max(worst_step, std::abs(m - prev));
      prev = m;
    }
    CHECK(worst_step <= 1e-8);
    CHECK(std::abs(prev - m0) <= 1e-6);
    CHECK(y.cwiseAbs().maxCoeff() < 3.0);
  }
}

TEST_CASE("forcing injects mass at the actuator rate") {
  const KdvGrid g = KdvGrid::make(100);
  KdvSimulator sim(g);
  Vector y = Vector::Zero(100);
  const Vector u(Eigen::Vector4d(0.5, -1.0, 0.25, 1.0));
  sim.advance(y, u);
  const double expected = sim.options().dt * g.mass(control_shapes(g) * u);
  CHECK(g.mass(y) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("substep refinement converges") {
  // Dispersion makes high modes stiff at this dt, so only convergence, not a clean rate, is asserted.
  const KdvGrid g = KdvGrid::make(100);
  const Vector y0 = random_initial_profile(initial_profiles(g), 11);
  const Vector u(Eigen::Vector4d(0.3, -0.2, 0.5, -0.4));
  auto run = [&](int n_sub) {
    KdvOptions o;
    o.dt = 0.05;
    o.n_sub = n_sub;
    KdvSimulator sim(g, o);
    Vector y = y0;
    for (int k = 0; k < 20; ++k) sim.advance(y, u);
    return y;
  };
  const Vector ref = run(256);
  const double coarse = (run(1) - ref).norm();
  const double fine = (run(32) - ref).norm();
  CHECK(fine <= 0.01 * coarse);
}

TEST_CASE("blow-up and invalid inputs are reported") {
  const KdvGrid g = KdvGrid::make(100);
  KdvOptions o;
  o.blowup_threshold = 2.0;
  KdvSimulator sim(g, o);
  Vector y = Vector::Constant(100, 2.5);
  CHECK_THROWS_AS(sim.advance(y, Vector::Zero(4)), KdvBlowUp);
  Vector ok = Vector::Zero(100);
  Vector nan_u = Vector::Zero(4);
  nan_u[2] = std::nan("");
  CHECK_THROWS_AS(sim.advance(ok, nan_u), InvalidInput);
  CHECK_THROWS_AS(sim.advance(ok, Vector::Zero(3)), InvalidInput);
  KdvOptions bad;
  bad.dt = 0.0;
  CHECK_THROWS_AS(KdvSimulator(g, bad), InvalidInput);
}

TEST_CASE("dataset bookkeeping") {
  const KdvGrid g = KdvGrid::make(100);
  DatasetOptions o;
  o.n_traj = 1;
  o.n_samples = 2;
  const SnapshotDataset d = generate_dataset(g, o);
  CHECK(d.size() == 2);
  CHECK(d.n_x() == 100);
  CHECK(d.n_u() == 4);
  CHECK(d.X.col(1) == d.Xp.col(0));
  CHECK(d.U.cwiseAbs().maxCoeff() <= 1.0);
}

TEST_CASE("unforced linear dataset matches exact dispersion") {
  const KdvGrid g = KdvGrid::make(100);
  DatasetOptions o;
  o.n_traj = 4;
  o.n_samples = 5;
  o.input_amplitude = 0.0;
  o.sim.nonlinear = false;
  const SnapshotDataset d = generate_dataset(g, o);
  CHECK(d.U.isZero(0.0));
  KdvSimulator oracle(g, o.sim);
  for (Index j = 0; j < d.size(); ++j) {
    const Vector expected = oracle.propagate_linear(d.X.col(j), o.sim.dt);
    CHECK((d.Xp.col(j) - expected).lpNorm<Eigen::Infinity>() <= 1e-13);
  }
}

TEST_CASE("dataset generation is deterministic and replays bit-identically") {
  const KdvGrid g = KdvGrid::make(100);
  DatasetOptions o;
  o.seed = 77;
  o.n_traj = 6;
  o.n_samples = 30;
  o.threads = 1;
  DatasetReport report;
  const SnapshotDataset serial = generate_dataset(g, o, &report);
  CHECK(report.attempts.size() == 6);
  o.threads = 3;
  const SnapshotDataset parallel = generate_dataset(g, o);
  CHECK(serial.checksum() == parallel.checksum());
  CHECK(serial.X == parallel.X);

  KdvSimulator sim(g, o.sim);
  for (Index j = 0; j < serial.size(); ++j) {
    Vector y = serial.X.col(j);
    sim.advance(y, serial.U.col(j));
    CHECK((y.array() == serial.Xp.col(j).array()).all());
  }
  o.seed = 78;
  CHECK(generate_dataset(g, o).checksum() != serial.checksum());
}

namespace {

KoopmanModel small_kdv_model(Index n_rbf = 8) {
  const KdvGrid g = KdvGrid::make(100);
  DatasetOptions o;
  o.seed = 5;
  o.n_traj = 30;
  o.n_samples = 40;
  const SnapshotDataset d = generate_dataset(g, o);
  const LiftSpec spec = LiftSpec::random_centers(d.X.rowwise().minCoeff(), d.X.rowwise().maxCoeff(), n_rbf, 9);
  return fit(d, spec);
}

}  // namespace

TEST_CASE("closed loop regulates the rest state with a zero reference") {
  // Without radial features the lifted model has the origin as an exact fixed point.
  const KoopmanModel model = small_kdv_model(0);
  ClosedLoopConfig c;
  c.duration = 0.3;
  c.mpc.reference.kind = ReferenceSpec::Kind::Constant;
  c.mpc.reference.constant = Vector::Zero(1);
  const ClosedLoopLog log = run_closed_loop(model, c);
  REQUIRE(log.steps.size() == 30);
  CHECK(log.max_abs_input() <= 1e-6);
  CHECK(log.field.cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(log.max_iter_hits() == 0);
  CHECK(log.field.rows() == 31);
}

TEST_CASE("closed loop with a sinusoidal reference respects the input box") {
  const KoopmanModel model = small_kdv_model();
  ClosedLoopConfig c;
  c.duration = 0.5;
  const ClosedLoopLog warm = run_closed_loop(model, c);
  CHECK(warm.warm_start);
  CHECK(warm.max_abs_input() <= 1.0);
  for (const auto& s : warm.steps) {
    CHECK(s.iterations > 0);
    CHECK(s.solve_time > 0.0);
  }
  c.mpc.warm_start = false;
  const ClosedLoopLog cold = run_closed_loop(model, c);
  CHECK(cold.max_abs_input() <= 1.0);
  // The first sample is cold in both runs.
  CHECK(cold.steps[0].iterations == warm.steps[0].iterations);

  std::ostringstream csv;
  write_closed_loop_csv(csv, warm);
  std::istringstream in(csv.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,iterations,mu_final,solve_time,u1,u2,u3,u4,tracking_rmse,max_abs_y");
  std::string line;
  Index rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 50);
}
