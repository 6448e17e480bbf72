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

#include "kbqp/kdv/simulator.hpp"

#include <fftw3.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

#include "kbqp/common/checksum.hpp"

namespace kbqp {
namespace {

constexpr double kPi = std::numbers::pi;

// The FFTW planner is not reentrant; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

KdvGrid KdvGrid::make(Index n_nodes) {
  require(n_nodes >= 4 && n_nodes % 2 == 0, "KdV grid needs an even node count of at least 4");
  KdvGrid g;
  g.n_nodes = n_nodes;
  g.dx = 2.0 * kPi / static_cast<double>(n_nodes);
  g.x.resize(n_nodes);
  g.wavenumbers.resize(n_nodes);
  for (Index j = 0; j < n_nodes; ++j) {
    g.x[j] = -kPi + static_cast<double>(j) * g.dx;
    g.wavenumbers[j] = static_cast<double>(j < n_nodes / 2 ? j : j - n_nodes);
  }
  return g;
}

Matrix control_shapes(const KdvGrid& grid) {
  const double centers[4] = {-kPi / 2, -kPi / 6, kPi / 6, kPi / 2};
  Matrix V(grid.n_nodes, 4);
  for (int i = 0; i < 4; ++i) V.col(i) = (-25.0 * (grid.x.array() - centers[i]).square()).exp().matrix();
  return V;
}

Matrix initial_profiles(const KdvGrid& grid) {
  const auto x = grid.x.array();
  Matrix P(grid.n_nodes, 4);
  P.col(0) = (-(x - kPi / 2).square()).exp().matrix();
  P.col(1) = (-(x / 2).sin().square()).matrix();
  P.col(2) = (-(x + kPi / 2).square()).exp().matrix();
  P.col(3) = (x / 2).cos().square().matrix();
  return P;
}

void KdvOptions::validate() const {
  require(std::isfinite(dt) && dt > 0.0, "KdV: dt must be positive");
  require(n_sub >= 1, "KdV: n_sub must be at least 1");
  require(blowup_threshold > 0.0, "KdV: blow-up threshold must be positive");
}

KdvSimulator::KdvSimulator(KdvGrid grid, KdvOptions options)
    : grid_(std::move(grid)), options_(options), shapes_(control_shapes(grid_)) {
  options_.validate();
  const Index n = grid_.n_nodes;
  require(n >= 4 && n % 2 == 0 && grid_.x.size() == n, "KdV simulator: invalid grid");
  n_modes_ = n / 2 + 1;
  // 2/3 rule: a quadratic product of modes |k| <= n/3 does not alias back below n/3.
  cutoff_ = (n - 1) / 3;
  k_.resize(n_modes_);
  for (Index j = 0; j < n_modes_; ++j) k_[j] = static_cast<double>(j);
  k_[n / 2] = 0.0;

  real_ = fftw_alloc_real(static_cast<std::size_t>(n));
  spec_ = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(static_cast<std::size_t>(n_modes_)));
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_, reinterpret_cast<fftw_complex*>(spec_),
                                         FFTW_ESTIMATE);
    plan_backward_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(spec_), real_,
                                          FFTW_ESTIMATE);
  }
  if (!plan_forward_ || !plan_backward_) throw std::runtime_error("KdV simulator: FFT planning failed");
}

KdvSimulator::KdvSimulator(KdvSimulator&& other) noexcept
    : grid_(std::move(other.grid_)), options_(other.options_), shapes_(std::move(other.shapes_)),
      n_modes_(other.n_modes_), cutoff_(other.cutoff_), k_(std::move(other.k_)), real_(other.real_),
      spec_(other.spec_), plan_forward_(other.plan_forward_), plan_backward_(other.plan_backward_) {
  other.real_ = nullptr;
  other.spec_ = nullptr;
  other.plan_forward_ = nullptr;
  other.plan_backward_ = nullptr;
}

KdvSimulator::~KdvSimulator() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plan_forward_) fftw_destroy_plan(static_cast<fftw_plan>(plan_forward_));
  if (plan_backward_) fftw_destroy_plan(static_cast<fftw_plan>(plan_backward_));
  if (real_) fftw_free(real_);
  if (spec_) fftw_free(spec_);
}

void KdvSimulator::forward(const Vector& y) {
  std::copy(y.data(), y.data() + grid_.n_nodes, real_);
  fftw_execute(static_cast<fftw_plan>(plan_forward_));
}

void KdvSimulator::backward(Vector& y) {
  fftw_execute(static_cast<fftw_plan>(plan_backward_));
  const double scale = 1.0 / static_cast<double>(grid_.n_nodes);
  y.resize(grid_.n_nodes);
  for (Index j = 0; j < grid_.n_nodes; ++j) y[j] = real_[j] * scale;
}

void KdvSimulator::linear_flow(Vector& y, double t) {
  forward(y);
  for (Index j = 0; j < n_modes_; ++j) {
    const double k = k_[j];
    spec_[j] *= std::polar(1.0, k * k * k * t);
  }
  backward(y);
}

Vector KdvSimulator::propagate_linear(const Vector& y, double t) {
  require(y.size() == grid_.n_nodes, "KdV: profile has the wrong length");
  Vector out = y;
  linear_flow(out, t);
  return out;
}

void KdvSimulator::rhs(const Vector& y, const Vector& forcing, Vector& out) {
  if (!options_.nonlinear) {
    out = forcing;
    return;
  }
  // -(1/2) d/dx (y^2), spectrally, with the flux masked beyond the cutoff.
  square_ = y.array().square().matrix();
  forward(square_);
  const std::complex<double> i_unit(0.0, 1.0);
  for (Index j = 0; j < n_modes_; ++j) {
    spec_[j] = j <= cutoff_ ? -0.5 * i_unit * k_[j] * spec_[j] : std::complex<double>(0.0, 0.0);
  }
  backward(out);
  out += forcing;
}

void KdvSimulator::advance(Vector& y, const Vector& u) {
  require(y.size() == grid_.n_nodes, "KdV: profile has the wrong length");
  require(u.size() == shapes_.cols(), "KdV: expected one input per actuator");
  require(u.allFinite(), "KdV: non-finite input");
  forcing_.noalias() = shapes_ * u;
  const double h = options_.dt / static_cast<double>(options_.n_sub);
  for (int s = 0; s < options_.n_sub; ++s) {
    linear_flow(y, 0.5 * h);
    rhs(y, forcing_, k1_);
    stage_ = y + (0.5 * h) * k1_;
    rhs(stage_, forcing_, k2_);
    stage_ = y + (0.5 * h) * k2_;
    rhs(stage_, forcing_, k3_);
    stage_ = y + h * k3_;
    rhs(stage_, forcing_, k4_);
    y += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    linear_flow(y, 0.5 * h);
  }
  if (!y.allFinite() || y.cwiseAbs().maxCoeff() > options_.blowup_threshold) {
    throw KdvBlowUp("KdV profile blew up (non-finite or above the threshold)");
  }
}

KdvState KdvSimulator::step(const KdvState& state, const Vector& u) {
  KdvState next{state.y, state.t + options_.dt};
  advance(next.y, u);
  return next;
}

std::string fft_backend_version() { return fftw_version; }

Vector random_initial_profile(const Matrix& profiles, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector c(profiles.cols());
  for (Index i = 0; i < c.size(); ++i) c[i] = unit(rng);
  Vector y = profiles * c;
  const double peak = y.cwiseAbs().maxCoeff();
  if (peak > 1.0) y /= peak;
  return y;
}

SnapshotDataset generate_dataset(const KdvGrid& grid, const DatasetOptions& options, DatasetReport* report) {
  require(options.n_traj >= 1 && options.n_samples >= 1, "dataset: need at least one trajectory and one sample");
  require(options.input_amplitude >= 0.0 && options.input_amplitude <= 1.0, "dataset: input amplitude must lie in [0, 1]");
  require(options.max_attempts >= 1, "dataset: max_attempts must be positive");
  options.sim.validate();
  const Index n = grid.n_nodes;
  const Index total = options.n_traj * options.n_samples;
  SnapshotDataset data;
  data.X.resize(n, total);
  data.U.resize(4, total);
  data.Xp.resize(n, total);
  const Matrix profiles = initial_profiles(grid);

  std::vector<Index> attempts(static_cast<std::size_t>(options.n_traj), 0);
  std::atomic<Index> next{0};
  std::mutex error_mutex;
  std::string error;

  auto worker = [&]() {
    KdvSimulator sim(grid, options.sim);
    Vector y, u(4);
    for (Index traj = next++; traj < options.n_traj; traj = next++) {
      bool ok = false;
      for (int attempt = 0; attempt < options.max_attempts && !ok; ++attempt) {
        attempts[static_cast<std::size_t>(traj)] = attempt + 1;
        const std::uint64_t stream = (static_cast<std::uint64_t>(attempt) << 32) | static_cast<std::uint64_t>(traj);
        const std::uint64_t seed = derive_seed(options.seed, stream);
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> input(-options.input_amplitude, options.input_amplitude);
        y = random_initial_profile(profiles, rng());
        try {
          for (Index k = 0; k < options.n_samples; ++k) {
            for (Index i = 0; i < 4; ++i) u[i] = options.input_amplitude > 0.0 ? input(rng) : 0.0;
            const Index col = traj * options.n_samples + k;
            data.X.col(col) = y;
            data.U.col(col) = u;
            sim.advance(y, u);
            data.Xp.col(col) = y;
          }
          ok = true;
        } catch (const KdvBlowUp&) {
          ok = false;
        }
      }
      if (!ok) {
        std::lock_guard<std::mutex> lock(error_mutex);
        error = "dataset: trajectory " + std::to_string(traj) + " kept blowing up";
      }
    }
  };

  unsigned threads = options.threads != 0 ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<Index>(threads, options.n_traj));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (!error.empty()) throw KdvBlowUp(error);
  if (report) {
    report->attempts = attempts;
    report->resampled = 0;
    for (Index a : attempts) report->resampled += a - 1;
  }
  return data;
}

}  // namespace kbqp
