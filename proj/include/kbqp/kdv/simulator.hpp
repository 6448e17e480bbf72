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

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "kbqp/common/types.hpp"
#include "kbqp/koopman/model.hpp"

namespace kbqp {

/// Periodic grid on [-pi, pi) with integer wavenumbers in transform order
/// 0, 1, ..., n/2 - 1, -n/2, ..., -1.
struct KdvGrid {
  Index n_nodes = 0;
  double dx = 0.0;
  Vector x;
  Vector wavenumbers;

  static KdvGrid make(Index n_nodes = 100);
  double mass(const Vector& y) const { return dx * y.sum(); }
};

struct KdvState {
  Vector y;
  double t = 0.0;
};

/// Actuator profiles exp(-25 (x - m_i)^2), m = (-pi/2, -pi/6, pi/6, pi/2), one per column.
Matrix control_shapes(const KdvGrid& grid);

/// The four initial-condition building blocks, one per column.
Matrix initial_profiles(const KdvGrid& grid);

struct KdvOptions {
  double dt = 0.01;
  int n_sub = 1;
  bool nonlinear = true;
  // Blow-up guard: |y| beyond this is treated like a non-finite value.
  double blowup_threshold = 1e3;

  void validate() const;
};

class KdvBlowUp : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Strang split-step integrator for y_t + y y_x + y_xxx = V u. Dispersion is
/// applied exactly in Fourier space; the advection and forcing stage uses RK4
/// with a 2/3-rule mask on the nonlinear flux. Each instance owns its
/// transform buffers, so give every thread its own simulator.
class KdvSimulator {
 public:
  explicit KdvSimulator(KdvGrid grid, KdvOptions options = {});
  ~KdvSimulator();
  KdvSimulator(const KdvSimulator&) = delete;
  KdvSimulator& operator=(const KdvSimulator&) = delete;
  KdvSimulator(KdvSimulator&& other) noexcept;
  KdvSimulator& operator=(KdvSimulator&&) = delete;

  const KdvGrid& grid() const { return grid_; }
  const KdvOptions& options() const { return options_; }
  const Matrix& shapes() const { return shapes_; }

  /// One control interval dt with the input held constant. Throws KdvBlowUp.
  KdvState step(const KdvState& state, const Vector& u);
  void advance(Vector& y, const Vector& u);

  /// Exact solution of y_t + y_xxx = 0 after time t.
  Vector propagate_linear(const Vector& y, double t);

  /// Highest retained wavenumber of the nonlinear flux.
  Index dealias_cutoff() const { return cutoff_; }

 private:
  void linear_flow(Vector& y, double t);
  void rhs(const Vector& y, const Vector& forcing, Vector& out);
  void forward(const Vector& y);
  void backward(Vector& y);

  KdvGrid grid_;
  KdvOptions options_;
  Matrix shapes_;
  Index n_modes_ = 0;
  Index cutoff_ = 0;
  Vector k_;  // r2c wavenumbers 0..n/2, Nyquist set to 0
  double* real_ = nullptr;
  std::complex<double>* spec_ = nullptr;
  void* plan_forward_ = nullptr;
  void* plan_backward_ = nullptr;
  Vector k1_, k2_, k3_, k4_, stage_, forcing_, square_;
};

struct DatasetOptions {
  std::uint64_t seed = 1;
  Index n_traj = 1000;
  Index n_samples = 200;
  KdvOptions sim;
  // Inputs are uniform on [-input_amplitude, input_amplitude].
  double input_amplitude = 1.0;
  unsigned threads = 0;  // 0: hardware concurrency
  int max_attempts = 20;
};

struct DatasetReport {
  Index resampled = 0;
  std::vector<Index> attempts;  // per trajectory
};

/// Column j = traj * n_samples + k holds (y_k, u_k, y_{k+1}) of trajectory traj.
SnapshotDataset generate_dataset(const KdvGrid& grid, const DatasetOptions& options, DatasetReport* report = nullptr);

/// Version string of the FFT library.
std::string fft_backend_version();

/// Initial profile of one trajectory: sum c_i y_i^0 with c_i ~ U[0, 1], scaled
/// down to sup-norm 1 if needed.
Vector random_initial_profile(const Matrix& profiles, std::uint64_t seed);

}  // namespace kbqp
