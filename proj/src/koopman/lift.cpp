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

#include "kbqp/koopman/lift.hpp"

#include <cmath>
#include <random>

namespace kbqp {

void LiftSpec::validate() const {
  require(n_x > 0, "lift: state dimension must be positive");
  require(centers.rows() == n_x || centers.cols() == 0, "lift: centers must have n_x rows");
  require(centers.allFinite(), "lift: centers must be finite");
}

LiftSpec LiftSpec::random_centers(const Vector& lower, const Vector& upper, Index n_rbf, std::uint64_t seed) {
  require(lower.size() == upper.size() && lower.size() > 0, "lift: bounding box dimension mismatch");
  require((lower.array() <= upper.array()).all(), "lift: empty bounding box");
  require(n_rbf >= 0, "lift: negative RBF count");
  LiftSpec spec;
  spec.n_x = lower.size();
  spec.seed = seed;
  spec.centers.resize(spec.n_x, n_rbf);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Index j = 0; j < n_rbf; ++j)
    for (Index i = 0; i < spec.n_x; ++i) spec.centers(i, j) = lower[i] + (upper[i] - lower[i]) * unit(rng);
  return spec;
}

double thin_plate(double r) { return r == 0.0 ? 0.0 : r * r * std::log(r); }

namespace {

// r^2 log r written in terms of r^2.
inline double thin_plate_sq(double r2) { return r2 <= 0.0 ? 0.0 : 0.5 * r2 * std::log(r2); }

}  // namespace

Vector lift(const LiftSpec& spec, const Vector& x) {
  require(x.size() == spec.n_x, "lift: state has the wrong dimension");
  Vector out(spec.lifted_dim());
  out.head(spec.n_x) = x;
  for (Index j = 0; j < spec.n_rbf(); ++j) out[spec.n_x + j] = thin_plate_sq((x - spec.centers.col(j)).squaredNorm());
  return out;
}

Matrix lift_columns(const LiftSpec& spec, const Matrix& X) {
  require(X.rows() == spec.n_x, "lift: states have the wrong dimension");
  const Index m = spec.n_rbf();
  Matrix out(spec.lifted_dim(), X.cols());
  out.topRows(spec.n_x) = X;
  if (m == 0 || X.cols() == 0) return out;
  const Vector center_sq = spec.centers.colwise().squaredNorm().transpose();
  const Eigen::RowVectorXd x_sq = X.colwise().squaredNorm();
  auto rbf = out.bottomRows(m);
  rbf.noalias() = -2.0 * spec.centers.transpose() * X;
  for (Index c = 0; c < X.cols(); ++c)
    for (Index j = 0; j < m; ++j) rbf(j, c) = thin_plate_sq(rbf(j, c) + center_sq[j] + x_sq[c]);
  return out;
}

}  // namespace kbqp
