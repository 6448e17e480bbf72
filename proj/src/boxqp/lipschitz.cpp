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

#include "kbqp/boxqp/lipschitz.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>

namespace kbqp {
namespace {

Vector random_unit(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v.normalized();
}

// Power iteration with `apply`; `residual_of` measures the eigen-residual for
// the Rayleigh estimate on the original matrix.
template <typename Apply, typename Residual>
double power_iterate(Index n, Apply apply, Residual residual_of, const EigenIterationOptions& options,
                     const char* what) {
  Vector v = random_unit(n, options.seed);
  for (int k = 0; k < options.max_iters; ++k) {
    Vector w = apply(v);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    double lambda = 0.0;
    const double residual = residual_of(v, lambda);
    if (residual <= options.rel_tol * std::abs(lambda)) return lambda;
  }
  throw std::runtime_error(std::string(what) + ": power iteration did not converge");
}

}  // namespace

double largest_eigenvalue(const Matrix& psd, const EigenIterationOptions& options) {
  require(psd.rows() == psd.cols(), "largest_eigenvalue: matrix must be square");
  if (psd.rows() == 0) return 0.0;
  auto apply = [&](const Vector& v) -> Vector { return psd * v; };
  auto residual = [&](const Vector& v, double& lambda) {
    const Vector mv = psd * v;
    lambda = v.dot(mv);
    return (mv - lambda * v).norm();
  };
  return power_iterate(psd.rows(), apply, residual, options, "largest_eigenvalue");
}

double smallest_eigenvalue(const Matrix& spd, const EigenIterationOptions& options) {
  require(spd.rows() == spd.cols(), "smallest_eigenvalue: matrix must be square");
  require(spd.rows() > 0, "smallest_eigenvalue: empty matrix");
  Eigen::LLT<Matrix> llt(spd);
  if (llt.info() != Eigen::Success) throw FactorizationError("smallest_eigenvalue: matrix is not positive definite");
  auto apply = [&](const Vector& v) -> Vector { return llt.solve(v); };
  auto residual = [&](const Vector& v, double& lambda) {
    const Vector mv = spd * v;
    lambda = v.dot(mv);
    return (mv - lambda * v).norm();
  };
  return power_iterate(spd.rows(), apply, residual, options, "smallest_eigenvalue");
}

double lipschitz_bound(const Matrix& E, const Matrix& F, double rho, const Matrix& H, double L_psi,
                       const EigenIterationOptions& options) {
  require(E.rows() == F.rows(), "lipschitz_bound: E and F must have the same row count");
  require(H.rows() == H.cols() && H.rows() == F.rows() + F.cols(), "lipschitz_bound: H has the wrong size");
  require(L_psi > 0.0, "lipschitz_bound: L_psi must be positive");
  require(rho > 0.0, "lipschitz_bound: rho must be positive");
  // E^T (F F^T + I) E = (F^T E)^T (F^T E) + E^T E
  const Matrix FtE = F.transpose() * E;
  Matrix gram = E.transpose() * E;
  gram.noalias() += FtE.transpose() * FtE;
  const double lambda_max = largest_eigenvalue(gram, options);
  const double lambda_min = smallest_eigenvalue(H, options);
  return rho * std::sqrt(lambda_max) * L_psi / lambda_min;
}

}  // namespace kbqp
