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

#include "kbqp/common/types.hpp"

namespace kbqp {

struct EigenIterationOptions {
  double rel_tol = 1e-8;
  int max_iters = 200000;
  std::uint64_t seed = 0x5eedULL;
};

/// Power iteration on a symmetric positive-semidefinite matrix. Stops when the
/// eigen-residual |M v - lambda v| falls below rel_tol * lambda, which bounds
/// the eigenvalue error by the same amount. Throws std::runtime_error when
/// max_iters is exhausted.
double largest_eigenvalue(const Matrix& psd, const EigenIterationOptions& options = {});

/// Inverse power iteration through a Cholesky factorization of `spd`.
double smallest_eigenvalue(const Matrix& spd, const EigenIterationOptions& options = {});

/// Lipschitz constant of the BoxQP feedback policy x -> u0(x):
///   rho * sqrt(lambda_max(E^T (F F^T + I) E)) * L_psi / lambda_min(H).
double lipschitz_bound(const Matrix& E, const Matrix& F, double rho, const Matrix& H, double L_psi,
                       const EigenIterationOptions& options = {});

}  // namespace kbqp
