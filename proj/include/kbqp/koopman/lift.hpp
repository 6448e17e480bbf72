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

enum class RbfKind { ThinPlate };

/// Dictionary of observables: the state itself followed by one radial basis
/// function per center, psi(x) = [x; phi_1(x); ...; phi_m(x)].
struct LiftSpec {
  Index n_x = 0;
  Matrix centers;  // n_x x n_rbf
  RbfKind kind = RbfKind::ThinPlate;
  std::uint64_t seed = 0;

  Index n_rbf() const { return centers.cols(); }
  Index lifted_dim() const { return n_x + n_rbf(); }
  void validate() const;

  /// Centers drawn uniformly from the box [lower, upper] (componentwise).
  static LiftSpec random_centers(const Vector& lower, const Vector& upper, Index n_rbf, std::uint64_t seed);
};

/// r^2 log r, continuously extended by 0 at r = 0.
double thin_plate(double r);

Vector lift(const LiftSpec& spec, const Vector& x);

/// Lifts every column of X. Distances are formed through a Gram product, so
/// results may differ from lift() in the last few bits.
Matrix lift_columns(const LiftSpec& spec, const Matrix& X);

}  // namespace kbqp
