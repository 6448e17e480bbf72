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

#include <memory>
#include <optional>

#include "kbqp/common/types.hpp"

namespace kbqp {

/**
 * 2x2 block Hessian of the form
 *
 *   H = rho * [ F^T F   -F^T ]  +  [ M11        ]
 *             [ -F       I   ]     [      D(wx) ]
 *
 * with F of size n2 x n1, M11 symmetric n1 x n1 and wx strictly positive.
 * The lower-right block is diagonal, which is what lets the Newton system be
 * reduced to an n1 x n1 Schur complement.
 */
class StructuredHessian {
 public:
  StructuredHessian(double rho, Matrix F, Matrix M11, Vector wx_diag);

  /// As above, but with the bare Schur complement H11 - rho^2 F^T D(1/(rho+wx)) F
  /// supplied by a caller that can form it without cancellation.
  StructuredHessian(double rho, Matrix F, Matrix M11, Vector wx_diag, Matrix bare_schur);

  double rho() const { return rho_; }
  const Matrix& F() const { return F_; }
  const Matrix& M11() const { return M11_; }
  const Vector& wx_diag() const { return wx_; }
  Index n1() const { return F_.cols(); }
  Index n2() const { return F_.rows(); }
  Index size() const { return n1() + n2(); }

  /// rho F^T F + M11.
  const Matrix& H11() const { return H11_; }
  const Matrix& bare_schur() const { return bare_schur_; }

  Matrix materialize() const;
  Vector multiply(const Vector& z) const;

 private:
  void validate_and_cache();

  double rho_;
  Matrix F_;
  Matrix M11_;
  Vector wx_;
  Matrix H11_;
  Matrix bare_schur_;
};

/// Strongly convex quadratic objective 1/2 z^T H z + z^T h over the box [-1, 1]^n.
///
/// The Hessian is immutable and shared between problems produced by
/// with_linear(), so per-sample MPC problems only carry a new h.
class BoxQpProblem {
 public:
  /// Symmetrizes H as (H + H^T)/2; rejects relative asymmetry above 1e-9 and
  /// matrices whose Cholesky factorization fails.
  static BoxQpProblem from_dense(Matrix H, Vector h);

  /// Positive-definiteness is checked through the bare Schur complement.
  /// With `materialize_dense`, the dense form is also stored.
  static BoxQpProblem from_structured(StructuredHessian sh, Vector h, bool materialize_dense = false);

  BoxQpProblem with_linear(Vector h) const;

  Index size() const { return h_.size(); }
  const Vector& linear() const { return h_; }

  bool has_dense() const { return hessian_->dense.has_value(); }
  bool has_structured() const { return hessian_->structured.has_value(); }
  const Matrix& dense_hessian() const;
  const StructuredHessian& structured_hessian() const;

  bool shares_hessian_with(const BoxQpProblem& other) const { return hessian_ == other.hessian_; }

  Vector hessian_times(const Vector& z) const;
  double objective(const Vector& z) const;
  Matrix materialize_hessian() const;

 private:
  struct HessianData {
    std::optional<Matrix> dense;
    std::optional<StructuredHessian> structured;
  };

  BoxQpProblem(std::shared_ptr<const HessianData> hessian, Vector h);

  std::shared_ptr<const HessianData> hessian_;
  Vector h_;
};

}  // namespace kbqp
