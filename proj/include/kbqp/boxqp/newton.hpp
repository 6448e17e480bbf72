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

#include <Eigen/Cholesky>

#include "kbqp/boxqp/iterate.hpp"

namespace kbqp {

/// Slacks below this value are floored before division in the reduction.
inline constexpr double kSlackFloor = 1e-14;

/// Diagonal lift added once when a reduced-system factorization fails.
inline constexpr double kFactorizationLift = 1e-10;

/// Right-hand side of the 5n x 5n Newton system J^k d = r. The three equality
/// blocks may be left empty, meaning zero (the feasible method).
struct NewtonRhs {
  Vector stationarity;
  Vector upper;
  Vector lower;
  Vector r1;  // gamma .* phi row
  Vector r2;  // theta .* psi row
};

/// Eliminates the multiplier and slack directions from the Newton system.
///
/// With dphi = r_upper - dz, dpsi = dz - r_lower and
///   dgamma = (gamma/phi) dz + (r1 - gamma r_upper)/phi,
///   dtheta = -(theta/psi) dz + (r2 + theta r_lower)/psi,
/// the first block row becomes
///   (H + D(gamma/phi + theta/psi)) dz = r_stat - r1'/phi + r2'/psi.
class NewtonReduction {
 public:
  explicit NewtonReduction(const IpmIterate& it);

  const Vector& barrier_diag() const { return barrier_; }
  int floor_activations() const { return floor_activations_; }

  Vector reduced_rhs(const NewtonRhs& rhs) const;
  StepDirection recover(const Vector& dz, const NewtonRhs& rhs) const;

 private:
  Vector gamma_;
  Vector theta_;
  Vector phi_;
  Vector psi_;
  Vector barrier_;
  int floor_activations_ = 0;
};

/// Factorizes H + D(barrier) once and solves for several right-hand sides.
class NewtonSolver {
 public:
  virtual ~NewtonSolver() = default;

  virtual void factorize(const Vector& barrier_diag) = 0;
  virtual Vector solve(const Vector& rhs) const = 0;
  /// Order of the matrix handed to the Cholesky factorization.
  virtual Index factorization_dimension() const = 0;

  int regularizations() const { return regularizations_; }

 protected:
  int regularizations_ = 0;
};

class DenseNewtonSolver final : public NewtonSolver {
 public:
  explicit DenseNewtonSolver(BoxQpProblem problem);

  void factorize(const Vector& barrier_diag) override;
  Vector solve(const Vector& rhs) const override;
  Index factorization_dimension() const override { return problem_.size(); }

 private:
  BoxQpProblem problem_;
  Eigen::LLT<Matrix> llt_;
};

/// Schur-complement solver for StructuredHessian problems. Only an n1 x n1
/// matrix is factorized; the n2 block is diagonal and inverted directly.
class StructuredNewtonSolver final : public NewtonSolver {
 public:
  explicit StructuredNewtonSolver(BoxQpProblem problem);

  void factorize(const Vector& barrier_diag) override;
  Vector solve(const Vector& rhs) const override;
  Index factorization_dimension() const override { return problem_.structured_hessian().n1(); }

 private:
  BoxQpProblem problem_;
  Vector h22_;
  Matrix schur_;
  Matrix weighted_F_;
  Eigen::LLT<Matrix> llt_;
};

enum class Backend { Dense, Structured, Auto };

/// Auto picks the structured solver whenever the problem carries one.
std::unique_ptr<NewtonSolver> make_newton_solver(const BoxQpProblem& problem, Backend backend);

/// Solves (H + D(barrier_diag)) dz = rhs with a dense Cholesky factorization.
Vector solve_reduced_dense(const Matrix& H, const Vector& barrier_diag, const Vector& rhs);

/// Solves the same system for a structured Hessian; `extra_diag_11` and
/// `barrier_diag_22` are the two halves of the barrier diagonal.
Vector solve_reduced_structured(const StructuredHessian& sh, const Vector& extra_diag_11,
                                const Vector& barrier_diag_22, const Vector& rhs);

}  // namespace kbqp
