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

#include "kbqp/boxqp/newton.hpp"

namespace kbqp {
namespace {

Vector floored(const Vector& v, int& activations) {
  Vector out = v;
  for (Index i = 0; i < out.size(); ++i) {
    if (out[i] < kSlackFloor) {
      out[i] = kSlackFloor;
      ++activations;
    }
  }
  return out;
}

bool empty_or_zero(const Vector& v) { return v.size() == 0; }

}  // namespace

NewtonReduction::NewtonReduction(const IpmIterate& it)
    : gamma_(it.gamma), theta_(it.theta) {
  phi_ = floored(it.phi, floor_activations_);
  psi_ = floored(it.psi, floor_activations_);
  barrier_ = gamma_.cwiseQuotient(phi_) + theta_.cwiseQuotient(psi_);
}

Vector NewtonReduction::reduced_rhs(const NewtonRhs& rhs) const {
  Vector r1 = rhs.r1;
  Vector r2 = rhs.r2;
  if (!empty_or_zero(rhs.upper)) r1 -= gamma_.cwiseProduct(rhs.upper);
  if (!empty_or_zero(rhs.lower)) r2 += theta_.cwiseProduct(rhs.lower);
  Vector out = r2.cwiseQuotient(psi_) - r1.cwiseQuotient(phi_);
  if (!empty_or_zero(rhs.stationarity)) out += rhs.stationarity;
  return out;
}

StepDirection NewtonReduction::recover(const Vector& dz, const NewtonRhs& rhs) const {
  Vector r1 = rhs.r1;
  Vector r2 = rhs.r2;
  StepDirection d;
  d.dz = dz;
  d.dphi = -dz;
  d.dpsi = dz;
  if (!empty_or_zero(rhs.upper)) {
    r1 -= gamma_.cwiseProduct(rhs.upper);
    d.dphi += rhs.upper;
  }
  if (!empty_or_zero(rhs.lower)) {
    r2 += theta_.cwiseProduct(rhs.lower);
    d.dpsi -= rhs.lower;
  }
  d.dgamma = (gamma_.cwiseProduct(dz) + r1).cwiseQuotient(phi_);
  d.dtheta = (r2 - theta_.cwiseProduct(dz)).cwiseQuotient(psi_);
  return d;
}

DenseNewtonSolver::DenseNewtonSolver(BoxQpProblem problem) : problem_(std::move(problem)) {
  require(problem_.has_dense(), "dense Newton solver needs a dense Hessian");
}

void DenseNewtonSolver::factorize(const Vector& barrier_diag) {
  Matrix Hbar = problem_.dense_hessian();
  Hbar.diagonal() += barrier_diag;
  llt_.compute(Hbar);
  if (llt_.info() != Eigen::Success) {
    Hbar.diagonal().array() += kFactorizationLift;
    ++regularizations_;
    llt_.compute(Hbar);
    if (llt_.info() != Eigen::Success) throw FactorizationError("reduced Newton matrix is not positive definite");
  }
}

Vector DenseNewtonSolver::solve(const Vector& rhs) const { return llt_.solve(rhs); }

StructuredNewtonSolver::StructuredNewtonSolver(BoxQpProblem problem) : problem_(std::move(problem)) {
  require(problem_.has_structured(), "structured Newton solver needs a structured Hessian");
}

void StructuredNewtonSolver::factorize(const Vector& barrier_diag) {
  const StructuredHessian& sh = problem_.structured_hessian();
  const Index n1 = sh.n1();
  const Index n2 = sh.n2();
  const double rho = sh.rho();
  const auto b1 = barrier_diag.head(n1);
  const auto b2 = barrier_diag.tail(n2);
  const Vector bare22 = sh.wx_diag().array() + rho;
  h22_ = bare22 + b2;

  // H11bar - rho^2 F^T H22bar^{-1} F
  //   = S0 + D(b1) + rho^2 F^T D(1/P - 1/(P + b2)) F,   P = rho + wx,
  // where S0 is the barrier-free Schur complement. Both added terms are PSD.
  const Vector w = (b2.array() / (bare22.array() * h22_.array())).sqrt();
  weighted_F_.noalias() = w.asDiagonal() * sh.F();
  schur_ = sh.bare_schur();
  schur_.diagonal() += b1;
  schur_.selfadjointView<Eigen::Lower>().rankUpdate(weighted_F_.transpose(), rho * rho);
  llt_.compute(schur_.selfadjointView<Eigen::Lower>());
  if (llt_.info() != Eigen::Success) {
    schur_.diagonal().array() += kFactorizationLift;
    ++regularizations_;
    llt_.compute(schur_.selfadjointView<Eigen::Lower>());
    if (llt_.info() != Eigen::Success) throw FactorizationError("Schur complement is not positive definite");
  }
}

Vector StructuredNewtonSolver::solve(const Vector& rhs) const {
  const StructuredHessian& sh = problem_.structured_hessian();
  const Index n1 = sh.n1();
  const Index n2 = sh.n2();
  const double rho = sh.rho();
  const auto rhs1 = rhs.head(n1);
  const auto rhs2 = rhs.tail(n2);
  Vector out(n1 + n2);
  const Vector scaled2 = rhs2.cwiseQuotient(h22_);
  out.head(n1) = llt_.solve(rhs1 + rho * (sh.F().transpose() * scaled2));
  out.tail(n2) = (rhs2 + rho * (sh.F() * out.head(n1))).cwiseQuotient(h22_);
  return out;
}

std::unique_ptr<NewtonSolver> make_newton_solver(const BoxQpProblem& problem, Backend backend) {
  switch (backend) {
    case Backend::Dense:
      if (!problem.has_dense()) throw InvalidInput("dense backend requested but the problem has no dense Hessian");
      return std::make_unique<DenseNewtonSolver>(problem);
    case Backend::Structured:
      if (!problem.has_structured())
        throw InvalidInput("structured backend requested but the problem has no structured Hessian");
      return std::make_unique<StructuredNewtonSolver>(problem);
    case Backend::Auto:
      if (problem.has_structured()) return std::make_unique<StructuredNewtonSolver>(problem);
      return std::make_unique<DenseNewtonSolver>(problem);
  }
  throw std::logic_error("unknown backend");
}

Vector solve_reduced_dense(const Matrix& H, const Vector& barrier_diag, const Vector& rhs) {
  require(H.rows() == H.cols() && H.rows() == barrier_diag.size() && H.rows() == rhs.size(),
          "solve_reduced_dense: dimension mismatch");
  Matrix Hbar = H;
  Hbar.diagonal() += barrier_diag;
  Eigen::LLT<Matrix> llt(Hbar);
  if (llt.info() != Eigen::Success) throw FactorizationError("reduced Newton matrix is not positive definite");
  return llt.solve(rhs);
}

Vector solve_reduced_structured(const StructuredHessian& sh, const Vector& extra_diag_11,
                                const Vector& barrier_diag_22, const Vector& rhs) {
  require(extra_diag_11.size() == sh.n1() && barrier_diag_22.size() == sh.n2() && rhs.size() == sh.size(),
          "solve_reduced_structured: dimension mismatch");
  StructuredNewtonSolver solver(BoxQpProblem::from_structured(sh, Vector::Zero(sh.size())));
  Vector barrier(sh.size());
  barrier << extra_diag_11, barrier_diag_22;
  solver.factorize(barrier);
  return solver.solve(rhs);
}

}  // namespace kbqp
