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

#include "kbqp/boxqp/problem.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace kbqp {
namespace {

constexpr double kAsymmetryTolerance = 1e-9;

void symmetrize_checked(Matrix& m, const char* what) {
  require(m.rows() == m.cols(), std::string(what) + " must be square");
  require(m.allFinite(), std::string(what) + " has non-finite entries");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  require(asym <= kAsymmetryTolerance * scale, std::string(what) + " is not symmetric");
  Matrix sym = 0.5 * (m + m.transpose());
  m = std::move(sym);
}

// Reads only the lower triangle and writes only the strict upper one.
void fill_upper_from_lower(Matrix& m) {
  for (Index c = 1; c < m.cols(); ++c)
    for (Index r = 0; r < c; ++r) m(r, c) = m(c, r);
}

}  // namespace

StructuredHessian::StructuredHessian(double rho, Matrix F, Matrix M11, Vector wx_diag)
    : rho_(rho), F_(std::move(F)), M11_(std::move(M11)), wx_(std::move(wx_diag)) {
  validate_and_cache();
  // H11 - rho^2 F^T D(1/(rho + wx)) F = M11 + rho F^T D(wx / (rho + wx)) F, which
  // avoids cancelling two O(rho) terms.
  const Vector weight = (wx_.array() / (rho_ + wx_.array())).sqrt();
  const Matrix G = weight.asDiagonal() * F_;
  bare_schur_ = M11_;
  bare_schur_.selfadjointView<Eigen::Lower>().rankUpdate(G.transpose(), rho_);
  fill_upper_from_lower(bare_schur_);
}

StructuredHessian::StructuredHessian(double rho, Matrix F, Matrix M11, Vector wx_diag, Matrix bare_schur)
    : rho_(rho), F_(std::move(F)), M11_(std::move(M11)), wx_(std::move(wx_diag)), bare_schur_(std::move(bare_schur)) {
  validate_and_cache();
  require(bare_schur_.rows() == n1() && bare_schur_.cols() == n1(), "bare Schur complement must be n1 x n1");
  symmetrize_checked(bare_schur_, "bare Schur complement");
}

void StructuredHessian::validate_and_cache() {
  require(std::isfinite(rho_) && rho_ > 0.0, "structured Hessian: rho must be positive");
  require(M11_.rows() == F_.cols() && M11_.cols() == F_.cols(), "structured Hessian: M11 must be n1 x n1");
  require(wx_.size() == F_.rows(), "structured Hessian: wx_diag must have n2 entries");
  require(F_.allFinite(), "structured Hessian: F has non-finite entries");
  require(wx_.allFinite() && (wx_.size() == 0 || wx_.minCoeff() > 0.0),
          "structured Hessian: wx_diag must be strictly positive");
  symmetrize_checked(M11_, "M11");
  H11_ = M11_;
  H11_.selfadjointView<Eigen::Lower>().rankUpdate(F_.transpose(), rho_);
  fill_upper_from_lower(H11_);
}

Matrix StructuredHessian::materialize() const {
  const Index a = n1();
  const Index b = n2();
  Matrix H(a + b, a + b);
  H.topLeftCorner(a, a) = H11_;
  H.topRightCorner(a, b) = -rho_ * F_.transpose();
  H.bottomLeftCorner(b, a) = -rho_ * F_;
  H.bottomRightCorner(b, b).setZero();
  H.bottomRightCorner(b, b).diagonal() = wx_.array() + rho_;
  return H;
}

Vector StructuredHessian::multiply(const Vector& z) const {
  const Index a = n1();
  const Index b = n2();
  const auto z1 = z.head(a);
  const auto z2 = z.tail(b);
  const Vector mismatch = F_ * z1 - z2;
  Vector out(a + b);
  out.head(a) = M11_ * z1 + rho_ * (F_.transpose() * mismatch);
  out.tail(b) = wx_.cwiseProduct(z2) - rho_ * mismatch;
  return out;
}

BoxQpProblem::BoxQpProblem(std::shared_ptr<const HessianData> hessian, Vector h)
    : hessian_(std::move(hessian)), h_(std::move(h)) {}

BoxQpProblem BoxQpProblem::from_dense(Matrix H, Vector h) {
  symmetrize_checked(H, "Hessian");
  require(H.rows() == h.size(), "Hessian and linear term sizes differ");
  require(h.allFinite(), "linear term has non-finite entries");
  Eigen::LLT<Matrix> llt(H);
  require(llt.info() == Eigen::Success, "Hessian is not positive definite");
  auto data = std::make_shared<HessianData>();
  data->dense = std::move(H);
  return BoxQpProblem(std::move(data), std::move(h));
}

BoxQpProblem BoxQpProblem::from_structured(StructuredHessian sh, Vector h, bool materialize_dense) {
  require(sh.size() == h.size(), "structured Hessian and linear term sizes differ");
  require(h.allFinite(), "linear term has non-finite entries");
  // H is positive definite iff its diagonal H22 block and the Schur complement are.
  Eigen::LLT<Matrix> llt(sh.bare_schur());
  require(llt.info() == Eigen::Success, "structured Hessian is not positive definite");
  auto data = std::make_shared<HessianData>();
  if (materialize_dense) data->dense = sh.materialize();
  data->structured = std::move(sh);
  return BoxQpProblem(std::move(data), std::move(h));
}

BoxQpProblem BoxQpProblem::with_linear(Vector h) const {
  require(h.size() == size(), "linear term size mismatch");
  require(h.allFinite(), "linear term has non-finite entries");
  return BoxQpProblem(hessian_, std::move(h));
}

const Matrix& BoxQpProblem::dense_hessian() const {
  if (!hessian_->dense) throw std::logic_error("problem has no dense Hessian");
  return *hessian_->dense;
}

const StructuredHessian& BoxQpProblem::structured_hessian() const {
  if (!hessian_->structured) throw std::logic_error("problem has no structured Hessian");
  return *hessian_->structured;
}

Vector BoxQpProblem::hessian_times(const Vector& z) const {
  if (hessian_->structured) return hessian_->structured->multiply(z);
  return hessian_->dense->selfadjointView<Eigen::Lower>() * z;
}

double BoxQpProblem::objective(const Vector& z) const { return 0.5 * z.dot(hessian_times(z)) + z.dot(h_); }

Matrix BoxQpProblem::materialize_hessian() const {
  if (hessian_->dense) return *hessian_->dense;
  return hessian_->structured->materialize();
}

}  // namespace kbqp
