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

#include "kbqp/qp_adapter/adapter.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <optional>

namespace kbqp {

void GeneralQp::validate() const {
  const Index n = Q.rows();
  require(Q.cols() == n && q.size() == n, "general QP: Q must be n_x x n_x and q of length n_x");
  require(A.cols() == n || A.rows() == 0, "general QP: A must have n_x columns");
  require(y_min.size() == A.rows() && y_max.size() == A.rows(), "general QP: y bounds must have n_y entries");
  require(x_min.size() == n && x_max.size() == n, "general QP: x bounds must have n_x entries");
  require(Q.allFinite() && q.allFinite() && A.allFinite(), "general QP: non-finite data");
  require(x_min.allFinite() && x_max.allFinite() && y_min.allFinite() && y_max.allFinite(),
          "general QP: bounds must be finite");
  require((x_min.array() <= x_max.array()).all(), "general QP: x_min exceeds x_max");
  require((y_min.array() <= y_max.array()).all(), "general QP: y_min exceeds y_max");
  require((Q - Q.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, Q.cwiseAbs().maxCoeff()),
          "general QP: Q is not symmetric");
}

double GeneralQp::objective(const Vector& x) const { return 0.5 * x.dot(Q * x) + q.dot(x); }

Vector GeneralQp::violation(const Vector& x) const {
  const Vector ax = A * x;
  return (ax - y_max).cwiseMax(y_min - ax).cwiseMax(0.0);
}

double soft_objective(const GeneralQp& qp, double rho, const Vector& x, const Vector& y) {
  return qp.objective(x) + 0.5 * rho * (qp.A * x - y).squaredNorm();
}

namespace {

Matrix select_cols(const Matrix& m, const std::vector<Index>& idx) {
  Matrix out(m.rows(), static_cast<Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Index>(j)) = m.col(idx[j]);
  return out;
}

Matrix select_rows(const Matrix& m, const std::vector<Index>& idx) {
  Matrix out(static_cast<Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Index>(i)) = m.row(idx[i]);
  return out;
}

Vector select(const Vector& v, const std::vector<Index>& idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Index>(i)] = v[idx[i]];
  return out;
}

// Everything in SoftBoxQp except the problem itself.
struct SoftMap {
  Index n_x = 0;
  Index n_y = 0;
  std::vector<Index> free_x;
  std::vector<Index> free_y;
  Vector x_fixed, y_fixed, cx, dx, cy, dy;
  bool regularized = false;
};

bool is_positive_definite(const Matrix& m) {
  if (m.rows() == 0) return true;
  Eigen::LLT<Matrix> llt(m);
  return llt.info() == Eigen::Success;
}

}  // namespace

Vector SoftBoxQp::to_box(const Vector& x, const Vector& y) const {
  Vector z(box_size());
  const Index nf = static_cast<Index>(free_x.size());
  for (Index i = 0; i < nf; ++i) z[i] = (x[free_x[static_cast<std::size_t>(i)]] - cx[i]) / dx[i];
  for (Index i = 0; i < static_cast<Index>(free_y.size()); ++i)
    z[nf + i] = (y[free_y[static_cast<std::size_t>(i)]] - cy[i]) / dy[i];
  return z;
}

SoftBoxQp soften(const GeneralQp& qp, const SoftenOptions& options) {
  qp.validate();
  require(std::isfinite(options.rho) && options.rho > 0.0, "soften: rho must be positive");
  const double rho = options.rho;

  SoftMap soft;
  soft.n_x = qp.n_x();
  soft.n_y = qp.n_y();
  soft.x_fixed = Vector::Zero(qp.n_x());
  soft.y_fixed = Vector::Zero(qp.n_y());
  for (Index i = 0; i < qp.n_x(); ++i) {
    if (qp.x_min[i] == qp.x_max[i]) {
      soft.x_fixed[i] = qp.x_min[i];
    } else {
      soft.free_x.push_back(i);
    }
  }
  for (Index i = 0; i < qp.n_y(); ++i) {
    if (qp.y_min[i] == qp.y_max[i]) {
      soft.y_fixed[i] = qp.y_min[i];
    } else {
      soft.free_y.push_back(i);
    }
  }
  require(!soft.free_x.empty() || !soft.free_y.empty(), "soften: every coordinate is fixed");

  // Fixed x coordinates: x = P xf + xfix with xfix zero on the free set.
  Vector x_fix_full = Vector::Zero(qp.n_x());
  for (Index i = 0; i < qp.n_x(); ++i)
    if (qp.x_min[i] == qp.x_max[i]) x_fix_full[i] = qp.x_min[i];
  const Matrix Qff = select_rows(select_cols(qp.Q, soft.free_x), soft.free_x);
  const Vector qf = select(qp.q + qp.Q * x_fix_full, soft.free_x);
  const Matrix Af = select_cols(qp.A, soft.free_x);
  const Vector a_shift = qp.A * x_fix_full;  // A x = Af xf + a_shift
  double constant = 0.5 * x_fix_full.dot(qp.Q * x_fix_full) + qp.q.dot(x_fix_full);

  const Vector xmin = select(qp.x_min, soft.free_x);
  const Vector xmax = select(qp.x_max, soft.free_x);
  soft.cx = 0.5 * (xmin + xmax);
  soft.dx = 0.5 * (xmax - xmin);

  // Soft rows (free y) and equality-like rows (fixed y, folded into the x block).
  const Matrix As = select_rows(Af, soft.free_y);
  const Vector ymin = select(qp.y_min, soft.free_y);
  const Vector ymax = select(qp.y_max, soft.free_y);
  soft.cy = 0.5 * (ymin + ymax);
  soft.dy = 0.5 * (ymax - ymin);
  std::vector<Index> fixed_y;
  for (Index i = 0; i < qp.n_y(); ++i)
    if (qp.y_min[i] == qp.y_max[i]) fixed_y.push_back(i);

  const Index nx = static_cast<Index>(soft.free_x.size());
  const Index ny = static_cast<Index>(soft.free_y.size());

  // Scaled x-block data: x = cx + Dx xt.
  Matrix Qs = soft.dx.asDiagonal() * Qff * soft.dx.asDiagonal();
  Vector gx = soft.dx.cwiseProduct(Qff * soft.cx + qf);
  constant += 0.5 * soft.cx.dot(Qff * soft.cx) + qf.dot(soft.cx);
  if (!fixed_y.empty()) {
    const Matrix Ae = select_rows(Af, fixed_y) * soft.dx.asDiagonal();
    const Vector re = select_rows(Af, fixed_y) * soft.cx + select(a_shift, fixed_y) - select(qp.y_min, fixed_y);
    Qs.noalias() += rho * Ae.transpose() * Ae;
    gx.noalias() += rho * Ae.transpose() * re;
    constant += 0.5 * rho * re.squaredNorm();
  }

  // Soft rows: A x - y = r0 + At xt - Dy yt.
  const Matrix At = As * soft.dx.asDiagonal();
  const Vector r0 = As * soft.cx + select(a_shift, soft.free_y) - soft.cy;
  gx.noalias() += rho * At.transpose() * r0;
  const Vector gy = -rho * soft.dy.cwiseProduct(r0);
  constant += 0.5 * rho * r0.squaredNorm();

  Vector h(nx + ny);
  h << gx, gy;
  std::optional<BoxQpProblem> problem;

  // A PSD Q with a null direction that the soft rows cannot see leaves the
  // box Hessian singular; lift that block once.
  const double lift = 1e-10 * std::max(1.0, Qs.diagonal().cwiseAbs().maxCoeff());
  const bool structured = options.allow_structured && ny >= nx && nx > 0;
  if (structured) {
    // Lower-right block rho D(dy^2) written as rho_s I + D(wx) with
    // rho_s = rho min(dy^2) / 2, so wx stays strictly positive.
    const Vector dy2 = soft.dy.cwiseAbs2();
    const double rho_s = 0.5 * rho * dy2.minCoeff();
    const Vector wx = (rho * dy2.array() - rho_s).matrix();
    const Matrix Fs = (rho / rho_s) * soft.dy.asDiagonal() * At;
    const Vector coef = (1.0 - (rho / rho_s) * dy2.array()).matrix();
    Matrix M11 = Qs;
    M11.noalias() += rho * At.transpose() * coef.asDiagonal() * At;
    // H11 - rho_s^2 Fs^T D(1/(rho_s + wx)) Fs equals Qs exactly.
    Matrix bare = Qs;
    if (!is_positive_definite(bare)) {
      bare.diagonal().array() += lift;
      M11.diagonal().array() += lift;
      soft.regularized = true;
    }
    problem.emplace(BoxQpProblem::from_structured(StructuredHessian(rho_s, Fs, M11, wx, bare), h,
                                                 options.materialize_dense));
  } else {
    Matrix H(nx + ny, nx + ny);
    H.topLeftCorner(nx, nx) = Qs + rho * At.transpose() * At;
    H.topRightCorner(nx, ny) = -rho * At.transpose() * soft.dy.asDiagonal();
    H.bottomLeftCorner(ny, nx) = H.topRightCorner(nx, ny).transpose();
    H.bottomRightCorner(ny, ny) = (rho * soft.dy.cwiseAbs2()).asDiagonal();
    if (!is_positive_definite(H)) {
      H.topLeftCorner(nx, nx).diagonal().array() += lift;
      soft.regularized = true;
    }
    problem.emplace(BoxQpProblem::from_dense(std::move(H), h));
  }
  return SoftBoxQp{.problem = std::move(*problem),
                   .rho = rho,
                   .constant = constant,
                   .n_x = soft.n_x,
                   .n_y = soft.n_y,
                   .free_x = std::move(soft.free_x),
                   .free_y = std::move(soft.free_y),
                   .x_fixed = std::move(soft.x_fixed),
                   .y_fixed = std::move(soft.y_fixed),
                   .cx = std::move(soft.cx),
                   .dx = std::move(soft.dx),
                   .cy = std::move(soft.cy),
                   .dy = std::move(soft.dy),
                   .regularized = soft.regularized};
}

SoftSolution desoften(const Vector& z_box, const SoftBoxQp& soft, const GeneralQp& qp) {
  require(z_box.size() == soft.box_size(), "desoften: solution has the wrong size");
  const Index nx = static_cast<Index>(soft.free_x.size());
  SoftSolution out;
  // ((1 - t) lo + (1 + t) hi) / 2 hits lo and hi exactly at t = -1 and t = 1.
  auto descale = [](double lo, double hi, double t) { return 0.5 * ((1.0 - t) * lo + (1.0 + t) * hi); };
  out.x = soft.x_fixed;
  for (Index i = 0; i < nx; ++i) {
    const Index k = soft.free_x[static_cast<std::size_t>(i)];
    out.x[k] = descale(qp.x_min[k], qp.x_max[k], z_box[i]);
  }
  out.y = soft.y_fixed;
  for (Index i = 0; i < static_cast<Index>(soft.free_y.size()); ++i) {
    const Index k = soft.free_y[static_cast<std::size_t>(i)];
    out.y[k] = descale(qp.y_min[k], qp.y_max[k], z_box[nx + i]);
  }
  out.violation = qp.violation(out.x);
  return out;
}

SoftSolution desoften(const SolveResult& result, const SoftBoxQp& soft, const GeneralQp& qp) {
  return desoften(result.z_star, soft, qp);
}

MatrixFile general_qp_to_file(const GeneralQp& qp) {
  MatrixFile f;
  f.set_text("format", "general_qp");
  f.set_matrix("Q", qp.Q);
  f.set_vector("q", qp.q);
  f.set_matrix("A", qp.A);
  f.set_vector("y_min", qp.y_min);
  f.set_vector("y_max", qp.y_max);
  f.set_vector("x_min", qp.x_min);
  f.set_vector("x_max", qp.x_max);
  return f;
}

GeneralQp general_qp_from_file(const MatrixFile& file) {
  require(file.has("format") && file.text("format") == "general_qp", "not a general QP file");
  GeneralQp qp{file.matrix("Q"),     file.vector("q"),     file.matrix("A"),    file.vector("y_min"),
               file.vector("y_max"), file.vector("x_min"), file.vector("x_max")};
  qp.validate();
  return qp;
}

void save_general_qp(const std::filesystem::path& path, const GeneralQp& qp) { general_qp_to_file(qp).save(path); }

GeneralQp load_general_qp(const std::filesystem::path& path) { return general_qp_from_file(MatrixFile::load(path)); }

}  // namespace kbqp
