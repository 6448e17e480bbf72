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

#include <filesystem>
#include <vector>

#include "kbqp/boxqp/solver.hpp"
#include "kbqp/common/matrix_io.hpp"

namespace kbqp {

/// min 1/2 x^T Q x + q^T x  s.t.  y_min <= A x <= y_max,  x_min <= x <= x_max.
struct GeneralQp {
  Matrix Q;
  Vector q;
  Matrix A;
  Vector y_min;
  Vector y_max;
  Vector x_min;
  Vector x_max;

  Index n_x() const { return Q.rows(); }
  Index n_y() const { return A.rows(); }
  void validate() const;
  double objective(const Vector& x) const;
  /// Componentwise distance of A x outside [y_min, y_max].
  Vector violation(const Vector& x) const;
};

/// The penalized problem in the original coordinates:
/// 1/2 x^T Q x + q^T x + rho/2 |A x - y|^2.
double soft_objective(const GeneralQp& qp, double rho, const Vector& x, const Vector& y);

/// Soft-constrained box QP over the unit box, with the affine maps back to
/// the original (x, y).
///
/// Free x coordinates map as x = cx + dx .* xt. Rows with y_min < y_max map as
/// y = cy + dy .* yt. Coordinates with zero-width bounds are fixed at that
/// value and do not appear in the box problem.
struct SoftBoxQp {
  BoxQpProblem problem;
  double rho = 0.0;
  // Objective of the original penalized problem minus problem.objective().
  double constant = 0.0;
  Index n_x = 0;
  Index n_y = 0;
  std::vector<Index> free_x;
  std::vector<Index> free_y;
  Vector x_fixed;  // full length n_x; entries for free coordinates unused
  Vector y_fixed;  // full length n_y
  Vector cx, dx;   // length |free_x|
  Vector cy, dy;   // length |free_y|
  bool regularized = false;

  Index box_size() const { return problem.size(); }
  /// Maps original (x, y) into box coordinates.
  Vector to_box(const Vector& x, const Vector& y) const;
};

struct SoftenOptions {
  double rho = 1e6;
  // Build the Schur-structured Hessian when the number of free y rows is at
  // least the number of free x coordinates.
  bool allow_structured = true;
  // Also store the dense Hessian next to the structured one.
  bool materialize_dense = false;
};

SoftBoxQp soften(const GeneralQp& qp, const SoftenOptions& options = {});

struct SoftSolution {
  Vector x;
  Vector y;
  Vector violation;
};

SoftSolution desoften(const Vector& z_box, const SoftBoxQp& soft, const GeneralQp& qp);
SoftSolution desoften(const SolveResult& result, const SoftBoxQp& soft, const GeneralQp& qp);

MatrixFile general_qp_to_file(const GeneralQp& qp);
GeneralQp general_qp_from_file(const MatrixFile& file);
void save_general_qp(const std::filesystem::path& path, const GeneralQp& qp);
GeneralQp load_general_qp(const std::filesystem::path& path);

}  // namespace kbqp
