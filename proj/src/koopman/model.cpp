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

#include "kbqp/koopman/model.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "kbqp/common/checksum.hpp"

namespace kbqp {

void SnapshotDataset::validate() const {
  require(X.cols() == U.cols() && X.cols() == Xp.cols(), "dataset: column counts differ");
  require(X.rows() == Xp.rows(), "dataset: X and Xp have different state dimensions");
  require(X.allFinite() && U.allFinite() && Xp.allFinite(), "dataset: non-finite entries");
}

std::string SnapshotDataset::checksum() const {
  Fnv1a64 h;
  h.update(X);
  h.update(U);
  h.update(Xp);
  return h.hex();
}

void KoopmanModel::validate() const {
  require(A.rows() == A.cols(), "model: A must be square");
  require(B.rows() == A.rows(), "model: B row count must match A");
  require(C.cols() == A.rows(), "model: C column count must match A");
  require(C == output_matrix(C.rows(), C.cols()), "model: C must equal [I 0]");
  require(lift.n_x == C.rows() && lift.lifted_dim() == A.rows(), "model: lift dimensions do not match A and C");
}

Matrix output_matrix(Index n_x, Index n_psi) {
  require(n_psi >= n_x, "output matrix: lifted dimension below state dimension");
  Matrix C = Matrix::Zero(n_x, n_psi);
  C.leftCols(n_x).setIdentity();
  return C;
}

KoopmanModel fit(const SnapshotDataset& data, const LiftSpec& spec, const FitOptions& options) {
  data.validate();
  spec.validate();
  require(data.n_x() == spec.n_x, "fit: dataset and lift have different state dimensions");
  require(data.size() > 0, "fit: empty dataset");
  require(options.block_size > 0, "fit: block size must be positive");

  const Index n_psi = spec.lifted_dim();
  const Index n_u = data.n_u();
  const Index d = n_psi + n_u;

  Matrix gram = Matrix::Zero(d, d);
  Matrix cross = Matrix::Zero(n_psi, d);
  Matrix Z(d, 0);
  for (Index start = 0; start < data.size(); start += options.block_size) {
    const Index cols = std::min(options.block_size, data.size() - start);
    Z.resize(d, cols);
    Z.topRows(n_psi) = lift_columns(spec, data.X.middleCols(start, cols));
    Z.bottomRows(n_u) = data.U.middleCols(start, cols);
    const Matrix next = lift_columns(spec, data.Xp.middleCols(start, cols));
    gram.selfadjointView<Eigen::Lower>().rankUpdate(Z);
    cross.noalias() += next * Z.transpose();
  }
  gram = gram.selfadjointView<Eigen::Lower>();

  // Jacobi scaling keeps the state rows and the much larger RBF rows on
  // comparable footing before the spectral cutoff.
  Vector scale(d);
  for (Index i = 0; i < d; ++i) scale[i] = gram(i, i) > 0.0 ? 1.0 / std::sqrt(gram(i, i)) : 0.0;
  const Matrix scaled = scale.asDiagonal() * gram * scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(scaled);
  if (eig.info() != Eigen::Success) throw FactorizationError("fit: eigendecomposition of the Gram matrix failed");
  const Vector& lambda = eig.eigenvalues();
  const double tol = (options.rank_tolerance > 0.0 ? options.rank_tolerance
                                                   : static_cast<double>(d) * std::numeric_limits<double>::epsilon()) *
                     std::max(lambda.maxCoeff(), 0.0);
  Vector inv_lambda(d);
  Index rank = 0;
  for (Index i = 0; i < d; ++i) {
    if (lambda[i] > tol && lambda[i] > 0.0) {
      inv_lambda[i] = 1.0 / lambda[i];
      ++rank;
    } else {
      inv_lambda[i] = 0.0;
    }
  }
  const Matrix& V = eig.eigenvectors();
  const Matrix pinv = scale.asDiagonal() * (V * inv_lambda.asDiagonal() * V.transpose()) * scale.asDiagonal();
  const Matrix AB = cross * pinv;

  KoopmanModel model;
  model.A = AB.leftCols(n_psi);
  model.B = AB.rightCols(n_u);
  model.C = output_matrix(spec.n_x, n_psi);
  model.lift = spec;
  model.fit.rank = rank;
  model.fit.regressors = d;
  model.fit.rank_deficient = rank < d;
  model.fit.underdetermined = data.size() < d;
  model.data_checksum = data.checksum();

  double zero = 0.0;
  for (Index start = 0; start < data.size(); start += options.block_size) {
    const Index cols = std::min(options.block_size, data.size() - start);
    zero += lift_columns(spec, data.Xp.middleCols(start, cols)).squaredNorm();
  }
  model.fit.zero_residual = zero;
  model.fit.residual = lifted_residual(data, spec, model.A, model.B, options.block_size);
  return model;
}

double lifted_residual(const SnapshotDataset& data, const LiftSpec& spec, const Matrix& A, const Matrix& B,
                       Index block_size) {
  require(A.rows() == spec.lifted_dim() && B.rows() == A.rows() && B.cols() == data.n_u(),
          "lifted residual: dimension mismatch");
  double total = 0.0;
  for (Index start = 0; start < data.size(); start += block_size) {
    const Index cols = std::min(block_size, data.size() - start);
    Matrix r = lift_columns(spec, data.Xp.middleCols(start, cols));
    r.noalias() -= A * lift_columns(spec, data.X.middleCols(start, cols));
    r.noalias() -= B * data.U.middleCols(start, cols);
    total += r.squaredNorm();
  }
  return total;
}

PredictionMatrices build_prediction_matrices(const KoopmanModel& model, Index N) {
  model.validate();
  require(N >= 1, "prediction matrices: horizon must be at least 1");
  const Index n_x = model.n_x();
  const Index n_u = model.n_u();
  PredictionMatrices pm;
  pm.N = N;
  pm.E.resize(N * n_x, model.n_psi());
  pm.F = Matrix::Zero(N * n_x, N * n_u);

  // power = C A^k, starting from C (a row selection of the identity).
  Matrix power = model.A.topRows(n_x);  // C A
  std::vector<Matrix> markov(static_cast<std::size_t>(N));
  markov[0] = model.B.topRows(n_x);  // C B
  for (Index k = 0; k < N; ++k) {
    pm.E.middleRows(k * n_x, n_x) = power;
    if (k + 1 < N) markov[static_cast<std::size_t>(k + 1)] = power * model.B;
    if (k + 1 < N) power = power * model.A;
  }
  for (Index i = 0; i < N; ++i)
    for (Index j = 0; j <= i; ++j) pm.F.block(i * n_x, j * n_u, n_x, n_u) = markov[static_cast<std::size_t>(i - j)];
  return pm;
}

Matrix predict(const KoopmanModel& model, const Vector& x0, const Matrix& inputs) {
  require(inputs.cols() == model.n_u(), "predict: inputs must be N x n_u");
  Vector psi = lift(model.lift, x0);
  Matrix out(inputs.rows(), model.n_x());
  for (Index k = 0; k < inputs.rows(); ++k) {
    psi = model.A * psi + model.B * inputs.row(k).transpose();
    out.row(k) = (model.C * psi).transpose();
  }
  return out;
}

namespace {

void put_lift(MatrixFile& f, const LiftSpec& spec) {
  f.set_matrix("centers", spec.centers);
  f.set_scalar("n_x", static_cast<double>(spec.n_x));
  f.set_text("lift_kind", "thin_plate");
  f.set_text("lift_seed", std::to_string(spec.seed));
}

LiftSpec get_lift(const MatrixFile& f) {
  require(f.text("lift_kind") == "thin_plate", "unknown lift kind");
  LiftSpec spec;
  spec.centers = f.matrix("centers");
  spec.n_x = static_cast<Index>(f.scalar("n_x"));
  spec.seed = std::stoull(f.text("lift_seed"));
  spec.validate();
  return spec;
}

}  // namespace

MatrixFile dataset_to_file(const SnapshotDataset& data, const LiftSpec* spec) {
  MatrixFile f;
  f.set_text("format", "snapshots");
  f.set_matrix("X", data.X);
  f.set_matrix("U", data.U);
  f.set_matrix("Xp", data.Xp);
  f.set_text("checksum", data.checksum());
  if (spec) put_lift(f, *spec);
  return f;
}

SnapshotDataset dataset_from_file(const MatrixFile& file) {
  require(file.has("format") && file.text("format") == "snapshots", "not a snapshot dataset file");
  SnapshotDataset data{file.matrix("X"), file.matrix("U"), file.matrix("Xp")};
  data.validate();
  if (file.has("checksum")) require(file.text("checksum") == data.checksum(), "dataset checksum mismatch");
  return data;
}

void save_dataset(const std::filesystem::path& path, const SnapshotDataset& data, const LiftSpec* spec) {
  dataset_to_file(data, spec).save(path);
}

SnapshotDataset load_dataset(const std::filesystem::path& path) { return dataset_from_file(MatrixFile::load(path)); }

MatrixFile model_to_file(const KoopmanModel& model) {
  MatrixFile f;
  f.set_text("format", "koopman");
  f.set_matrix("A", model.A);
  f.set_matrix("B", model.B);
  f.set_matrix("C", model.C);
  put_lift(f, model.lift);
  f.set_scalar("fit_residual", model.fit.residual);
  f.set_scalar("zero_residual", model.fit.zero_residual);
  f.set_scalar("rank", static_cast<double>(model.fit.rank));
  f.set_scalar("regressors", static_cast<double>(model.fit.regressors));
  f.set_scalar("underdetermined", model.fit.underdetermined ? 1.0 : 0.0);
  f.set_text("data_checksum", model.data_checksum);
  return f;
}

KoopmanModel model_from_file(const MatrixFile& file) {
  require(file.has("format") && file.text("format") == "koopman", "not a Koopman model file");
  KoopmanModel model;
  model.A = file.matrix("A");
  model.B = file.matrix("B");
  model.C = file.matrix("C");
  model.lift = get_lift(file);
  model.fit.residual = file.scalar("fit_residual");
  model.fit.zero_residual = file.scalar("zero_residual");
  model.fit.rank = static_cast<Index>(file.scalar("rank"));
  model.fit.regressors = static_cast<Index>(file.scalar("regressors"));
  model.fit.rank_deficient = model.fit.rank < model.fit.regressors;
  model.fit.underdetermined = file.scalar("underdetermined") != 0.0;
  model.data_checksum = file.text("data_checksum");
  model.validate();
  return model;
}

void save_model(const std::filesystem::path& path, const KoopmanModel& model) { model_to_file(model).save(path); }

KoopmanModel load_model(const std::filesystem::path& path) { return model_from_file(MatrixFile::load(path)); }

}  // namespace kbqp
