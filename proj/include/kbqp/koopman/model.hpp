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
#include <string>

#include "kbqp/common/matrix_io.hpp"
#include "kbqp/koopman/lift.hpp"

namespace kbqp {

/// Snapshot pairs (x_j, u_j, x_j^+), one per column.
struct SnapshotDataset {
  Matrix X;
  Matrix U;
  Matrix Xp;

  Index size() const { return X.cols(); }
  Index n_x() const { return X.rows(); }
  Index n_u() const { return U.rows(); }
  void validate() const;
  std::string checksum() const;
};

struct FitOptions {
  // Columns lifted per pass while accumulating the Gram matrix.
  Index block_size = 4096;
  // Relative eigenvalue cutoff on the Gram matrix; 0 selects d * machine epsilon.
  double rank_tolerance = 0.0;
};

struct FitDiagnostics {
  double residual = 0.0;       // sum_j |psi(x_j^+) - A psi(x_j) - B u_j|^2
  double zero_residual = 0.0;  // same sum for A = 0, B = 0
  Index rank = 0;
  Index regressors = 0;
  bool rank_deficient = false;
  bool underdetermined = false;  // fewer samples than regressors
};

/// Lifted linear predictor psi+ = A psi + B u, x = C psi with C = [I 0].
struct KoopmanModel {
  Matrix A;
  Matrix B;
  Matrix C;
  LiftSpec lift;
  FitDiagnostics fit;
  std::string data_checksum;

  Index n_x() const { return C.rows(); }
  Index n_psi() const { return A.rows(); }
  Index n_u() const { return B.cols(); }
  void validate() const;
};

/// Least-squares fit of [A B] over the lifted data, streamed in column
/// blocks. The normal-equation matrix is inverted through its
/// eigendecomposition; a numerically singular spectrum falls back to the
/// minimum-norm (pseudo-inverse) solution and is flagged.
KoopmanModel fit(const SnapshotDataset& data, const LiftSpec& spec, const FitOptions& options = {});

/// [I_{n_x} 0] of size n_x x n_psi.
Matrix output_matrix(Index n_x, Index n_psi);

/// Sum of squared one-step lifted residuals of (A, B) on the data.
double lifted_residual(const SnapshotDataset& data, const LiftSpec& spec, const Matrix& A, const Matrix& B,
                       Index block_size = 4096);

/// Condensed N-step predictor X = E psi(x0) + F U, with X = col(x_1..x_N) and
/// U = col(u_0..u_{N-1}).
struct PredictionMatrices {
  Matrix E;  // (N n_x) x n_psi, block i = C A^{i+1}
  Matrix F;  // (N n_x) x (N n_u), block (i, j) = C A^{i-j} B for i >= j
  Index N = 0;
};

PredictionMatrices build_prediction_matrices(const KoopmanModel& model, Index N);

/// Rollout of the lifted model; row k of the result is x_{k+1}. `inputs` is N x n_u.
Matrix predict(const KoopmanModel& model, const Vector& x0, const Matrix& inputs);

MatrixFile dataset_to_file(const SnapshotDataset& data, const LiftSpec* spec = nullptr);
SnapshotDataset dataset_from_file(const MatrixFile& file);
void save_dataset(const std::filesystem::path& path, const SnapshotDataset& data, const LiftSpec* spec = nullptr);
SnapshotDataset load_dataset(const std::filesystem::path& path);

MatrixFile model_to_file(const KoopmanModel& model);
KoopmanModel model_from_file(const MatrixFile& file);
void save_model(const std::filesystem::path& path, const KoopmanModel& model);
KoopmanModel load_model(const std::filesystem::path& path);

}  // namespace kbqp
