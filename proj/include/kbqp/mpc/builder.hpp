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

#include "kbqp/boxqp/solver.hpp"
#include "kbqp/koopman/model.hpp"
#include "kbqp/qp_adapter/adapter.hpp"

namespace kbqp {

/// Diagonal tracking weights, the input-rate weight, penalty rho and horizon N.
struct MpcWeights {
  Vector Wx;
  Vector Wu;
  Vector Wdu;
  double rho = 1e2;
  Index N = 10;

  void validate() const;
  static MpcWeights uniform(Index n_x, Index n_u, Index N, double wx, double wu, double wdu, double rho);
};

struct MpcReferences {
  Vector x_r;
  Vector u_r;
};

struct WeightBlocks {
  Vector Wx_bar;  // length N n_x
  Vector Wu_bar;  // length N n_u
  Matrix R_bar;   // (N n_u) x (N n_u), U^T R_bar U = sum_k |u_k - u_{k-1}|^2_Wdu with u_{-1} = 0
};

WeightBlocks build_weight_blocks(const MpcWeights& weights);

/// rho [F^T F, -F^T; -F, I] + blkdiag(Wu + R, Wx). Accepts rho = 0, unlike the builder.
Matrix assemble_mpc_hessian(const Matrix& F, const WeightBlocks& blocks, double rho);

/// z = col(U, X) with U = col(u_0..u_{N-1}) first and X = col(x_1..x_N) second.
struct DecisionLayout {
  Index N = 0;
  Index n_u = 0;
  Index n_x = 0;

  Index n1() const { return N * n_u; }
  Index n2() const { return N * n_x; }
  Index size() const { return n1() + n2(); }
  Index bound_constraints() const { return 2 * size(); }
};

struct MpcProblemInstance {
  BoxQpProblem problem;
  Vector psi0;
  DecisionLayout layout;
  // Reference and psi0 quadratics; cost(z) = z^T H z + 2 z^T h + constant.
  double constant = 0.0;
};

/// Dynamics-relaxed MPC as a box QP:
///   min (X - xr)^T Wx (X - xr) + (U - ur)^T Wu (U - ur) + U^T R U + rho |X - E psi - F U|^2
/// over -1 <= U, X <= 1. The Hessian is built once; each sample only changes h.
class MpcBuilder {
 public:
  MpcBuilder(const KoopmanModel& model, PredictionMatrices pm, MpcWeights weights, bool materialize_dense = true);

  const DecisionLayout& layout() const { return layout_; }
  const MpcWeights& weights() const { return weights_; }
  const PredictionMatrices& prediction() const { return pm_; }
  const KoopmanModel& model() const { return model_; }
  /// Shared Hessian with a zero linear term.
  const BoxQpProblem& base_problem() const { return base_; }

  MpcProblemInstance build(const MpcReferences& refs, const Vector& x_t) const;
  MpcProblemInstance build_from_lifted(const MpcReferences& refs, const Vector& psi0) const;

  /// Linear term written into a caller-owned buffer.
  void linear_term(const MpcReferences& refs, const Vector& psi0, Vector& h) const;
  double constant_term(const MpcReferences& refs, const Vector& psi0) const;

  /// Absolute MPC objective at z (not halved).
  double cost(const MpcProblemInstance& instance, const Vector& z) const;

 private:
  void check_refs(const MpcReferences& refs) const;

  KoopmanModel model_;
  PredictionMatrices pm_;
  MpcWeights weights_;
  WeightBlocks blocks_;
  DecisionLayout layout_;
  BoxQpProblem base_;
};

/// Condensed baseline: min 1/2 z^T Q z + q^T z with Q = F^T Wx F + Wu + R,
/// q = F^T Wx (E psi - xr) - Wu ur, rows -1 - E psi <= F z <= 1 - E psi and -1 <= z <= 1.
GeneralQp build_condensed_qp(const PredictionMatrices& pm, const MpcWeights& weights, const MpcReferences& refs,
                             const Vector& psi0);

/// Drops the first block of U and of X and repeats the last one.
Vector shift_guess(const Vector& previous, const DecisionLayout& layout);

/// First n_u entries of the solution.
Vector extract_policy(const SolveResult& result, const DecisionLayout& layout);
Vector extract_policy(const Vector& z, const DecisionLayout& layout);

}  // namespace kbqp
