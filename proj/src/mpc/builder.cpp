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

#include "kbqp/mpc/builder.hpp"

#include <cmath>

namespace kbqp {

void MpcWeights::validate() const {
  require(N >= 1, "MPC weights: horizon must be at least 1");
  require(Wx.size() > 0 && Wu.size() > 0 && Wdu.size() == Wu.size(), "MPC weights: inconsistent sizes");
  require(Wx.allFinite() && Wx.minCoeff() > 0.0, "MPC weights: Wx must be strictly positive");
  require(Wu.allFinite() && Wu.minCoeff() > 0.0, "MPC weights: Wu must be strictly positive");
  require(Wdu.allFinite() && Wdu.minCoeff() > 0.0, "MPC weights: Wdu must be strictly positive");
  require(std::isfinite(rho) && rho > 0.0, "MPC weights: rho must be positive");
}

MpcWeights MpcWeights::uniform(Index n_x, Index n_u, Index N, double wx, double wu, double wdu, double rho) {
  MpcWeights w;
  w.Wx = Vector::Constant(n_x, wx);
  w.Wu = Vector::Constant(n_u, wu);
  w.Wdu = Vector::Constant(n_u, wdu);
  w.rho = rho;
  w.N = N;
  return w;
}

WeightBlocks build_weight_blocks(const MpcWeights& weights) {
  require(weights.N >= 1 && weights.Wdu.size() == weights.Wu.size(), "weight blocks: inconsistent weights");
  const Index N = weights.N;
  const Index n_u = weights.Wu.size();
  WeightBlocks b;
  b.Wx_bar = weights.Wx.replicate(N, 1);
  b.Wu_bar = weights.Wu.replicate(N, 1);
  b.R_bar = Matrix::Zero(N * n_u, N * n_u);
  for (Index k = 0; k < N; ++k) {
    const double diag_factor = k + 1 < N ? 2.0 : 1.0;
    for (Index i = 0; i < n_u; ++i) {
      b.R_bar(k * n_u + i, k * n_u + i) = diag_factor * weights.Wdu[i];
      if (k + 1 < N) {
        b.R_bar(k * n_u + i, (k + 1) * n_u + i) = -weights.Wdu[i];
        b.R_bar((k + 1) * n_u + i, k * n_u + i) = -weights.Wdu[i];
      }
    }
  }
  return b;
}

Matrix assemble_mpc_hessian(const Matrix& F, const WeightBlocks& blocks, double rho) {
  const Index n1 = F.cols();
  const Index n2 = F.rows();
  require(blocks.Wu_bar.size() == n1 && blocks.Wx_bar.size() == n2 && blocks.R_bar.rows() == n1,
          "assemble_mpc_hessian: blocks do not match F");
  require(rho >= 0.0, "assemble_mpc_hessian: rho must be nonnegative");
  Matrix H = Matrix::Zero(n1 + n2, n1 + n2);
  H.topLeftCorner(n1, n1) = rho * F.transpose() * F + blocks.R_bar;
  H.topLeftCorner(n1, n1).diagonal() += blocks.Wu_bar;
  H.topRightCorner(n1, n2) = -rho * F.transpose();
  H.bottomLeftCorner(n2, n1) = -rho * F;
  H.bottomRightCorner(n2, n2).diagonal() = blocks.Wx_bar.array() + rho;
  return H;
}

namespace {

BoxQpProblem make_base(const PredictionMatrices& pm, const MpcWeights& w, const WeightBlocks& b, bool dense) {
  Matrix M11 = b.R_bar;
  M11.diagonal() += b.Wu_bar;
  StructuredHessian sh(w.rho, pm.F, std::move(M11), b.Wx_bar);
  return BoxQpProblem::from_structured(std::move(sh), Vector::Zero(pm.F.cols() + pm.F.rows()), dense);
}

}  // namespace

MpcBuilder::MpcBuilder(const KoopmanModel& model, PredictionMatrices pm, MpcWeights weights, bool materialize_dense)
    : model_(model), pm_(std::move(pm)), weights_(std::move(weights)), blocks_(build_weight_blocks(weights_)),
      layout_{pm_.N, model.n_u(), model.n_x()},
      base_(make_base(pm_, weights_, blocks_, materialize_dense)) {
  weights_.validate();
  model_.validate();
  require(weights_.N == pm_.N, "MPC builder: horizon differs from the prediction matrices");
  require(weights_.Wx.size() == model_.n_x() && weights_.Wu.size() == model_.n_u(),
          "MPC builder: weight sizes do not match the model");
  require(pm_.E.rows() == layout_.n2() && pm_.E.cols() == model_.n_psi() && pm_.F.cols() == layout_.n1(),
          "MPC builder: prediction matrices do not match the model");
}

void MpcBuilder::check_refs(const MpcReferences& refs) const {
  require(refs.x_r.size() == layout_.n_x && refs.u_r.size() == layout_.n_u, "MPC references have wrong sizes");
  require(refs.x_r.allFinite() && refs.u_r.allFinite(), "MPC references must be finite");
}

void MpcBuilder::linear_term(const MpcReferences& refs, const Vector& psi0, Vector& h) const {
  check_refs(refs);
  require(psi0.size() == model_.n_psi(), "MPC builder: lifted state has the wrong size");
  const Index n1 = layout_.n1();
  const Index n2 = layout_.n2();
  h.resize(n1 + n2);
  const Vector Epsi = pm_.E * psi0;
  h.head(n1).noalias() = weights_.rho * (pm_.F.transpose() * Epsi);
  h.head(n1) -= blocks_.Wu_bar.cwiseProduct(refs.u_r.replicate(layout_.N, 1));
  h.tail(n2) = -weights_.rho * Epsi - blocks_.Wx_bar.cwiseProduct(refs.x_r.replicate(layout_.N, 1));
}

double MpcBuilder::constant_term(const MpcReferences& refs, const Vector& psi0) const {
  check_refs(refs);
  const Vector xr = refs.x_r.replicate(layout_.N, 1);
  const Vector ur = refs.u_r.replicate(layout_.N, 1);
  return weights_.rho * (pm_.E * psi0).squaredNorm() + xr.dot(blocks_.Wx_bar.cwiseProduct(xr)) +
         ur.dot(blocks_.Wu_bar.cwiseProduct(ur));
}

MpcProblemInstance MpcBuilder::build_from_lifted(const MpcReferences& refs, const Vector& psi0) const {
  Vector h;
  linear_term(refs, psi0, h);
  return MpcProblemInstance{base_.with_linear(std::move(h)), psi0, layout_, constant_term(refs, psi0)};
}

MpcProblemInstance MpcBuilder::build(const MpcReferences& refs, const Vector& x_t) const {
  return build_from_lifted(refs, lift(model_.lift, x_t));
}

double MpcBuilder::cost(const MpcProblemInstance& instance, const Vector& z) const {
  return 2.0 * instance.problem.objective(z) + instance.constant;
}

GeneralQp build_condensed_qp(const PredictionMatrices& pm, const MpcWeights& weights, const MpcReferences& refs,
                             const Vector& psi0) {
  weights.validate();
  const WeightBlocks b = build_weight_blocks(weights);
  const Index n1 = pm.F.cols();
  require(b.Wu_bar.size() == n1 && b.Wx_bar.size() == pm.F.rows(), "condensed QP: weights do not match F");
  const Vector Epsi = pm.E * psi0;
  GeneralQp qp;
  qp.Q = pm.F.transpose() * b.Wx_bar.asDiagonal() * pm.F;
  qp.Q += b.R_bar;
  qp.Q.diagonal() += b.Wu_bar;
  qp.Q = 0.5 * (qp.Q + qp.Q.transpose()).eval();
  qp.q = pm.F.transpose() * b.Wx_bar.cwiseProduct(Epsi - refs.x_r.replicate(weights.N, 1)) -
         b.Wu_bar.cwiseProduct(refs.u_r.replicate(weights.N, 1));
  qp.A = pm.F;
  qp.y_min = (-1.0 - Epsi.array()).matrix();
  qp.y_max = (1.0 - Epsi.array()).matrix();
  qp.x_min = Vector::Constant(n1, -1.0);
  qp.x_max = Vector::Constant(n1, 1.0);
  return qp;
}

Vector shift_guess(const Vector& previous, const DecisionLayout& layout) {
  require(previous.size() == layout.size(), "shift_guess: solution has the wrong size");
  Vector out(layout.size());
  auto shift_segment = [&](Index offset, Index block, Index count) {
    if (count > 1) out.segment(offset, (count - 1) * block) = previous.segment(offset + block, (count - 1) * block);
    out.segment(offset + (count - 1) * block, block) = previous.segment(offset + (count - 1) * block, block);
  };
  shift_segment(0, layout.n_u, layout.N);
  shift_segment(layout.n1(), layout.n_x, layout.N);
  return out;
}

Vector extract_policy(const Vector& z, const DecisionLayout& layout) {
  require(z.size() == layout.size(), "extract_policy: solution has the wrong size");
  return z.head(layout.n_u);
}

Vector extract_policy(const SolveResult& result, const DecisionLayout& layout) {
  return extract_policy(result.z_star, layout);
}

}  // namespace kbqp
