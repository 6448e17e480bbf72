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

#include "kbqp/boxqp/iterate.hpp"

#include <algorithm>
#include <limits>

namespace kbqp {

double IpmIterate::min_positive_entry() const {
  if (size() == 0) return std::numeric_limits<double>::infinity();
  return std::min({gamma.minCoeff(), theta.minCoeff(), phi.minCoeff(), psi.minCoeff()});
}

double KktResiduals::max() const { return std::max({stationarity, upper, lower}); }

KktResiduals kkt_residuals(const BoxQpProblem& problem, const IpmIterate& it) {
  KktResiduals r;
  r.stationarity = inf_norm(problem.hessian_times(it.z) + problem.linear() + it.gamma - it.theta);
  r.upper = inf_norm((it.z + it.phi).array() - 1.0);
  r.lower = inf_norm((it.z - it.psi).array() + 1.0);
  return r;
}

namespace {

// gamma - theta = -g with both multipliers at least scale/2 when scale >= |g|_inf.
void multipliers_for_gradient(const Vector& g, IpmIterate& it) {
  const double scale = std::max(inf_norm(g), 1.0);
  it.gamma = (scale - 0.5 * g.array()).matrix();
  it.theta = (scale + 0.5 * g.array()).matrix();
}

}  // namespace

IpmIterate cold_start(const Vector& h) {
  const Index n = h.size();
  IpmIterate it;
  it.z = Vector::Zero(n);
  multipliers_for_gradient(h, it);
  it.phi = Vector::Ones(n);
  it.psi = Vector::Ones(n);
  return it;
}

IpmIterate warm_start(const BoxQpProblem& problem, const Vector& z_guess, double delta) {
  require(z_guess.size() == problem.size(), "warm start guess has the wrong size");
  require(delta > 0.0 && delta < 1.0, "warm start clamp margin must lie in (0, 1)");
  require(z_guess.allFinite() && (z_guess.size() == 0 || z_guess.cwiseAbs().maxCoeff() <= 1.0),
          "warm start guess lies outside [-1, 1]");
  IpmIterate it;
  it.z = z_guess.cwiseMax(-1.0 + delta).cwiseMin(1.0 - delta);
  const Vector gradient = problem.hessian_times(it.z) + problem.linear();
  multipliers_for_gradient(gradient, it);
  it.phi = (1.0 - it.z.array()).matrix();
  it.psi = (1.0 + it.z.array()).matrix();
  return it;
}

IpmIterate infeasible_start(Index n) {
  IpmIterate it;
  it.z = Vector::Zero(n);
  it.gamma = Vector::Ones(n);
  it.theta = Vector::Ones(n);
  it.phi = Vector::Ones(n);
  it.psi = Vector::Ones(n);
  return it;
}

double duality_measure(const IpmIterate& it) {
  const Index n = it.size();
  if (n == 0) return 0.0;
  return (it.gamma.dot(it.phi) + it.theta.dot(it.psi)) / (2.0 * static_cast<double>(n));
}

namespace {

double max_step_to_boundary(const Vector& v, const Vector& dv) {
  double ratio = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < v.size(); ++i)
    if (dv[i] < 0.0) ratio = std::min(ratio, -v[i] / dv[i]);
  return ratio;
}

}  // namespace

double step_length(const IpmIterate& it, const StepDirection& d, double fraction) {
  const double ratio = std::min({max_step_to_boundary(it.gamma, d.dgamma), max_step_to_boundary(it.theta, d.dtheta),
                                 max_step_to_boundary(it.phi, d.dphi), max_step_to_boundary(it.psi, d.dpsi)});
  return std::min(1.0, fraction * ratio);
}

void apply_step(IpmIterate& it, const StepDirection& d, double alpha) {
  it.z += alpha * d.dz;
  it.gamma += alpha * d.dgamma;
  it.theta += alpha * d.dtheta;
  it.phi += alpha * d.dphi;
  it.psi += alpha * d.dpsi;
}

}  // namespace kbqp
