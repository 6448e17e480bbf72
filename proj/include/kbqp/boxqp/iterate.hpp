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

#include "kbqp/boxqp/problem.hpp"

namespace kbqp {

/// Primal z, bound multipliers (gamma for z <= 1, theta for z >= -1) and the
/// matching slacks phi = 1 - z, psi = 1 + z.
struct IpmIterate {
  Vector z;
  Vector gamma;
  Vector theta;
  Vector phi;
  Vector psi;

  Index size() const { return z.size(); }
  double min_positive_entry() const;
  bool strictly_positive() const { return min_positive_entry() > 0.0; }
};

/// Infinity norms of the three equality rows of the KKT system:
/// H z + h + gamma - theta, z + phi - 1, z - psi + 1.
struct KktResiduals {
  double stationarity = 0.0;
  double upper = 0.0;
  double lower = 0.0;

  double max() const;
};

KktResiduals kkt_residuals(const BoxQpProblem& problem, const IpmIterate& it);

/// Strictly feasible start at z = 0. The multiplier scale is max(|h|_inf, 1)
/// so that h = 0 still yields positive multipliers.
IpmIterate cold_start(const Vector& h);

/// Strictly feasible start around a previous solution. The guess is clamped
/// into [-1 + delta, 1 - delta] before the slacks are formed.
IpmIterate warm_start(const BoxQpProblem& problem, const Vector& z_guess, double delta = 1e-6);

/// z = 0 and every multiplier and slack equal to one. Not on the equality
/// manifold unless h = 0.
IpmIterate infeasible_start(Index n);

/// (gamma^T phi + theta^T psi) / (2n).
double duality_measure(const IpmIterate& it);

struct StepDirection {
  Vector dz;
  Vector dgamma;
  Vector dtheta;
  Vector dphi;
  Vector dpsi;
};

/// Fraction-to-the-boundary step over the four nonnegative blocks, capped at 1.
double step_length(const IpmIterate& it, const StepDirection& d, double fraction);

void apply_step(IpmIterate& it, const StepDirection& d, double alpha);

}  // namespace kbqp
