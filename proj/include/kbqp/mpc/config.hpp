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

#include "kbqp/boxqp/solver.hpp"
#include "kbqp/mpc/builder.hpp"

namespace kbqp {

/// Reference trajectory description. Sinusoids are a * sin(omega t + phase_i)
/// with the per-node phase supplied by the caller (node coordinates for KdV).
struct ReferenceSpec {
  enum class Kind { Constant, Table, Sinusoid };
  Kind kind = Kind::Sinusoid;
  double amplitude = 1.2;
  double omega = 0.0;  // set from period_s when parsed
  Vector constant;     // Constant: length n_x, or length 1 broadcast
  Matrix table;        // Table: one row per control step, held after the last row
  Vector u_r;          // length n_u, or empty for zero

  Vector state_at(double t, Index step, const Vector& phase) const;
  Vector input(Index n_u) const;
};

struct MpcConfig {
  Index horizon = 10;
  double wx = 1.0;
  double wu = 0.05;
  double wdu = 0.05;
  double rho = 1e2;
  double epsilon = 1e-6;
  int max_iters = 100;
  bool warm_start = true;
  Backend backend = Backend::Auto;
  ReferenceSpec reference;

  MpcWeights weights(Index n_x, Index n_u) const;
  SolverConfig solver() const;
};

MpcConfig default_kdv_mpc_config();

MpcConfig mpc_config_from_json(const std::string& text);
std::string mpc_config_to_json(const MpcConfig& config);
MpcConfig load_mpc_config(const std::filesystem::path& path);

Backend parse_backend(const std::string& name);
std::string backend_name(Backend backend);

}  // namespace kbqp
