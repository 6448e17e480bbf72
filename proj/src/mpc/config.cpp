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

#include "kbqp/mpc/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace kbqp {
namespace {

using nlohmann::json;

constexpr double kDefaultPeriod = 25.0;

Vector vector_from_json(const json& j) {
  if (j.is_number()) return Vector::Constant(1, j.get<double>());
  require(j.is_array(), "expected a number or an array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = j[i].get<double>();
  return v;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

}  // namespace

Vector ReferenceSpec::state_at(double t, Index step, const Vector& phase) const {
  const Index n = phase.size();
  switch (kind) {
    case Kind::Constant:
      if (constant.size() == 1) return Vector::Constant(n, constant[0]);
      require(constant.size() == n, "constant reference has the wrong length");
      return constant;
    case Kind::Table: {
      require(table.rows() > 0 && table.cols() == n, "reference table has the wrong shape");
      const Index row = std::min<Index>(std::max<Index>(step, 0), table.rows() - 1);
      return table.row(row).transpose();
    }
    case Kind::Sinusoid:
      return (amplitude * (omega * t + phase.array()).sin()).matrix();
  }
  throw std::logic_error("unknown reference kind");
}

Vector ReferenceSpec::input(Index n_u) const {
  if (u_r.size() == 0) return Vector::Zero(n_u);
  if (u_r.size() == 1) return Vector::Constant(n_u, u_r[0]);
  require(u_r.size() == n_u, "input reference has the wrong length");
  return u_r;
}

MpcWeights MpcConfig::weights(Index n_x, Index n_u) const {
  MpcWeights w = MpcWeights::uniform(n_x, n_u, horizon, wx, wu, wdu, rho);
  w.validate();
  return w;
}

SolverConfig MpcConfig::solver() const {
  SolverConfig c;
  c.epsilon = epsilon;
  c.max_iters = max_iters;
  c.backend = backend;
  c.validate();
  return c;
}

MpcConfig default_kdv_mpc_config() {
  MpcConfig c;
  c.reference.kind = ReferenceSpec::Kind::Sinusoid;
  c.reference.amplitude = 1.2;
  c.reference.omega = 2.0 * std::numbers::pi / kDefaultPeriod;
  return c;
}

Backend parse_backend(const std::string& name) {
  if (name == "dense") return Backend::Dense;
  if (name == "structured") return Backend::Structured;
  if (name == "auto") return Backend::Auto;
  throw InvalidInput("unknown backend '" + name + "' (expected dense, structured or auto)");
}

std::string backend_name(Backend backend) {
  switch (backend) {
    case Backend::Dense:
      return "dense";
    case Backend::Structured:
      return "structured";
    case Backend::Auto:
      return "auto";
  }
  return "auto";
}

MpcConfig mpc_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("MPC config: ") + e.what());
  }
  MpcConfig c = default_kdv_mpc_config();
  try {
    c.horizon = j.value("horizon", c.horizon);
    c.wx = j.value("wx", c.wx);
    c.wu = j.value("wu", c.wu);
    c.wdu = j.value("wdu", c.wdu);
    c.rho = j.value("rho", c.rho);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.max_iters = j.value("max_iters", c.max_iters);
    c.warm_start = j.value("warm_start", c.warm_start);
    c.backend = parse_backend(j.value("backend", backend_name(c.backend)));
    if (j.contains("reference")) {
      const json& r = j.at("reference");
      const std::string type = r.value("type", "sinusoid");
      ReferenceSpec& ref = c.reference;
      if (type == "sinusoid") {
        ref.kind = ReferenceSpec::Kind::Sinusoid;
        ref.amplitude = r.value("amplitude", ref.amplitude);
        ref.omega = 2.0 * std::numbers::pi / r.value("period_s", kDefaultPeriod);
      } else if (type == "constant") {
        ref.kind = ReferenceSpec::Kind::Constant;
        ref.constant = vector_from_json(r.at("value"));
      } else if (type == "table") {
        ref.kind = ReferenceSpec::Kind::Table;
        const json& rows = r.at("rows");
        require(rows.is_array() && !rows.empty(), "reference table needs at least one row");
        const Vector first = vector_from_json(rows[0]);
        ref.table.resize(static_cast<Index>(rows.size()), first.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
          const Vector row = vector_from_json(rows[i]);
          require(row.size() == first.size(), "reference table rows differ in length");
          ref.table.row(static_cast<Index>(i)) = row.transpose();
        }
      } else {
        throw InvalidInput("unknown reference type '" + type + "'");
      }
      if (r.contains("u_r")) ref.u_r = vector_from_json(r.at("u_r"));
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("MPC config: ") + e.what());
  }
  require(c.horizon >= 1, "MPC config: horizon must be at least 1");
  require(c.wx > 0.0 && c.wu > 0.0 && c.wdu > 0.0 && c.rho > 0.0, "MPC config: weights and rho must be positive");
  c.solver();
  return c;
}

std::string mpc_config_to_json(const MpcConfig& c) {
  json j;
  j["horizon"] = c.horizon;
  j["wx"] = c.wx;
  j["wu"] = c.wu;
  j["wdu"] = c.wdu;
  j["rho"] = c.rho;
  j["epsilon"] = c.epsilon;
  j["max_iters"] = c.max_iters;
  j["warm_start"] = c.warm_start;
  j["backend"] = backend_name(c.backend);
  json r;
  switch (c.reference.kind) {
    case ReferenceSpec::Kind::Sinusoid:
      r["type"] = "sinusoid";
      r["amplitude"] = c.reference.amplitude;
      r["period_s"] = c.reference.omega == 0.0 ? 0.0 : 2.0 * std::numbers::pi / c.reference.omega;
      break;
    case ReferenceSpec::Kind::Constant:
      r["type"] = "constant";
      r["value"] = vector_to_json(c.reference.constant);
      break;
    case ReferenceSpec::Kind::Table: {
      r["type"] = "table";
      json rows = json::array();
      for (Index i = 0; i < c.reference.table.rows(); ++i) rows.push_back(vector_to_json(c.reference.table.row(i)));
      r["rows"] = rows;
      break;
    }
  }
  if (c.reference.u_r.size() > 0) r["u_r"] = vector_to_json(c.reference.u_r);
  j["reference"] = r;
  return j.dump(2);
}

MpcConfig load_mpc_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open MPC config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return mpc_config_from_json(ss.str());
}

}  // namespace kbqp
