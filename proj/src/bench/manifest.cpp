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

#include "kbqp/bench/manifest.hpp"

#include <Eigen/Core>

#include <ostream>
#include <sstream>

#include "kbqp/common/checksum.hpp"
#include "kbqp/kdv/simulator.hpp"

#ifndef KBQP_VERSION
#define KBQP_VERSION "unknown"
#endif

namespace kbqp {

Manifest::Manifest(std::string experiment) { entries_.emplace_back("experiment", std::move(experiment)); }

Manifest& Manifest::add(const std::string& key, const std::string& value) {
  entries_.emplace_back(key, value);
  return *this;
}

Manifest& Manifest::add(const std::string& key, double value) {
  std::ostringstream s;
  s.precision(17);
  s << value;
  return add(key, s.str());
}

Manifest& Manifest::add(const std::string& key, long long value) { return add(key, std::to_string(value)); }

std::string Manifest::config_hash() const {
  Fnv1a64 h;
  for (const auto& [k, v] : entries_) {
    h.update(k);
    h.update(std::string_view("=", 1));
    h.update(v);
    h.update(std::string_view("\n", 1));
  }
  return h.hex();
}

void Manifest::write(std::ostream& out) const {
  for (const auto& [k, v] : entries_) out << "# " << k << ": " << v << '\n';
  out << "# config_hash: " << config_hash() << '\n';
  out << "# versions: " << build_versions() << '\n';
}

std::string build_versions() {
  std::ostringstream s;
  s << "kbqp " << KBQP_VERSION << ", Eigen " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.'
    << EIGEN_MINOR_VERSION << ", " << fft_backend_version();
  return s.str();
}

}  // namespace kbqp
