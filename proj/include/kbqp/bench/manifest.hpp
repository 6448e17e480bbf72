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

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace kbqp {

/// Key/value header written as '#' comment lines at the top of every CSV.
/// The config hash covers every entry except the hash itself.
class Manifest {
 public:
  explicit Manifest(std::string experiment);

  Manifest& add(const std::string& key, const std::string& value);
  Manifest& add(const std::string& key, double value);
  Manifest& add(const std::string& key, long long value);

  std::string config_hash() const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  void write(std::ostream& out) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Library versions baked in at build time.
std::string build_versions();

}  // namespace kbqp
