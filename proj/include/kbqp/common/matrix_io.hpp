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

// Named-section matrix container shared by every file format in the project.
//
// Layout (all integers unsigned 64-bit little-endian):
//
//   magic        8 bytes  "KBQPMAT1"
//   count        u64      number of sections
//   per section:
//     kind       u8       0 = dense float64 matrix, 1 = UTF-8 text
//     name_len   u64, followed by name_len bytes of name
//     kind 0:    rows u64, cols u64, rows*cols IEEE-754 binary64 values,
//                little-endian, row-major
//     kind 1:    byte_len u64, followed by byte_len bytes
//
// Vectors are stored as rows x 1 matrices. Reading and writing is bit-exact.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "kbqp/common/types.hpp"

namespace kbqp {

class MatrixFile {
 public:
  struct Section {
    std::string name;
    std::variant<Matrix, std::string> payload;
  };

  void set_matrix(const std::string& name, const Matrix& m);
  void set_vector(const std::string& name, const Vector& v);
  void set_scalar(const std::string& name, double value);
  void set_text(const std::string& name, const std::string& text);

  bool has(const std::string& name) const;
  const Matrix& matrix(const std::string& name) const;
  Vector vector(const std::string& name) const;
  double scalar(const std::string& name) const;
  const std::string& text(const std::string& name) const;

  const std::vector<Section>& sections() const { return sections_; }

  void write(std::ostream& out) const;
  static MatrixFile read(std::istream& in);

  void save(const std::filesystem::path& path) const;
  static MatrixFile load(const std::filesystem::path& path);

 private:
  Section* find(const std::string& name);
  const Section* find(const std::string& name) const;
  const Section& at(const std::string& name) const;

  std::vector<Section> sections_;
};

}  // namespace kbqp
