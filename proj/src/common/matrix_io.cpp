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

#include "kbqp/common/matrix_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace kbqp {
namespace {

constexpr std::array<char, 8> kMagic = {'K', 'B', 'Q', 'P', 'M', 'A', 'T', '1'};
constexpr std::uint8_t kKindMatrix = 0;
constexpr std::uint8_t kKindText = 1;
// Guards against corrupt headers requesting absurd allocations.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 34;

void put_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (!in) throw std::runtime_error("matrix file: truncated integer");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

void put_f64(std::ostream& out, double x) { put_u64(out, std::bit_cast<std::uint64_t>(x)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

std::string get_bytes(std::istream& in, std::uint64_t len) {
  if (len > kMaxElements) throw std::runtime_error("matrix file: section too large");
  std::string s(len, '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  if (!in) throw std::runtime_error("matrix file: truncated payload");
  return s;
}

}  // namespace

MatrixFile::Section* MatrixFile::find(const std::string& name) {
  for (auto& s : sections_)
    if (s.name == name) return &s;
  return nullptr;
}

const MatrixFile::Section* MatrixFile::find(const std::string& name) const {
  for (const auto& s : sections_)
    if (s.name == name) return &s;
  return nullptr;
}

const MatrixFile::Section& MatrixFile::at(const std::string& name) const {
  const Section* s = find(name);
  if (s == nullptr) throw std::out_of_range("matrix file: no section named '" + name + "'");
  return *s;
}

void MatrixFile::set_matrix(const std::string& name, const Matrix& m) {
  if (Section* s = find(name)) {
    s->payload = m;
  } else {
    sections_.push_back({name, m});
  }
}

void MatrixFile::set_vector(const std::string& name, const Vector& v) { set_matrix(name, Matrix(v)); }

void MatrixFile::set_scalar(const std::string& name, double value) {
  set_matrix(name, Matrix::Constant(1, 1, value));
}

void MatrixFile::set_text(const std::string& name, const std::string& text) {
  if (Section* s = find(name)) {
    s->payload = text;
  } else {
    sections_.push_back({name, text});
  }
}

bool MatrixFile::has(const std::string& name) const { return find(name) != nullptr; }

const Matrix& MatrixFile::matrix(const std::string& name) const {
  const auto* m = std::get_if<Matrix>(&at(name).payload);
  if (m == nullptr) throw std::runtime_error("matrix file: section '" + name + "' is not a matrix");
  return *m;
}

Vector MatrixFile::vector(const std::string& name) const {
  const Matrix& m = matrix(name);
  if (m.cols() != 1) throw std::runtime_error("matrix file: section '" + name + "' is not a column vector");
  return m.col(0);
}

double MatrixFile::scalar(const std::string& name) const {
  const Matrix& m = matrix(name);
  if (m.size() != 1) throw std::runtime_error("matrix file: section '" + name + "' is not a scalar");
  return m(0, 0);
}

const std::string& MatrixFile::text(const std::string& name) const {
  const auto* t = std::get_if<std::string>(&at(name).payload);
  if (t == nullptr) throw std::runtime_error("matrix file: section '" + name + "' is not text");
  return *t;
}

void MatrixFile::write(std::ostream& out) const {
  out.write(kMagic.data(), kMagic.size());
  put_u64(out, sections_.size());
  for (const auto& s : sections_) {
    const bool is_matrix = std::holds_alternative<Matrix>(s.payload);
    const char kind = static_cast<char>(is_matrix ? kKindMatrix : kKindText);
    out.write(&kind, 1);
    put_u64(out, s.name.size());
    out.write(s.name.data(), static_cast<std::streamsize>(s.name.size()));
    if (is_matrix) {
      const Matrix& m = std::get<Matrix>(s.payload);
      put_u64(out, static_cast<std::uint64_t>(m.rows()));
      put_u64(out, static_cast<std::uint64_t>(m.cols()));
      for (Index r = 0; r < m.rows(); ++r)
        for (Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
    } else {
      const std::string& t = std::get<std::string>(s.payload);
      put_u64(out, t.size());
      out.write(t.data(), static_cast<std::streamsize>(t.size()));
    }
  }
  if (!out) throw std::runtime_error("matrix file: write failed");
}

MatrixFile MatrixFile::read(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw std::runtime_error("matrix file: bad magic");
  MatrixFile file;
  const std::uint64_t count = get_u64(in);
  for (std::uint64_t i = 0; i < count; ++i) {
    char kind = 0;
    in.read(&kind, 1);
    if (!in) throw std::runtime_error("matrix file: truncated section header");
    std::string name = get_bytes(in, get_u64(in));
    if (kind == static_cast<char>(kKindMatrix)) {
      const std::uint64_t rows = get_u64(in);
      const std::uint64_t cols = get_u64(in);
      if (cols != 0 && rows > kMaxElements / cols) throw std::runtime_error("matrix file: section too large");
      Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
      for (Index r = 0; r < m.rows(); ++r)
        for (Index c = 0; c < m.cols(); ++c) m(r, c) = get_f64(in);
      file.sections_.push_back({std::move(name), std::move(m)});
    } else if (kind == static_cast<char>(kKindText)) {
      file.sections_.push_back({std::move(name), get_bytes(in, get_u64(in))});
    } else {
      throw std::runtime_error("matrix file: unknown section kind");
    }
  }
  return file;
}

void MatrixFile::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write(out);
}

MatrixFile MatrixFile::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read(in);
}

}  // namespace kbqp
