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

#include "kbqp/boxqp/io.hpp"

namespace kbqp {

MatrixFile boxqp_to_file(const BoxQpProblem& problem) {
  MatrixFile file;
  file.set_text("format", "boxqp");
  file.set_vector("h", problem.linear());
  if (problem.has_dense()) file.set_matrix("H", problem.dense_hessian());
  if (problem.has_structured()) {
    const StructuredHessian& sh = problem.structured_hessian();
    file.set_scalar("rho", sh.rho());
    file.set_matrix("F", sh.F());
    file.set_matrix("M11", sh.M11());
    file.set_vector("wx", sh.wx_diag());
    file.set_matrix("bare_schur", sh.bare_schur());
  }
  return file;
}

BoxQpProblem boxqp_from_file(const MatrixFile& file) {
  if (!file.has("format") || file.text("format") != "boxqp") throw std::runtime_error("not a boxqp problem file");
  Vector h = file.vector("h");
  if (file.has("F")) {
    StructuredHessian sh(file.scalar("rho"), file.matrix("F"), file.matrix("M11"), file.vector("wx"),
                         file.matrix("bare_schur"));
    return BoxQpProblem::from_structured(std::move(sh), std::move(h), file.has("H"));
  }
  return BoxQpProblem::from_dense(file.matrix("H"), std::move(h));
}

void save_boxqp(const std::filesystem::path& path, const BoxQpProblem& problem) { boxqp_to_file(problem).save(path); }

BoxQpProblem load_boxqp(const std::filesystem::path& path) { return boxqp_from_file(MatrixFile::load(path)); }

}  // namespace kbqp
