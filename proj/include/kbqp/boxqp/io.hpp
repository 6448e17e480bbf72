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

#include "kbqp/boxqp/problem.hpp"
#include "kbqp/common/matrix_io.hpp"

namespace kbqp {

/// Sections: "format" = "boxqp", "h", and either "H" (dense) or
/// "rho", "F", "M11", "wx", "bare_schur" (structured). Both forms are written
/// when the problem carries both.
MatrixFile boxqp_to_file(const BoxQpProblem& problem);
BoxQpProblem boxqp_from_file(const MatrixFile& file);

void save_boxqp(const std::filesystem::path& path, const BoxQpProblem& problem);
BoxQpProblem load_boxqp(const std::filesystem::path& path);

}  // namespace kbqp
