/*
 * Copyright 2026 The LEMoN Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LEMON_CLI_H_
#define LEMON_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace lemon::cli {

enum ExitStatus : int {
  kSuccess = 0,
  kValidationError = 1,
  kUsageError = 2,
  kInternalError = 3,
};

// Entry point behind the `lemon` executable. Any non-zero status writes one
// line starting with "ERROR:" to `err`.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace lemon::cli

#endif  // LEMON_CLI_H_
