// Copyright 2026 The MAS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MAS_CLI_H_
#define MAS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace mas::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitDataError = 2;
inline constexpr int kExitPartial = 3;

// Runs the `mas` command line. args[0] is the program name. Results go to
// `out`; diagnostics are a single line on `err`.
int run(const std::vector<std::string> &args, std::ostream &out,
        std::ostream &err);

}  // namespace mas::cli

#endif  // MAS_CLI_H_
