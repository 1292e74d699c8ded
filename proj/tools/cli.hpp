// Copyright 2026 The ptf Authors. All Rights Reserved.
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

#ifndef PTF_TOOLS_CLI_HPP_
#define PTF_TOOLS_CLI_HPP_

#include <ostream>

namespace ptf::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kDataFailure = 2;
inline constexpr int kNumericalFailure = 3;

// Entry point of the ptf command-line tool. Settings resolve in increasing
// precedence: built-in defaults, then the --config file, then flags.
int Run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

}  // namespace ptf::cli

#endif  // PTF_TOOLS_CLI_HPP_
