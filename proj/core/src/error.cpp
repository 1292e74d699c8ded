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

#include "ptf/error.hpp"

namespace ptf {

IngestError::IngestError(std::size_t record_index, std::size_t line,
                         const std::string& what)
    : DataError((line ? "line " + std::to_string(line)
                      : "record " + std::to_string(record_index)) +
                ": " + what),
      record_index_(record_index),
      line_(line) {}

}  // namespace ptf
