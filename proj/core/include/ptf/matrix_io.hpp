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

#ifndef PTF_MATRIX_IO_HPP_
#define PTF_MATRIX_IO_HPP_

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ptf/matrix.hpp"

namespace ptf {

// Tab-delimited rows, 17 significant digits, so values round-trip exactly.
void WriteMatrix(std::ostream& out, const Matrix& m);
Matrix ReadMatrix(std::istream& in);
void WriteMatrixFile(const std::string& path, const Matrix& m);
Matrix ReadMatrixFile(const std::string& path);

// Ordered flat "key=value" document. Blank lines and lines starting with
// '#' are ignored when parsing.
class KeyValueDoc {
 public:
  static KeyValueDoc Parse(std::istream& in);
  static KeyValueDoc ParseFile(const std::string& path);

  void Set(const std::string& key, std::string value);
  std::optional<std::string> Get(const std::string& key) const;
  // Throws DataError when absent.
  const std::string& Require(const std::string& key) const;
  bool Has(const std::string& key) const { return Get(key).has_value(); }

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

  void Write(std::ostream& out) const;
  void WriteFile(const std::string& path) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// Space-separated lists used inside manifest values.
std::string JoinSizes(const std::vector<std::size_t>& values);
std::vector<std::size_t> SplitSizes(const std::string& text);
std::string JoinDoubles(const std::vector<double>& values);
std::vector<double> SplitDoubles(const std::string& text);
std::string FormatDouble(double v);  // %.17g

}  // namespace ptf

#endif  // PTF_MATRIX_IO_HPP_
