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

#include "ptf/matrix_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ptf/error.hpp"

namespace ptf {
namespace {

// strtod rather than stod: subnormal values must parse, not throw.
bool ParseDouble(const std::string& tok, double& out) {
  if (tok.empty()) return false;
  char* end = nullptr;
  out = std::strtod(tok.c_str(), &end);
  return end == tok.c_str() + tok.size();
}

}  // namespace

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void WriteMatrix(std::ostream& out, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << '\t';
      out << FormatDouble(m(r, c));
    }
    out << '\n';
  }
}

Matrix ReadMatrix(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream fields(line);
    std::string field;
    while (fields >> field) {
      double v = 0;
      if (!ParseDouble(field, v)) {
        throw DataError("matrix row " + std::to_string(rows.size() + 1) +
                        ": bad number '" + field + "'");
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DataError("matrix row " + std::to_string(rows.size() + 1) +
                      " has a different column count");
    }
    rows.push_back(std::move(row));
  }
  const Eigen::Index cols = rows.empty() ? 0 : rows.front().size();
  Matrix m(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rows[r][c];
  }
  return m;
}

void WriteMatrixFile(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  WriteMatrix(out, m);
}

Matrix ReadMatrixFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open matrix file " + path);
  return ReadMatrix(in);
}

KeyValueDoc KeyValueDoc::Parse(std::istream& in) {
  KeyValueDoc doc;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError("line " + std::to_string(line_no) +
                      ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw DataError("line " + std::to_string(line_no) + ": empty key");
    }
    if (doc.Has(key)) {
      throw DataError("line " + std::to_string(line_no) + ": duplicate key '" +
                      key + "'");
    }
    doc.Set(key, trim(line.substr(eq + 1)));
  }
  return doc;
}

KeyValueDoc KeyValueDoc::ParseFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return Parse(in);
}

void KeyValueDoc::Set(const std::string& key, std::string value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(key, std::move(value));
}

std::optional<std::string> KeyValueDoc::Get(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

const std::string& KeyValueDoc::Require(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  throw DataError("missing key '" + key + "'");
}

void KeyValueDoc::Write(std::ostream& out) const {
  for (const auto& [k, v] : entries_) out << k << '=' << v << '\n';
}

void KeyValueDoc::WriteFile(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  Write(out);
}

std::string JoinSizes(const std::vector<std::size_t>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(values[i]);
  }
  return s;
}

std::vector<std::size_t> SplitSizes(const std::string& text) {
  std::vector<std::size_t> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(tok, &used);
      if (used != tok.size() || tok[0] == '-') throw std::invalid_argument(tok);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw DataError("bad non-negative integer '" + tok + "'");
    }
  }
  return out;
}

std::string JoinDoubles(const std::vector<double>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ' ';
    s += FormatDouble(values[i]);
  }
  return s;
}

std::vector<double> SplitDoubles(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    double v = 0;
    if (!ParseDouble(tok, v)) throw DataError("bad number '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace ptf
