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

#include "ptf/tensor_io.hpp"

#include <fstream>
#include <sstream>

#include "ptf/error.hpp"

namespace ptf {

void WriteTensor(std::ostream& out, const SparseCountTensor& t) {
  for (std::size_t m = 0; m < t.order(); ++m) {
    if (m) out << ' ';
    out << t.shape()[m];
  }
  out << '\n';
  for (std::size_t e = 0; e < t.nnz(); ++e) {
    for (Index i : t.coord(e)) out << i << ' ';
    out << t.count(e) << '\n';
  }
}

SparseCountTensor ReadTensor(std::istream& in, ModeLabels labels) {
  std::string line;
  std::size_t line_no = 0;
  Shape shape;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream head(line);
    if (line.find('-') != std::string::npos) {
      throw DataError("tensor file line " + std::to_string(line_no) +
                      ": negative mode size");
    }
    std::size_t s;
    while (head >> s) shape.push_back(s);
    if (!head.eof() || shape.empty()) {
      throw DataError("tensor file line " + std::to_string(line_no) +
                      ": malformed shape line");
    }
    break;
  }
  if (shape.empty()) throw DataError("tensor file is empty");
  std::vector<Index> coords;
  std::vector<Count> counts;
  std::vector<unsigned long long> fields;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    // Unsigned extraction would silently wrap a leading minus sign.
    if (line.find('-') != std::string::npos) {
      throw DataError("tensor file line " + std::to_string(line_no) +
                      ": negative value");
    }
    std::istringstream row(line);
    fields.clear();
    unsigned long long v;
    while (row >> v) fields.push_back(v);
    if (!row.eof() || fields.size() != shape.size() + 1) {
      throw DataError("tensor file line " + std::to_string(line_no) +
                      ": expected " + std::to_string(shape.size()) +
                      " indices and a count");
    }
    for (std::size_t m = 0; m < shape.size(); ++m) {
      if (fields[m] >= shape[m]) {
        throw DataError("tensor file line " + std::to_string(line_no) +
                        ": index out of range in mode " + std::to_string(m));
      }
      coords.push_back(static_cast<Index>(fields[m]));
    }
    counts.push_back(fields.back());
  }
  return SparseCountTensor::FromSummedEntries(
      std::move(shape), std::move(coords), std::move(counts),
      std::move(labels));
}

void WriteLabels(std::ostream& out, const ModeLabels& labels) {
  for (std::size_t m = 0; m < labels.size(); ++m) {
    for (std::size_t i = 0; i < labels[m].size(); ++i) {
      out << m << '\t' << i << '\t' << labels[m][i] << '\n';
    }
  }
}

ModeLabels ReadLabels(std::istream& in, const Shape& shape) {
  ModeLabels labels(shape.size());
  std::vector<std::vector<bool>> seen(shape.size());
  for (std::size_t m = 0; m < shape.size(); ++m) {
    labels[m].resize(shape[m]);
    seen[m].assign(shape[m], false);
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    std::size_t mode = 0, index = 0;
    try {
      if (t2 == std::string::npos) throw std::invalid_argument("fields");
      mode = std::stoul(line.substr(0, t1));
      index = std::stoul(line.substr(t1 + 1, t2 - t1 - 1));
    } catch (const std::exception&) {
      throw DataError("labels file line " + std::to_string(line_no) +
                      ": expected mode<TAB>index<TAB>label");
    }
    if (mode >= shape.size() || index >= shape[mode]) {
      throw DataError("labels file line " + std::to_string(line_no) +
                      ": mode/index outside the tensor shape");
    }
    labels[mode][index] = line.substr(t2 + 1);
    seen[mode][index] = true;
  }
  for (std::size_t m = 0; m < shape.size(); ++m) {
    for (std::size_t i = 0; i < shape[m]; ++i) {
      if (!seen[m][i]) {
        throw DataError("labels file has no label for mode " +
                        std::to_string(m) + " index " + std::to_string(i));
      }
    }
  }
  return labels;
}

void WriteTensorFile(const std::string& path, const SparseCountTensor& t) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  WriteTensor(out, t);
}

void WriteLabelsFile(const std::string& path, const ModeLabels& labels) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  WriteLabels(out, labels);
}

SparseCountTensor ReadTensorFile(const std::string& path,
                                 const std::string& labels_path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open tensor file " + path);
  SparseCountTensor unlabeled = ReadTensor(in);
  if (labels_path.empty()) return unlabeled;
  std::ifstream lin(labels_path);
  if (!lin) throw DataError("cannot open labels file " + labels_path);
  ModeLabels labels = ReadLabels(lin, unlabeled.shape());
  std::vector<Index> coords(unlabeled.coords().begin(),
                            unlabeled.coords().end());
  std::vector<Count> counts(unlabeled.counts().begin(),
                            unlabeled.counts().end());
  return SparseCountTensor(unlabeled.shape(), std::move(coords),
                           std::move(counts), std::move(labels));
}

}  // namespace ptf
