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

#ifndef PTF_TENSOR_IO_HPP_
#define PTF_TENSOR_IO_HPP_

#include <istream>
#include <ostream>
#include <string>

#include "ptf/tensor_store.hpp"

namespace ptf {

// Coordinate-list text: the first line holds the mode sizes, then one line
// per stored entry with 0-based indices followed by the count, separated by
// single spaces. Entries are written in canonical (sorted) order so equal
// tensors produce byte-identical files.
void WriteTensor(std::ostream& out, const SparseCountTensor& t);
// Duplicate coordinates are summed. Labels default to decimal indices.
SparseCountTensor ReadTensor(std::istream& in, ModeLabels labels = {});

// Labels file: one "mode<TAB>index<TAB>label" line per index of every mode.
void WriteLabels(std::ostream& out, const ModeLabels& labels);
ModeLabels ReadLabels(std::istream& in, const Shape& shape);

void WriteTensorFile(const std::string& path, const SparseCountTensor& t);
void WriteLabelsFile(const std::string& path, const ModeLabels& labels);
// Reads a tensor and, when `labels_path` is non-empty, its labels file.
SparseCountTensor ReadTensorFile(const std::string& path,
                                 const std::string& labels_path = "");

}  // namespace ptf

#endif  // PTF_TENSOR_IO_HPP_
