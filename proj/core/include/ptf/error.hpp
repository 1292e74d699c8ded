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

#ifndef PTF_ERROR_HPP_
#define PTF_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace ptf {

// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorKind {
  kConfig,     // bad arguments, invalid configuration, violated preconditions
  kData,       // malformed input files, empty tensors, undefined statistics
  kNumerical,  // degenerate updates, non-finite objectives
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::kConfig, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what)
      : Error(ErrorKind::kData, what) {}
};

// A record in an event stream could not be parsed.
class IngestError : public DataError {
 public:
  // `line` is the 1-based source line, or 0 when the record has none.
  IngestError(std::size_t record_index, std::size_t line,
              const std::string& what);
  std::size_t record_index() const noexcept { return record_index_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t record_index_;
  std::size_t line_;
};

class EmptyTensorError : public DataError {
 public:
  explicit EmptyTensorError(const std::string& what) : DataError(what) {}
};

// A statistic (VMR, Gini, a metric) is undefined for the given input.
class UndefinedStatisticError : public DataError {
 public:
  explicit UndefinedStatisticError(const std::string& what)
      : DataError(what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::kNumerical, what) {}
};

// A multiplicative update hit a zero reconstruction at an observed count.
class InadmissibleZeroError : public NumericalError {
 public:
  explicit InadmissibleZeroError(const std::string& what)
      : NumericalError(what) {}
};

}  // namespace ptf

#endif  // PTF_ERROR_HPP_
