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

#ifndef PTF_EVENTS_HPP_
#define PTF_EVENTS_HPP_

#include <chrono>
#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ptf/tensor_store.hpp"

namespace ptf {

// "sender took action toward receiver at timestamp"
struct EventRecord {
  std::string sender;
  std::string receiver;
  std::string action;
  std::string timestamp;  // ISO-8601 date or date-time
  std::size_t source_line = 0;  // 1-based line in the source file, 0 if none
};

enum class BinWidth { kDay, kWeek, kMonth };

struct DateRange {
  std::chrono::sys_days first;
  std::chrono::sys_days last;  // inclusive
};

struct IngestOptions {
  BinWidth bin_width = BinWidth::kMonth;
  DateRange range;
  bool drop_self_actions = true;
};

// Accepts YYYY-MM-DD optionally followed by 'T' or ' ' and hh:mm[:ss[.fff]]
// with an optional 'Z' or +hh:mm offset. The offset is ignored: timestamps
// are binned by their calendar date as written.
std::optional<std::chrono::sys_days> ParseDate(std::string_view text);
std::string FormatDate(std::chrono::sys_days day);

std::optional<BinWidth> ParseBinWidth(std::string_view text);
std::string_view ToString(BinWidth width);

// Number of time steps covering `range`. Bins are anchored at range.first;
// months are calendar months counted from the month containing range.first.
std::size_t StepCount(const DateRange& range, BinWidth width);
std::size_t StepOf(std::chrono::sys_days day, const DateRange& range,
                   BinWidth width);
std::vector<std::string> StepLabels(const DateRange& range, BinWidth width);

// Builds the sender x receiver x action x time count tensor. Actors are the
// union of senders and receivers of the retained records, sorted; actions
// are sorted. Throws IngestError naming the offending record and
// EmptyTensorError when filtering leaves nothing.
SparseCountTensor IngestEvents(std::span<const EventRecord> records,
                               const IngestOptions& options);

// Reads delimited text with a header row naming the columns sender,
// receiver, action and timestamp (any order). The delimiter is a tab when
// the header contains one, otherwise a comma.
std::vector<EventRecord> ReadEvents(std::istream& in);
std::vector<EventRecord> ReadEventFile(const std::string& path);

}  // namespace ptf

#endif  // PTF_EVENTS_HPP_
