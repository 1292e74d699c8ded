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

#include "ptf/events.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>

#include "ptf/error.hpp"

namespace ptf {
namespace {

using std::chrono::sys_days;

bool ParseInt(std::string_view s, int& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool AllDigits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return c >= '0' && c <= '9';
  });
}

bool ValidClock(std::string_view t) {
  // hh:mm[:ss[.fff]] then optional Z or (+|-)hh:mm
  std::size_t zone = t.find_first_of("Z+-");
  std::string_view clock = t.substr(0, zone);
  if (zone != std::string_view::npos) {
    std::string_view tz = t.substr(zone);
    if (tz != "Z") {
      if (tz.size() != 6 || tz[3] != ':' || !AllDigits(tz.substr(1, 2)) ||
          !AllDigits(tz.substr(4, 2))) {
        return false;
      }
    }
  }
  std::string_view frac;
  if (auto dot = std::find(clock.begin(), clock.end(), '.');
      dot != clock.end()) {
    const auto pos = static_cast<std::size_t>(dot - clock.begin());
    frac = clock.substr(pos + 1);
    clock = clock.substr(0, pos);
    if (!AllDigits(frac)) return false;
  }
  int hh = 0, mm = 0, ss = 0;
  if (clock.size() == 5 && clock[2] == ':') {
    if (!ParseInt(clock.substr(0, 2), hh) || !ParseInt(clock.substr(3, 2), mm))
      return false;
  } else if (clock.size() == 8 && clock[2] == ':' && clock[5] == ':') {
    if (!ParseInt(clock.substr(0, 2), hh) ||
        !ParseInt(clock.substr(3, 2), mm) || !ParseInt(clock.substr(6, 2), ss))
      return false;
  } else {
    return false;
  }
  return hh < 24 && mm < 60 && ss <= 60;
}

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> SplitLine(std::string_view line, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    out.push_back(Trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

int MonthIndex(sys_days day) {
  const std::chrono::year_month_day ymd{day};
  return static_cast<int>(ymd.year()) * 12 +
         static_cast<int>(static_cast<unsigned>(ymd.month())) - 1;
}

}  // namespace

std::optional<sys_days> ParseDate(std::string_view text) {
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!AllDigits(text.substr(0, 4)) || !AllDigits(text.substr(5, 2)) ||
      !AllDigits(text.substr(8, 2)) || !ParseInt(text.substr(0, 4), y) ||
      !ParseInt(text.substr(5, 2), m) || !ParseInt(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year(y),
                                        std::chrono::month(m),
                                        std::chrono::day(d)};
  if (!ymd.ok()) return std::nullopt;
  if (text.size() > 10) {
    if (text[10] != 'T' && text[10] != ' ') return std::nullopt;
    if (!ValidClock(text.substr(11))) return std::nullopt;
  }
  return sys_days{ymd};
}

std::string FormatDate(sys_days day) {
  const std::chrono::year_month_day ymd{day};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u",
                static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

std::optional<BinWidth> ParseBinWidth(std::string_view text) {
  if (text == "day") return BinWidth::kDay;
  if (text == "week") return BinWidth::kWeek;
  if (text == "month") return BinWidth::kMonth;
  return std::nullopt;
}

std::string_view ToString(BinWidth width) {
  switch (width) {
    case BinWidth::kDay:
      return "day";
    case BinWidth::kWeek:
      return "week";
    case BinWidth::kMonth:
      return "month";
  }
  return "?";
}

std::size_t StepOf(sys_days day, const DateRange& range, BinWidth width) {
  const auto days = (day - range.first).count();
  switch (width) {
    case BinWidth::kDay:
      return static_cast<std::size_t>(days);
    case BinWidth::kWeek:
      return static_cast<std::size_t>(days / 7);
    case BinWidth::kMonth:
      return static_cast<std::size_t>(MonthIndex(day) -
                                      MonthIndex(range.first));
  }
  return 0;
}

std::size_t StepCount(const DateRange& range, BinWidth width) {
  if (range.last < range.first) throw ConfigError("date range is empty");
  return StepOf(range.last, range, width) + 1;
}

std::vector<std::string> StepLabels(const DateRange& range, BinWidth width) {
  const std::size_t steps = StepCount(range, width);
  std::vector<std::string> labels;
  labels.reserve(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    switch (width) {
      case BinWidth::kDay:
        labels.push_back(FormatDate(range.first + std::chrono::days(s)));
        break;
      case BinWidth::kWeek:
        labels.push_back(FormatDate(range.first + std::chrono::days(7 * s)));
        break;
      case BinWidth::kMonth: {
        const int idx = MonthIndex(range.first) + static_cast<int>(s);
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02d", idx / 12, idx % 12 + 1);
        labels.emplace_back(buf);
        break;
      }
    }
  }
  return labels;
}

SparseCountTensor IngestEvents(std::span<const EventRecord> records,
                               const IngestOptions& options) {
  if (records.empty()) throw ConfigError("no event records supplied");
  const std::size_t steps = StepCount(options.range, options.bin_width);

  struct Kept {
    const EventRecord* rec;
    std::size_t step;
  };
  std::vector<Kept> kept;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const EventRecord& rec = records[r];
    if (rec.sender.empty() || rec.receiver.empty() || rec.action.empty() ||
        rec.timestamp.empty()) {
      throw IngestError(r, rec.source_line, "empty field");
    }
    const auto day = ParseDate(rec.timestamp);
    if (!day) {
      throw IngestError(r, rec.source_line, "unparseable timestamp '" + rec.timestamp + "'");
    }
    if (*day < options.range.first || *day > options.range.last) continue;
    if (options.drop_self_actions && rec.sender == rec.receiver) continue;
    kept.push_back({&rec, StepOf(*day, options.range, options.bin_width)});
  }
  if (kept.empty()) {
    throw EmptyTensorError("no events remain after date and self-action "
                           "filtering");
  }

  std::map<std::string, Index> actors, actions;
  for (const Kept& k : kept) {
    actors.emplace(k.rec->sender, 0);
    actors.emplace(k.rec->receiver, 0);
    actions.emplace(k.rec->action, 0);
  }
  ModeLabels labels(4);
  for (auto* dict : {&actors, &actions}) {
    Index next = 0;
    for (auto& [name, id] : *dict) id = next++;
  }
  for (const auto& [name, id] : actors) labels[0].push_back(name);
  for (const auto& [name, id] : actions) labels[2].push_back(name);
  labels[1] = labels[0];
  labels[3] = StepLabels(options.range, options.bin_width);

  std::vector<Index> coords;
  coords.reserve(kept.size() * 4);
  for (const Kept& k : kept) {
    coords.push_back(actors.at(k.rec->sender));
    coords.push_back(actors.at(k.rec->receiver));
    coords.push_back(actions.at(k.rec->action));
    coords.push_back(static_cast<Index>(k.step));
  }
  std::vector<Count> ones(kept.size(), 1);
  Shape shape = {actors.size(), actors.size(), actions.size(), steps};
  return SparseCountTensor::FromSummedEntries(std::move(shape),
                                              std::move(coords),
                                              std::move(ones),
                                              std::move(labels));
}

std::vector<EventRecord> ReadEvents(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!Trim(line).empty()) break;
  }
  if (Trim(line).empty()) throw DataError("event file has no header row");
  const char delim = line.find('\t') != std::string::npos ? '\t' : ',';
  const auto header = SplitLine(line, delim);
  std::array<std::size_t, 4> col{};
  const std::array<std::string_view, 4> names = {"sender", "receiver",
                                                 "action", "timestamp"};
  for (std::size_t n = 0; n < names.size(); ++n) {
    auto it = std::find(header.begin(), header.end(), names[n]);
    if (it == header.end()) {
      throw DataError("event header lacks a '" + std::string(names[n]) +
                      "' column");
    }
    col[n] = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<EventRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const auto fields = SplitLine(line, delim);
    if (fields.size() != header.size()) {
      throw IngestError(records.size(), line_no, "expected " + std::to_string(header.size()) +
                                     " fields, found " +
                                     std::to_string(fields.size()));
    }
    records.push_back({fields[col[0]], fields[col[1]], fields[col[2]],
                       fields[col[3]], line_no});
  }
  return records;
}

std::vector<EventRecord> ReadEventFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open event file " + path);
  return ReadEvents(in);
}

}  // namespace ptf
