/* Copyright 2026 The memplan Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "memplan/trace.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>
#include "memplan/error.h"

namespace memplan {
namespace {

constexpr std::string_view kCsvHeader = "index,t_us,kind,var,size";
constexpr std::string_view kMetaPrefix = "#meta ";

bool parse_int(std::string_view text, int64_t* out) {
  if (text.empty()) return false;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, *out);
  return ec == std::errc() && ptr == end;
}

bool needs_csv_quotes(std::string_view s) {
  if (s.empty()) return true;
  if (s.front() == ' ' || s.back() == ' ') return true;
  return s.find_first_of(",\"\r\n#") != std::string_view::npos;
}

std::string csv_field(std::string_view s) {
  if (!needs_csv_quotes(s)) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// Splits one CSV record; quoted fields may contain commas and doubled quotes.
bool split_csv(std::string_view line, std::vector<std::string>* fields) {
  fields->clear();
  std::string cur;
  size_t i = 0;
  while (true) {
    cur.clear();
    if (i < line.size() && line[i] == '"') {
      ++i;
      while (true) {
        if (i >= line.size()) return false;
        if (line[i] == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            cur += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        cur += line[i++];
      }
      if (i < line.size() && line[i] != ',') return false;
    } else {
      while (i < line.size() && line[i] != ',') {
        if (line[i] == '"') return false;
        cur += line[i++];
      }
    }
    fields->push_back(cur);
    if (i >= line.size()) break;
    ++i;  // comma
  }
  return true;
}

void parse_meta_line(std::string_view line, int64_t line_no, Trace* trace) {
  std::string_view body = line.substr(kMetaPrefix.size());
  size_t eq = body.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw MalformedRecord(line_no, "meta line must be '#meta key=value'");
  }
  trace->meta[std::string(body.substr(0, eq))] =
      std::string(body.substr(eq + 1));
}

TraceEvent parse_jsonl_record(std::string_view line, int64_t line_no) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedRecord(line_no, e.what());
  }
  if (!obj.is_object() || obj.size() != 5) {
    throw MalformedRecord(
        line_no, "expected an object with keys index,t_us,kind,var,size");
  }
  TraceEvent ev;
  auto require_int = [&](const char* key) -> int64_t {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_number_integer()) {
      throw MalformedRecord(line_no,
                            std::string("missing integer field '") + key + "'");
    }
    return it->get<int64_t>();
  };
  auto require_str = [&](const char* key) -> std::string {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) {
      throw MalformedRecord(line_no,
                            std::string("missing string field '") + key + "'");
    }
    return it->get<std::string>();
  };
  ev.index = require_int("index");
  ev.t_us = require_int("t_us");
  std::string kind = require_str("kind");
  auto parsed = parse_op_kind(kind);
  if (!parsed) throw MalformedRecord(line_no, "unknown kind '" + kind + "'");
  ev.kind = *parsed;
  ev.var = require_str("var");
  ev.size = require_int("size");
  return ev;
}

TraceEvent parse_csv_record(std::string_view line, int64_t line_no) {
  std::vector<std::string> fields;
  if (!split_csv(line, &fields) || fields.size() != 5) {
    throw MalformedRecord(line_no, "expected 5 comma-separated fields");
  }
  TraceEvent ev;
  if (!parse_int(fields[0], &ev.index)) {
    throw MalformedRecord(line_no, "bad index '" + fields[0] + "'");
  }
  if (!parse_int(fields[1], &ev.t_us)) {
    throw MalformedRecord(line_no, "bad t_us '" + fields[1] + "'");
  }
  auto kind = parse_op_kind(fields[2]);
  if (!kind) throw MalformedRecord(line_no, "unknown kind '" + fields[2] + "'");
  ev.kind = *kind;
  ev.var = fields[3];
  if (!parse_int(fields[4], &ev.size)) {
    throw MalformedRecord(line_no, "bad size '" + fields[4] + "'");
  }
  return ev;
}

}  // namespace

std::string_view op_kind_name(OpKind kind) {
  switch (kind) {
    case OpKind::kMalloc:
      return "malloc";
    case OpKind::kFree:
      return "free";
    case OpKind::kRead:
      return "read";
    case OpKind::kWrite:
      return "write";
  }
  return "?";
}

std::optional<OpKind> parse_op_kind(std::string_view name) {
  if (name == "malloc") return OpKind::kMalloc;
  if (name == "free") return OpKind::kFree;
  if (name == "read") return OpKind::kRead;
  if (name == "write") return OpKind::kWrite;
  return std::nullopt;
}

std::optional<TraceFormat> trace_format_for_path(std::string_view path) {
  auto ends_with = [&](std::string_view suffix) {
    if (path.size() < suffix.size()) return false;
    const std::string_view tail = path.substr(path.size() - suffix.size());
    return std::equal(tail.begin(), tail.end(), suffix.begin(), [](char a, char b) {
      return std::tolower(static_cast<unsigned char>(a)) == b;
    });
  };
  if (ends_with(".jsonl") || ends_with(".json")) return TraceFormat::kJsonl;
  if (ends_with(".csv")) return TraceFormat::kCsv;
  return std::nullopt;
}

Trace parse_trace(std::istream& in, TraceFormat format) {
  Trace trace;
  std::string line;
  int64_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind(kMetaPrefix, 0) == 0) {
      if (header_seen || !trace.events.empty()) {
        throw MalformedRecord(line_no, "meta lines must precede all records");
      }
      parse_meta_line(line, line_no, &trace);
      continue;
    }
    if (format == TraceFormat::kCsv && !header_seen) {
      if (line != kCsvHeader) {
        throw MalformedRecord(line_no, "expected header '" +
                                           std::string(kCsvHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    trace.events.push_back(format == TraceFormat::kJsonl
                               ? parse_jsonl_record(line, line_no)
                               : parse_csv_record(line, line_no));
  }
  if (format == TraceFormat::kCsv && !header_seen) {
    throw MalformedRecord(line_no + 1, "missing CSV header");
  }
  validate_trace(trace);
  return trace;
}

Trace parse_trace_text(std::string_view text, TraceFormat format) {
  std::istringstream in{std::string(text)};
  return parse_trace(in, format);
}

void serialize_trace(const Trace& trace, TraceFormat format, std::ostream& out) {
  for (const auto& [key, value] : trace.meta) {
    out << kMetaPrefix << key << '=' << value << '\n';
  }
  if (format == TraceFormat::kCsv) out << kCsvHeader << '\n';
  for (const TraceEvent& ev : trace.events) {
    if (format == TraceFormat::kJsonl) {
      out << "{\"index\":" << ev.index << ",\"t_us\":" << ev.t_us
          << ",\"kind\":\"" << op_kind_name(ev.kind)
          << "\",\"var\":" << nlohmann::json(ev.var).dump()
          << ",\"size\":" << ev.size << "}\n";
    } else {
      out << ev.index << ',' << ev.t_us << ',' << op_kind_name(ev.kind) << ','
          << csv_field(ev.var) << ',' << ev.size << '\n';
    }
  }
}

std::string serialize_trace_text(const Trace& trace, TraceFormat format) {
  std::ostringstream out;
  serialize_trace(trace, format, out);
  return out.str();
}

void validate_trace(const Trace& trace) {
  for (const auto& [key, value] : trace.meta) {
    if (key.empty() || key.find_first_of("=\n\r") != std::string::npos ||
        value.find_first_of("\n\r") != std::string::npos) {
      throw InvariantViolation(0, "meta entries must be single-line key=value");
    }
  }
  std::unordered_set<std::string> live;
  int64_t prev_t = 0;
  for (size_t i = 0; i < trace.events.size(); ++i) {
    const TraceEvent& ev = trace.events[i];
    const auto idx = static_cast<int64_t>(i);
    if (ev.index != idx) {
      throw InvariantViolation(idx, "expected index " + std::to_string(idx) +
                                        ", found " + std::to_string(ev.index));
    }
    if (ev.t_us < 0 || (i > 0 && ev.t_us < prev_t)) {
      throw InvariantViolation(idx, "timestamps must be non-decreasing");
    }
    prev_t = ev.t_us;
    if (ev.var.empty()) throw InvariantViolation(idx, "empty var id");
    for (char c : ev.var) {
      if (static_cast<unsigned char>(c) < 0x20) {
        throw InvariantViolation(idx, "control character in var id");
      }
    }
    if (ev.kind == OpKind::kMalloc) {
      if (ev.size <= 0) {
        throw InvariantViolation(idx, "malloc of '" + ev.var +
                                          "' must have a positive size");
      }
      if (!live.insert(ev.var).second) {
        throw InvariantViolation(idx, "malloc of live variable '" + ev.var + "'");
      }
      continue;
    }
    if (ev.size != 0) {
      throw InvariantViolation(idx, std::string(op_kind_name(ev.kind)) +
                                        " must carry size 0");
    }
    auto it = live.find(ev.var);
    if (it == live.end()) {
      throw InvariantViolation(idx, std::string(op_kind_name(ev.kind)) +
                                        " of '" + ev.var +
                                        "' which is not allocated");
    }
    if (ev.kind == OpKind::kFree) live.erase(it);
  }
}

}  // namespace memplan
