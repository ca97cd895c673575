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

#include "memplan/error.h"

namespace memplan {

MalformedRecord::MalformedRecord(int64_t line, const std::string& detail)
    : Error("malformed record at line " + std::to_string(line) + ": " + detail),
      line_(line) {}

InvariantViolation::InvariantViolation(int64_t index, const std::string& detail)
    : Error("invariant violation at index " + std::to_string(index) + ": " +
            detail),
      index_(index) {}

MissingVariable::MissingVariable(int64_t index, const std::string& detail)
    : Error("no planned offset for malloc at index " + std::to_string(index) +
            ": " + detail),
      index_(index) {}

LimitUnreachable::LimitUnreachable(int64_t limit, int64_t best_peak)
    : Error("memory load limit " + std::to_string(limit) +
            " is unreachable; all candidates selected leaves a peak of " +
            std::to_string(best_peak)),
      limit_(limit),
      best_peak_(best_peak) {}

Deadlock::Deadlock(int64_t op_index, const std::string& detail)
    : Error("simulation deadlocked at operation " + std::to_string(op_index) +
            ": " + detail),
      op_index_(op_index) {}

}  // namespace memplan
