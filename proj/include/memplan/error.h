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

#ifndef MEMPLAN_ERROR_H_
#define MEMPLAN_ERROR_H_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace memplan {

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A trace record could not be parsed. `line()` is 1-based.
class MalformedRecord : public Error {
 public:
  MalformedRecord(int64_t line, const std::string& detail);
  int64_t line() const { return line_; }

 private:
  int64_t line_;
};

// A trace violates the event model (index gap, double free, use after free).
class InvariantViolation : public Error {
 public:
  InvariantViolation(int64_t index, const std::string& detail);
  int64_t index() const { return index_; }

 private:
  int64_t index_;
};

class InvalidSpec : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

class TooLarge : public Error {
 public:
  using Error::Error;
};

class MissingVariable : public Error {
 public:
  MissingVariable(int64_t index, const std::string& detail);
  int64_t index() const { return index_; }

 private:
  int64_t index_;
};

// Every candidate was selected and the peak is still above the limit.
class LimitUnreachable : public Error {
 public:
  LimitUnreachable(int64_t limit, int64_t best_peak);
  int64_t limit() const { return limit_; }
  int64_t best_peak() const { return best_peak_; }

 private:
  int64_t limit_;
  int64_t best_peak_;
};

// The limit-enforcing simulation cannot make progress.
class Deadlock : public Error {
 public:
  Deadlock(int64_t op_index, const std::string& detail);
  int64_t op_index() const { return op_index_; }

 private:
  int64_t op_index_;
};

}  // namespace memplan

#endif  // MEMPLAN_ERROR_H_
