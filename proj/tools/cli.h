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

#ifndef MEMPLAN_TOOLS_CLI_H_
#define MEMPLAN_TOOLS_CLI_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace memplan::cli {

// Parses "64M", "1.5G", "4096" (binary units).
int64_t parse_bytes(std::string_view text);
// Comma-separated byte list; must be strictly decreasing.
std::vector<int64_t> parse_limit_list(std::string_view text);

// Runs the tool; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

}  // namespace memplan::cli

#endif  // MEMPLAN_TOOLS_CLI_H_
