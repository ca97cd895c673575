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

#ifndef MEMPLAN_REPORT_H_
#define MEMPLAN_REPORT_H_

#include <json.hpp>
#include <span>
#include <string>

#include "memplan/autoswap.h"
#include "memplan/iteration.h"
#include "memplan/pipeline.h"
#include "memplan/smartpool.h"
#include "memplan/swapsim.h"

namespace memplan {

nlohmann::json to_json(const IterationProfile& profile);
nlohmann::json to_json(const PoolPlan& plan);
nlohmann::json to_json(const SimulationResult& result);
nlohmann::json selection_json(int64_t limit_bytes,
                              std::span<const SwapCandidate> selected,
                              int64_t achieved_peak);

// "index,t_us,bytes"
std::string load_csv(const LoadProfile& load);
// "var,t_so,t_eo,t_si,t_ei"
std::string schedule_csv(std::span<const SwapEvent> schedule);

}  // namespace memplan

#endif  // MEMPLAN_REPORT_H_
