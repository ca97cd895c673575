# Copyright 2026 The memplan Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ==============================================================================

"""Python access to the memplan planner.

The heavy lifting happens in the compiled ``_core`` module; the helpers here
decode its JSON results into plain dictionaries.
"""

import json

from ._core import (
    Deadlock,
    LimitUnreachable,
    MemplanError,
    Profile,
    Trace,
    analyze,
    generate_vgg,
    load_trace,
    parse_trace,
)

__all__ = [
    "Deadlock",
    "LimitUnreachable",
    "MemplanError",
    "Profile",
    "Trace",
    "analyze",
    "generate_vgg",
    "load_trace",
    "parse_trace",
    "plan_pool",
    "profile_dict",
    "swap",
]


def profile_dict(profile):
    return json.loads(profile.to_json())


def plan_pool(profile, policy="best_fit"):
    """Offsets for every variable of the profile, plus footprint and ratio."""
    from ._core import plan_pool_json

    return json.loads(plan_pool_json(profile, policy))


def swap(profile, limit, score="bo", bandwidth=12e9, latency=10.0, budget=40, seed=0):
    """Select, schedule and simulate swaps under a load limit in bytes."""
    from ._core import swap_json

    return json.loads(swap_json(profile, limit, score, bandwidth, latency, budget, seed))
