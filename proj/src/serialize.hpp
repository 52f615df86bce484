// Copyright 2026 The reachsim Authors
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

// JSON forms shared between the stores and the CLI. Not installed.

#pragma once

#include <string>

#include "json_util.hpp"
#include "reachsim/arm_dynamics.hpp"
#include "reachsim/planner.hpp"

namespace reachsim::detail {

json profile_to_json(const ExcitationProfile& p);
ExcitationProfile profile_from_json(const json& j, const std::string& ctx);

json plan_to_json(const Plan& p);
Plan plan_from_json(const json& j, const std::string& ctx);

}  // namespace reachsim::detail
