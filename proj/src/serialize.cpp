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

#include "serialize.hpp"

#include "reachsim/errors.hpp"

namespace reachsim::detail {

json profile_to_json(const ExcitationProfile& p) {
  json samples = json::array();
  for (int k = 0; k < p.num_samples(); ++k) {
    json row = json::array();
    for (int m = 0; m < kNumMuscles; ++m) row.push_back(p.samples(k, m));
    samples.push_back(std::move(row));
  }
  return json{{"dt", p.dt}, {"samples", std::move(samples)}};
}

ExcitationProfile profile_from_json(const json& j, const std::string& ctx) {
  check_keys(j, ctx, {"dt", "samples"});
  ExcitationProfile p;
  p.dt = get_number(j["dt"], ctx + ".dt");
  const json& samples = j["samples"];
  if (!samples.is_array()) throw SchemaError(ctx + ".samples: expected an array");
  p.samples.resize(static_cast<Eigen::Index>(samples.size()), kNumMuscles);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const json& row = samples[k];
    if (!row.is_array() || row.size() != kNumMuscles)
      throw SchemaError(ctx + ".samples: each row must hold 6 values");
    for (int m = 0; m < kNumMuscles; ++m) {
      const double v = get_number(row[m], ctx + ".samples");
      if (v < 0.0 || v > 1.0) throw SchemaError(ctx + ".samples: excitation outside [0,1]");
      p.samples(static_cast<Eigen::Index>(k), m) = v;
    }
  }
  return p;
}

json plan_to_json(const Plan& p) {
  json positions = json::array();
  for (const Eigen::Vector2d& tp : p.template_positions) positions.push_back(vec2_to_json(tp));
  return json{{"target", vec2_to_json(p.target)},
              {"template_ids", p.template_ids},
              {"template_positions", std::move(positions)},
              {"weights", vecx_to_json(p.weights)},
              {"predicted_position", vec2_to_json(p.predicted_position)},
              {"clamped_entries", p.clamped_entries},
              {"excitations", profile_to_json(p.blended_excitations)}};
}

Plan plan_from_json(const json& j, const std::string& ctx) {
  check_keys(j, ctx,
             {"target", "template_ids", "template_positions", "weights", "predicted_position",
              "clamped_entries", "excitations"});
  Plan p;
  p.target = get_vec2(j["target"], ctx + ".target");
  if (!j["template_ids"].is_array()) throw SchemaError(ctx + ".template_ids must be an array");
  for (const auto& id : j["template_ids"]) {
    if (!id.is_string()) throw SchemaError(ctx + ".template_ids must hold strings");
    p.template_ids.push_back(id.get<std::string>());
  }
  if (!j["template_positions"].is_array())
    throw SchemaError(ctx + ".template_positions must be an array");
  for (const auto& tp : j["template_positions"])
    p.template_positions.push_back(get_vec2(tp, ctx + ".template_positions"));
  p.weights = get_vecx(j["weights"], ctx + ".weights");
  p.predicted_position = get_vec2(j["predicted_position"], ctx + ".predicted_position");
  p.clamped_entries = j["clamped_entries"].get<int>();
  p.blended_excitations = profile_from_json(j["excitations"], ctx + ".excitations");
  return p;
}

}  // namespace reachsim::detail
