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

#include "reachsim/arm_model.hpp"

#include <cmath>

#include "json_util.hpp"
#include "reachsim/errors.hpp"

namespace reachsim {

using detail::json;

const std::array<std::string, kNumMuscles>& muscle_names() {
  static const std::array<std::string, kNumMuscles> names = {
      "BIClong", "BICshort", "BRA", "TRIlat", "TRImed", "TRIlong"};
  return names;
}

MomentArmMatrix ArmModel::moment_arm_matrix() const {
  MomentArmMatrix r;
  for (int m = 0; m < kNumMuscles; ++m) r.col(m) = muscles[m].moment_arms;
  return r;
}

int ArmModel::num_steps() const {
  return static_cast<int>(std::lround(movement_duration / integrator_dt));
}

void ArmModel::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("arm model: " + what);
  };
  for (int j = 0; j < kNumJoints; ++j) {
    require(link_lengths[j] > 0.0, "link lengths must be positive");
    require(link_masses[j] > 0.0, "link masses must be positive");
    require(link_com_offsets[j] > 0.0, "COM offsets must be positive");
    require(link_inertias[j] > 0.0, "link inertias must be positive");
    require(joint_damping[j] >= 0.0, "joint damping must be non-negative");
    require(joint_lower[j] < joint_upper[j], "joint limit intervals must be non-empty");
  }
  require(gravity >= 0.0, "gravity magnitude must be non-negative");
  require(integrator_dt > 0.0, "integrator dt must be positive");
  require(movement_duration > 0.0, "movement duration must be positive");
  require(num_steps() >= 1, "movement duration must cover at least one step");
  for (const MuscleParams& m : muscles) {
    require(m.f0 > 0.0, m.name + ": max isometric force must be positive");
    require(m.l0 > 0.0, m.name + ": optimal fiber length must be positive");
    require(m.tau_act > 0.0 && m.tau_act <= m.tau_deact,
            m.name + ": time constants must satisfy 0 < tau_act <= tau_deact");
    require(m.rest_length > 0.0, m.name + ": rest length must be positive");
    require(m.moment_arms.cwiseAbs().maxCoeff() > 0.0,
            m.name + ": needs a nonzero moment arm on at least one joint");
  }
}

namespace {

json muscle_to_json(const MuscleParams& m) {
  json j;
  j["name"] = m.name;
  j["f0"] = m.f0;
  j["l0"] = m.l0;
  j["tau_act"] = m.tau_act;
  j["tau_deact"] = m.tau_deact;
  j["moment_arms"] = detail::vec2_to_json(m.moment_arms);
  j["rest_length"] = m.rest_length;
  return j;
}

MuscleParams muscle_from_json(const json& j, const std::string& ctx) {
  detail::check_keys(j, ctx,
                     {"name", "f0", "l0", "tau_act", "tau_deact", "moment_arms", "rest_length"});
  MuscleParams m;
  if (!j["name"].is_string()) throw SchemaError(ctx + ": 'name' must be a string");
  m.name = j["name"].get<std::string>();
  m.f0 = detail::get_number(j["f0"], ctx + ".f0");
  m.l0 = detail::get_number(j["l0"], ctx + ".l0");
  m.tau_act = detail::get_number(j["tau_act"], ctx + ".tau_act");
  m.tau_deact = detail::get_number(j["tau_deact"], ctx + ".tau_deact");
  m.moment_arms = detail::get_vec2(j["moment_arms"], ctx + ".moment_arms");
  m.rest_length = detail::get_number(j["rest_length"], ctx + ".rest_length");
  return m;
}

json model_to_json(const ArmModel& model) {
  json links;
  links["lengths"] = detail::vec2_to_json(model.link_lengths);
  links["masses"] = detail::vec2_to_json(model.link_masses);
  links["com_offsets"] = detail::vec2_to_json(model.link_com_offsets);
  links["inertias"] = detail::vec2_to_json(model.link_inertias);
  links["damping"] = detail::vec2_to_json(model.joint_damping);

  json muscles = json::array();
  for (const MuscleParams& m : model.muscles) muscles.push_back(muscle_to_json(m));

  json j;
  j["links"] = links;
  j["gravity"] = model.gravity;
  j["muscles"] = muscles;
  j["integrator"] = {{"dt", model.integrator_dt}, {"duration", model.movement_duration}};
  j["joint_limits"] = {
      {"shoulder", json::array({model.joint_lower[0], model.joint_upper[0]})},
      {"elbow", json::array({model.joint_lower[1], model.joint_upper[1]})}};
  return j;
}

ArmModel model_from_json(const json& j, const std::string& ctx) {
  detail::check_keys(j, ctx, {"links", "gravity", "muscles", "integrator", "joint_limits"});
  ArmModel model;

  const json& links = j["links"];
  detail::check_keys(links, ctx + ".links",
                     {"lengths", "masses", "com_offsets", "inertias", "damping"});
  model.link_lengths = detail::get_vec2(links["lengths"], ctx + ".links.lengths");
  model.link_masses = detail::get_vec2(links["masses"], ctx + ".links.masses");
  model.link_com_offsets = detail::get_vec2(links["com_offsets"], ctx + ".links.com_offsets");
  model.link_inertias = detail::get_vec2(links["inertias"], ctx + ".links.inertias");
  model.joint_damping = detail::get_vec2(links["damping"], ctx + ".links.damping");

  model.gravity = detail::get_number(j["gravity"], ctx + ".gravity");

  const json& muscles = j["muscles"];
  if (!muscles.is_array() || muscles.size() != kNumMuscles)
    throw SchemaError(ctx + ".muscles: expected an array of exactly 6 muscles");
  for (int m = 0; m < kNumMuscles; ++m)
    model.muscles[m] = muscle_from_json(muscles[m], ctx + ".muscles[" + std::to_string(m) + "]");

  const json& integ = j["integrator"];
  detail::check_keys(integ, ctx + ".integrator", {"dt", "duration"});
  model.integrator_dt = detail::get_number(integ["dt"], ctx + ".integrator.dt");
  model.movement_duration = detail::get_number(integ["duration"], ctx + ".integrator.duration");

  const json& limits = j["joint_limits"];
  detail::check_keys(limits, ctx + ".joint_limits", {"shoulder", "elbow"});
  Eigen::Vector2d sh = detail::get_vec2(limits["shoulder"], ctx + ".joint_limits.shoulder");
  Eigen::Vector2d el = detail::get_vec2(limits["elbow"], ctx + ".joint_limits.elbow");
  model.joint_lower = {sh[0], el[0]};
  model.joint_upper = {sh[1], el[1]};

  model.validate();
  return model;
}

}  // namespace

ArmModel load_arm_model(const std::filesystem::path& path) {
  return model_from_json(detail::parse_json_file(path), path.string());
}

void save_arm_model(const ArmModel& model, const std::filesystem::path& path) {
  detail::write_text_file(path, model_to_json(model).dump(2) + "\n");
}

std::string arm_model_digest(const ArmModel& model) {
  // nlohmann::json keeps object keys sorted, so dump() is canonical.
  return detail::fnv1a64_hex(model_to_json(model).dump());
}

}  // namespace reachsim
