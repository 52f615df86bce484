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

#include "reachsim/template_store.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "json_util.hpp"
#include "reachsim/errors.hpp"
#include "serialize.hpp"

namespace reachsim {

using detail::json;

namespace {

// 53-bit uniform in [0,1); keeps generation identical across standard
// library implementations.
double uniform53(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

ExcitationProfile bump_profile(const ArmModel& model, const Vector6d& amplitudes) {
  ExcitationProfile profile;
  profile.dt = model.integrator_dt;
  const int n = model.num_steps();
  profile.samples.resize(n, kNumMuscles);
  const double duration = model.movement_duration;
  for (int k = 0; k < n; ++k) {
    // Sample at the step midpoint; the bump is zero at both movement ends.
    const double t = (k + 0.5) * model.integrator_dt;
    const double s = std::sin(M_PI * t / duration);
    profile.samples.row(k) = (s * s) * amplitudes.transpose();
  }
  return profile;
}

std::string template_id(int index) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "t%04d", index);
  return buf;
}

}  // namespace

TemplateLibrary generate_library(const ArmModel& model, int count, std::uint64_t seed,
                                 const WaveformSpec& waveform, int* resample_count) {
  if (count < 1) throw ConfigError("template count must be >= 1");
  if (waveform.amplitude_max < 0.0 || waveform.amplitude_max > 1.0)
    throw ConfigError("waveform amplitude bound must lie in [0,1]");
  model.validate();

  TemplateLibrary library;
  library.arm_model_hash = arm_model_digest(model);
  library.generation_seed = seed;
  library.templates.reserve(count);

  std::mt19937_64 rng(seed);
  const ArmState initial = standard_initial_state(model);
  int resamples = 0;
  const int max_attempts = 1000 + 100 * count;
  int attempts = 0;

  while (static_cast<int>(library.templates.size()) < count) {
    if (++attempts > max_attempts)
      throw SimulationError("template generation keeps failing; check the arm parameters");
    Vector6d amplitudes;
    for (int m = 0; m < kNumMuscles; ++m) amplitudes[m] = waveform.amplitude_max * uniform53(rng);

    Template t;
    t.excitations = bump_profile(model, amplitudes);
    try {
      t.final_position = simulate(t.excitations, model, initial).final_position;
    } catch (const SimulationError&) {
      ++resamples;
      continue;
    }
    t.id = template_id(static_cast<int>(library.templates.size()));
    library.templates.push_back(std::move(t));
  }
  if (resample_count) *resample_count = resamples;
  return library;
}

std::vector<Template> nearest_templates(const TemplateLibrary& library,
                                        const Eigen::Vector2d& target, int n) {
  if (library.templates.empty()) throw ConfigError("template library is empty");
  if (n < 1 || n > static_cast<int>(library.templates.size()))
    throw ConfigError("requested " + std::to_string(n) + " nearest templates from a library of " +
                      std::to_string(library.templates.size()));

  std::vector<const Template*> order;
  order.reserve(library.templates.size());
  for (const Template& t : library.templates) order.push_back(&t);
  std::sort(order.begin(), order.end(), [&](const Template* a, const Template* b) {
    const double da = (a->final_position - target).norm();
    const double db = (b->final_position - target).norm();
    if (da != db) return da < db;
    return a->id < b->id;
  });

  std::vector<Template> result;
  result.reserve(n);
  for (int i = 0; i < n; ++i) result.push_back(*order[i]);
  return result;
}

void save_library(const TemplateLibrary& library, const std::filesystem::path& path) {
  json templates = json::array();
  for (const Template& t : library.templates) {
    templates.push_back(json{{"id", t.id},
                             {"final_position", detail::vec2_to_json(t.final_position)},
                             {"excitations", detail::profile_to_json(t.excitations)}});
  }
  json j{{"arm_model_hash", library.arm_model_hash},
         {"generation_seed", library.generation_seed},
         {"templates", std::move(templates)}};
  detail::write_text_file(path, j.dump() + "\n");
}

TemplateLibrary load_library(const std::filesystem::path& path) {
  const json j = detail::parse_json_file(path);
  const std::string ctx = path.string();
  detail::check_keys(j, ctx, {"arm_model_hash", "generation_seed", "templates"});

  TemplateLibrary library;
  if (!j["arm_model_hash"].is_string()) throw SchemaError(ctx + ": arm_model_hash must be a string");
  library.arm_model_hash = j["arm_model_hash"].get<std::string>();
  if (!j["generation_seed"].is_number_unsigned() && !j["generation_seed"].is_number_integer())
    throw SchemaError(ctx + ": generation_seed must be an integer");
  library.generation_seed = j["generation_seed"].get<std::uint64_t>();

  const json& templates = j["templates"];
  if (!templates.is_array()) throw SchemaError(ctx + ": templates must be an array");
  library.templates.reserve(templates.size());
  std::set<std::string> ids;
  for (std::size_t i = 0; i < templates.size(); ++i) {
    const std::string tctx = ctx + ".templates[" + std::to_string(i) + "]";
    const json& tj = templates[i];
    detail::check_keys(tj, tctx, {"id", "final_position", "excitations"});
    Template t;
    if (!tj["id"].is_string()) throw SchemaError(tctx + ": id must be a string");
    t.id = tj["id"].get<std::string>();
    if (!ids.insert(t.id).second) throw SchemaError(tctx + ": duplicate template id " + t.id);
    t.final_position = detail::get_vec2(tj["final_position"], tctx + ".final_position");
    t.excitations = detail::profile_from_json(tj["excitations"], tctx + ".excitations");
    library.templates.push_back(std::move(t));
  }
  return library;
}

void require_matching_arm(const TemplateLibrary& library, const ArmModel& model) {
  const std::string expected = arm_model_digest(model);
  if (library.arm_model_hash != expected) {
    throw HashMismatchError("template library was generated from arm " + library.arm_model_hash +
                            ", not from the given arm " + expected);
  }
}

void verify_library(const TemplateLibrary& library, const ArmModel& model, double tol) {
  require_matching_arm(library, model);
  const ArmState initial = standard_initial_state(model);
  for (const Template& t : library.templates) {
    const Eigen::Vector2d replayed = simulate(t.excitations, model, initial).final_position;
    const double err = (replayed - t.final_position).norm();
    if (err > tol) {
      throw SchemaError("template " + t.id + " does not reproduce its stored final position (" +
                        std::to_string(err) + " > " + std::to_string(tol) + ")");
    }
  }
}

}  // namespace reachsim
