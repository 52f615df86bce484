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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "reachsim/arm_dynamics.hpp"
#include "reachsim/arm_model.hpp"

namespace reachsim {

/// A stored past movement: the excitation signals that were played and the
/// hand position they produced.
struct Template {
  std::string id;
  ExcitationProfile excitations;
  Eigen::Vector2d final_position = Eigen::Vector2d::Zero();
};

/// Library of past movements, tied to the arm that generated them via
/// `arm_model_hash`. Immutable after generation/load.
struct TemplateLibrary {
  std::string arm_model_hash;
  std::uint64_t generation_seed = 0;
  std::vector<Template> templates;
};

/// Waveform family for generated movements: each muscle gets a smooth bump
/// u(t) = A * sin^2(pi t / T) with per-muscle amplitude A drawn uniformly
/// from [0, amplitude_max].
struct WaveformSpec {
  double amplitude_max = 0.6;
};

/// Draws `count` random excitation profiles, simulates each from the
/// standard initial posture and records the final positions. Deterministic
/// for a fixed seed. Profiles whose simulation fails are resampled; the
/// resample count is reported through `resample_count` when non-null.
TemplateLibrary generate_library(const ArmModel& model, int count, std::uint64_t seed,
                                 const WaveformSpec& waveform = {},
                                 int* resample_count = nullptr);

/// The n templates closest to `target` by Euclidean endpoint distance, in
/// ascending order; equal distances break toward the lexicographically
/// smaller id. Throws ConfigError on an empty library or n > size.
std::vector<Template> nearest_templates(const TemplateLibrary& library,
                                        const Eigen::Vector2d& target, int n);

void save_library(const TemplateLibrary& library, const std::filesystem::path& path);
TemplateLibrary load_library(const std::filesystem::path& path);

/// Throws HashMismatchError unless the library was generated from `model`.
void require_matching_arm(const TemplateLibrary& library, const ArmModel& model);

/// Full integrity check: hash match plus re-simulation of every template,
/// requiring each stored final position to reproduce within `tol`.
void verify_library(const TemplateLibrary& library, const ArmModel& model,
                    double tol = 1e-9);

}  // namespace reachsim
