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

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "reachsim/arm_dynamics.hpp"
#include "reachsim/template_store.hpp"

namespace reachsim {

/// A planned movement: the templates it draws from, their blending weights,
/// the blended excitation signals and the position the weights predict.
/// At planning time the weights are non-negative and sum to one; calibrated
/// variants of them need not.
struct Plan {
  Eigen::Vector2d target = Eigen::Vector2d::Zero();
  std::vector<std::string> template_ids;
  std::vector<Eigen::Vector2d> template_positions;
  Eigen::VectorXd weights;
  ExcitationProfile blended_excitations;
  Eigen::Vector2d predicted_position = Eigen::Vector2d::Zero();
  int clamped_entries = 0;  ///< blend samples clamped back into [0,1]
};

/// Inverse-distance weights of the templates for a target:
/// w_i = (1/d_i) / sum_j (1/d_j). A target within 1e-12 of a template
/// position degenerates to weight 1 on that template (split equally when
/// several coincide).
Eigen::VectorXd compute_weights(const Eigen::Vector2d& target,
                                std::span<const Eigen::Vector2d> template_positions);

struct BlendResult {
  ExcitationProfile profile;
  int clamped_entries = 0;
};

/// Weighted sum of excitation profiles, per muscle per sample, clamped back
/// to [0,1]; `clamped_entries` counts how many entries needed clamping.
/// Weights need not sum to one. Throws ConfigError when the profiles do not
/// share one time grid.
BlendResult blend_excitations(const Eigen::VectorXd& weights,
                              std::span<const ExcitationProfile* const> excitations);

/// Weighted sum of template endpoint positions. With the inverse-distance
/// weights this only approximates the target; the residual is what
/// calibration corrects.
Eigen::Vector2d estimate_position(const Eigen::VectorXd& weights,
                                  std::span<const Eigen::Vector2d> template_positions);

/// Full habitual plan for a target: pick the n nearest templates, weight
/// them by inverse distance, blend their excitations.
Plan plan(const Eigen::Vector2d& target, const TemplateLibrary& library, int n = 4);

}  // namespace reachsim
