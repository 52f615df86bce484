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

#include "reachsim/planner.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "reachsim/errors.hpp"

namespace reachsim {

namespace {
constexpr double kExactHitDistance = 1e-12;
}

Eigen::VectorXd compute_weights(const Eigen::Vector2d& target,
                                std::span<const Eigen::Vector2d> template_positions) {
  const int n = static_cast<int>(template_positions.size());
  if (n < 1) throw ConfigError("compute_weights needs at least one template position");

  Eigen::VectorXd distances(n);
  for (int i = 0; i < n; ++i) distances[i] = (target - template_positions[i]).norm();

  // Exact hits collapse the inverse-distance rule; split the full weight
  // equally among the coincident templates.
  const int hits = static_cast<int>((distances.array() <= kExactHitDistance).count());
  Eigen::VectorXd weights = Eigen::VectorXd::Zero(n);
  if (hits > 0) {
    for (int i = 0; i < n; ++i)
      if (distances[i] <= kExactHitDistance) weights[i] = 1.0 / hits;
    return weights;
  }

  // Summing the inverse distances in sorted order makes the normalization
  // independent of template order, so permuting the inputs permutes the
  // weights bit-exactly.
  std::vector<double> inverse(distances.size());
  for (int i = 0; i < n; ++i) inverse[i] = 1.0 / distances[i];
  std::vector<double> sorted = inverse;
  std::sort(sorted.begin(), sorted.end());
  double total = 0.0;
  for (double v : sorted) total += v;

  for (int i = 0; i < n; ++i) weights[i] = inverse[i] / total;
  return weights;
}

BlendResult blend_excitations(const Eigen::VectorXd& weights,
                              std::span<const ExcitationProfile* const> excitations) {
  const int n = static_cast<int>(excitations.size());
  if (n < 1) throw ConfigError("blend_excitations needs at least one profile");
  if (weights.size() != n)
    throw ConfigError("blend_excitations: " + std::to_string(weights.size()) + " weights for " +
                      std::to_string(n) + " profiles");

  const ExcitationProfile& first = *excitations[0];
  for (int i = 1; i < n; ++i) {
    const ExcitationProfile& p = *excitations[i];
    if (std::abs(p.dt - first.dt) > 1e-12 || p.num_samples() != first.num_samples())
      throw ConfigError("blend_excitations: profiles do not share one time grid");
  }

  BlendResult result;
  result.profile.dt = first.dt;
  result.profile.samples.setZero(first.samples.rows(), kNumMuscles);
  for (int i = 0; i < n; ++i)
    result.profile.samples += weights[i] * excitations[i]->samples;

  for (Eigen::Index k = 0; k < result.profile.samples.rows(); ++k) {
    for (int m = 0; m < kNumMuscles; ++m) {
      double& v = result.profile.samples(k, m);
      if (v < 0.0) {
        v = 0.0;
        ++result.clamped_entries;
      } else if (v > 1.0) {
        v = 1.0;
        ++result.clamped_entries;
      }
    }
  }
  return result;
}

Eigen::Vector2d estimate_position(const Eigen::VectorXd& weights,
                                  std::span<const Eigen::Vector2d> template_positions) {
  Eigen::Vector2d p = Eigen::Vector2d::Zero();
  for (int i = 0; i < static_cast<int>(template_positions.size()); ++i)
    p += weights[i] * template_positions[i];
  return p;
}

Plan plan(const Eigen::Vector2d& target, const TemplateLibrary& library, int n) {
  Plan result;
  result.target = target;

  const std::vector<Template> nearest = nearest_templates(library, target, n);
  result.template_ids.reserve(nearest.size());
  result.template_positions.reserve(nearest.size());
  std::vector<const ExcitationProfile*> profiles;
  profiles.reserve(nearest.size());
  for (const Template& t : nearest) {
    result.template_ids.push_back(t.id);
    result.template_positions.push_back(t.final_position);
    profiles.push_back(&t.excitations);
  }

  result.weights = compute_weights(target, result.template_positions);
  BlendResult blend = blend_excitations(result.weights, profiles);
  result.blended_excitations = std::move(blend.profile);
  result.clamped_entries = blend.clamped_entries;
  result.predicted_position = estimate_position(result.weights, result.template_positions);
  return result;
}

}  // namespace reachsim
