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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "reachsim/errors.hpp"
#include "reachsim/planner.hpp"
#include "test_support.hpp"

using namespace reachsim;

namespace {

std::vector<Eigen::Vector2d> positions(std::initializer_list<std::pair<double, double>> pts) {
  std::vector<Eigen::Vector2d> out;
  for (const auto& [x, y] : pts) out.emplace_back(x, y);
  return out;
}

ExcitationProfile ramp_profile(const ArmModel& model, double scale) {
  ExcitationProfile p;
  p.dt = model.integrator_dt;
  p.samples.resize(model.num_steps(), kNumMuscles);
  for (Eigen::Index k = 0; k < p.samples.rows(); ++k)
    for (int m = 0; m < kNumMuscles; ++m)
      p.samples(k, m) = scale * (m + 1) / static_cast<double>(kNumMuscles) *
                        (static_cast<double>(k) / p.samples.rows());
  return p;
}

}  // namespace

TEST_CASE("compute_weights: symmetry, analytic case, exact hits") {
  // Four equidistant templates share the weight.
  const auto ring = positions({{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}});
  const Eigen::VectorXd equal = compute_weights({0.0, 0.0}, ring);
  for (int i = 0; i < 4; ++i) CHECK(equal[i] == doctest::Approx(0.25).epsilon(1e-14));

  // Distances (1, 3): (1/1)/(1/1 + 1/3) = 0.75.
  const auto two = positions({{1.0, 0.0}, {3.0, 0.0}});
  const Eigen::VectorXd w = compute_weights({0.0, 0.0}, two);
  CHECK(w[0] == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(w[1] == doctest::Approx(0.25).epsilon(1e-14));

  // A target on template 2 of 4 degenerates to a point mass there.
  const auto four = positions({{1.0, 0.0}, {0.4, 0.2}, {0.0, 1.0}, {-1.0, 0.0}});
  const Eigen::VectorXd hit = compute_weights({0.4, 0.2}, four);
  CHECK(hit[0] == 0.0);
  CHECK(hit[1] == 1.0);
  CHECK(hit[2] == 0.0);
  CHECK(hit[3] == 0.0);

  // Coincident zero-distance templates split the weight equally.
  const auto twin = positions({{0.4, 0.2}, {0.4, 0.2}, {1.0, 1.0}});
  const Eigen::VectorXd split = compute_weights({0.4, 0.2}, twin);
  CHECK(split[0] == 0.5);
  CHECK(split[1] == 0.5);
  CHECK(split[2] == 0.0);
}

TEST_CASE("blend_excitations: copies, averages, convexity, errors") {
  const ArmModel model = testing::quick_arm();
  const ExcitationProfile a = testing::constant_profile(model, Vector6d::Constant(0.2));
  const ExcitationProfile b = testing::constant_profile(model, Vector6d::Constant(0.6));
  const ExcitationProfile r = ramp_profile(model, 0.8);

  // Weight (1, 0, 0) is an exact copy.
  {
    Eigen::VectorXd w(3);
    w << 1.0, 0.0, 0.0;
    const std::vector<const ExcitationProfile*> ps = {&r, &a, &b};
    const BlendResult out = blend_excitations(w, ps);
    CHECK(out.profile.samples == r.samples);
    CHECK(out.clamped_entries == 0);
  }

  // Constant profiles 0.2 and 0.6 with weights (0.25, 0.75) average to 0.5.
  {
    Eigen::VectorXd w(2);
    w << 0.25, 0.75;
    const std::vector<const ExcitationProfile*> ps = {&a, &b};
    const BlendResult out = blend_excitations(w, ps);
    CHECK(out.profile.samples.minCoeff() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(out.profile.samples.maxCoeff() == doctest::Approx(0.5).epsilon(1e-14));
  }

  // Identical profiles under any simplex weights reproduce the profile.
  {
    Eigen::VectorXd w(3);
    w << 0.2, 0.5, 0.3;
    const std::vector<const ExcitationProfile*> ps = {&r, &r, &r};
    const BlendResult out = blend_excitations(w, ps);
    CHECK((out.profile.samples - r.samples).cwiseAbs().maxCoeff() <= 1e-15);
  }

  // Off-simplex weights clamp and count.
  {
    Eigen::VectorXd w(2);
    w << 3.0, -0.5;
    const std::vector<const ExcitationProfile*> ps = {&b, &a};
    const BlendResult out = blend_excitations(w, ps);  // 3*0.6 - 0.5*0.2 = 1.7
    CHECK(out.profile.samples.maxCoeff() == 1.0);
    CHECK(out.clamped_entries == out.profile.samples.size());
  }

  // Mismatched grids are rejected.
  {
    ExcitationProfile shifted = a;
    shifted.dt *= 2.0;
    Eigen::VectorXd w(2);
    w << 0.5, 0.5;
    const std::vector<const ExcitationProfile*> ps = {&a, &shifted};
    CHECK_THROWS_AS(blend_excitations(w, ps), ConfigError);
  }
}

TEST_CASE("estimate_position: weighted endpoint combinations") {
  const auto pair = positions({{0.0, 0.0}, {2.0, 2.0}});
  Eigen::VectorXd w(2);
  w << 0.5, 0.5;
  const Eigen::Vector2d mid = estimate_position(w, pair);
  CHECK(mid.x() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mid.y() == doctest::Approx(1.0).epsilon(1e-15));

  // The inverse-distance weights only approximate the target; the residual
  // is finite, generally nonzero.
  const auto tri = positions({{1.0, 0.0}, {0.0, 1.0}, {-0.5, -0.5}});
  const Eigen::Vector2d target(0.2, 0.1);
  const Eigen::VectorXd tw = compute_weights(target, tri);
  const Eigen::Vector2d estimate = estimate_position(tw, tri);
  CHECK(std::isfinite((estimate - target).norm()));
  CHECK((estimate - target).norm() > 0.0);
}

TEST_CASE("plan: exact-hit targets reproduce the stored movement") {
  const ArmModel model = testing::quick_arm();
  const TemplateLibrary lib = generate_library(model, 12, 31);

  const Template& pick = lib.templates[5];
  const Plan p = plan(pick.final_position, lib, 4);
  REQUIRE(p.template_ids[0] == pick.id);
  CHECK(p.weights[0] == 1.0);
  CHECK(p.weights.tail(3).isZero(0.0));
  CHECK(p.blended_excitations.samples == pick.excitations.samples);
  CHECK(p.predicted_position == pick.final_position);
}

TEST_CASE("plan: deterministic") {
  const ArmModel model = testing::quick_arm();
  const TemplateLibrary lib = generate_library(model, 12, 31);
  const Eigen::Vector2d target(0.1, 0.75);
  const Plan a = plan(target, lib, 4);
  const Plan b = plan(target, lib, 4);
  CHECK(a.template_ids == b.template_ids);
  CHECK(a.weights == b.weights);
  CHECK(a.blended_excitations.samples == b.blended_excitations.samples);
}

TEST_CASE("plan: endpoint errors on random targets stay at the expected scale") {
  const ArmModel model = testing::quick_arm();
  const TemplateLibrary lib = generate_library(model, 50, 13);

  Eigen::Vector2d lo = lib.templates.front().final_position, hi = lo;
  for (const Template& t : lib.templates) {
    lo = lo.cwiseMin(t.final_position);
    hi = hi.cwiseMax(t.final_position);
  }
  const Eigen::Vector2d center = 0.5 * (lo + hi), half = 0.45 * (hi - lo);

  std::mt19937_64 rng(101);
  const ArmState initial = standard_initial_state(model);
  double error_sum = 0.0;
  const int count = 20;
  for (int i = 0; i < count; ++i) {
    const Eigen::Vector2d target(
        testing::uniform(rng, (center - half).x(), (center + half).x()),
        testing::uniform(rng, (center - half).y(), (center + half).y()));
    const Plan p = plan(target, lib, 4);
    const Eigen::Vector2d actual = simulate(p.blended_excitations, model, initial).final_position;
    error_sum += (actual - target).norm();
  }
  const double mean_error = error_sum / count;
  INFO("mean planner error = ", mean_error);
  CHECK(mean_error > 1e-4);  // the approximation is not exact
  CHECK(mean_error < 0.15);  // but it lands in the neighborhood
}

TEST_CASE("planner properties: simplex, convexity, hull, permutation (1000 cases)") {
  const ArmModel model = testing::quick_arm();
  std::mt19937_64 rng(2024);

  const ExcitationProfile base[3] = {
      testing::constant_profile(model, Vector6d::Constant(0.1)),
      ramp_profile(model, 0.7),
      testing::constant_profile(model, Vector6d::Constant(0.55)),
  };

  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);  // 2..6 templates
    std::vector<Eigen::Vector2d> pos;
    std::vector<const ExcitationProfile*> profiles;
    for (int i = 0; i < n; ++i) {
      pos.emplace_back(testing::uniform(rng, -1.0, 1.0), testing::uniform(rng, -1.0, 1.0));
      profiles.push_back(&base[rng() % 3]);
    }
    const Eigen::Vector2d target(testing::uniform(rng, -1.0, 1.0),
                                 testing::uniform(rng, -1.0, 1.0));

    const Eigen::VectorXd w = compute_weights(target, pos);

    // Weight simplex.
    REQUIRE(w.minCoeff() >= 0.0);
    REQUIRE(std::abs(w.sum() - 1.0) <= 1e-12);

    // Hull containment via support functions.
    const Eigen::Vector2d estimate = estimate_position(w, pos);
    for (int d = 0; d < 8; ++d) {
      const double angle = 2.0 * M_PI * d / 8.0;
      const Eigen::Vector2d dir(std::cos(angle), std::sin(angle));
      double support = -1e300;
      for (const Eigen::Vector2d& p : pos) support = std::max(support, dir.dot(p));
      REQUIRE(dir.dot(estimate) <= support + 1e-12);
    }

    // Pointwise blend convexity.
    const BlendResult blend = blend_excitations(w, profiles);
    for (Eigen::Index k = 0; k < blend.profile.samples.rows(); k += 7) {
      for (int m = 0; m < kNumMuscles; ++m) {
        double lo = 1e300, hi = -1e300;
        for (const ExcitationProfile* p : profiles) {
          lo = std::min(lo, p->samples(k, m));
          hi = std::max(hi, p->samples(k, m));
        }
        REQUIRE(blend.profile.samples(k, m) >= lo - 1e-12);
        REQUIRE(blend.profile.samples(k, m) <= hi + 1e-12);
      }
    }

    // Permutation invariance: rotate the template order by one.
    std::vector<Eigen::Vector2d> pos_rot(pos.begin() + 1, pos.end());
    pos_rot.push_back(pos[0]);
    std::vector<const ExcitationProfile*> prof_rot(profiles.begin() + 1, profiles.end());
    prof_rot.push_back(profiles[0]);
    const Eigen::VectorXd w_rot = compute_weights(target, pos_rot);
    for (int i = 0; i < n; ++i) REQUIRE(w_rot[i] == w[(i + 1) % n]);
    const BlendResult blend_rot = blend_excitations(w_rot, prof_rot);
    REQUIRE((blend_rot.profile.samples - blend.profile.samples).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("planner locality: weight approaches 1 along the ray to a template") {
  const auto pos = positions({{1.0, 0.0}, {-0.3, 0.8}, {-0.6, -0.7}, {0.2, -0.9}});
  const Eigen::Vector2d start(0.0, 0.0);
  const Eigen::Vector2d goal = pos[0];

  double prev = 0.0;
  for (double s = 0.0; s <= 0.99; s += 0.03) {
    const Eigen::Vector2d target = start + s * (goal - start);
    const Eigen::VectorXd w = compute_weights(target, pos);
    CHECK(w[0] >= prev);
    prev = w[0];
  }
  CHECK(prev > 0.9);
}
