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
#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

namespace reachsim {

inline constexpr int kNumJoints = 2;
inline constexpr int kNumMuscles = 6;

using Vector6d = Eigen::Matrix<double, kNumMuscles, 1>;

/// 2 x 6 map from muscle tensions to joint torques. Column m holds the
/// signed moment arms of muscle m on (shoulder, elbow).
using MomentArmMatrix = Eigen::Matrix<double, kNumJoints, kNumMuscles>;

/// Constants of one musculotendon actuator.
///
/// Fiber geometry uses the constant-moment-arm linearization
///   fiber_length(q)   = rest_length - moment_arms . q
///   fiber_velocity(q) = -moment_arms . qdot
/// so `rest_length` is the fiber length at q = (0, 0).
struct MuscleParams {
  std::string name;
  double f0 = 0.0;           ///< max isometric force [N]
  double l0 = 0.0;           ///< optimal fiber length [m]
  double tau_act = 0.0;      ///< activation time constant [s]
  double tau_deact = 0.0;    ///< deactivation time constant [s]
  Eigen::Vector2d moment_arms = Eigen::Vector2d::Zero();  ///< [m] per joint
  double rest_length = 0.0;  ///< fiber length at q = (0,0) [m]
};

/// Immutable physical description of the planar 2-joint, 6-muscle arm.
///
/// Shoulder frame: shoulder at the origin, x to the right, y up; gravity
/// (when nonzero) accelerates along -y. Joint 0 is the shoulder, joint 1
/// the elbow; angles in rad, counterclockwise positive, q = (0,0) is the
/// arm extended along +x.
///
/// Muscle order is fixed: [BIClong, BICshort, BRA, TRIlat, TRImed, TRIlong].
/// Serialization preserves this order.
struct ArmModel {
  Eigen::Vector2d link_lengths = Eigen::Vector2d::Zero();      ///< l1, l2 [m]
  Eigen::Vector2d link_masses = Eigen::Vector2d::Zero();       ///< [kg]
  Eigen::Vector2d link_com_offsets = Eigen::Vector2d::Zero();  ///< COM distance from proximal joint [m]
  Eigen::Vector2d link_inertias = Eigen::Vector2d::Zero();     ///< about COM [kg m^2]
  Eigen::Vector2d joint_damping = Eigen::Vector2d::Zero();     ///< viscous [N m s/rad]
  double gravity = 0.0;                                        ///< magnitude along -y [m/s^2]
  std::array<MuscleParams, kNumMuscles> muscles;
  double integrator_dt = 0.0;       ///< fixed RK4 step [s]
  double movement_duration = 0.0;   ///< T [s]
  Eigen::Vector2d joint_lower = Eigen::Vector2d::Zero();  ///< [rad]
  Eigen::Vector2d joint_upper = Eigen::Vector2d::Zero();  ///< [rad]

  MomentArmMatrix moment_arm_matrix() const;

  /// Number of integrator steps per movement, round(T / dt).
  int num_steps() const;

  /// Throws ConfigError if any invariant is violated (non-positive lengths,
  /// masses, inertias, dt, T; muscle constants out of range; a muscle with
  /// no moment arm; empty limit intervals).
  void validate() const;
};

/// Canonical muscle names, in the fixed serialization order.
const std::array<std::string, kNumMuscles>& muscle_names();

ArmModel load_arm_model(const std::filesystem::path& path);
void save_arm_model(const ArmModel& model, const std::filesystem::path& path);

/// Stable content digest of a model (FNV-1a over the canonical JSON form).
/// Template libraries record this to refuse reuse with a different arm.
std::string arm_model_digest(const ArmModel& model);

}  // namespace reachsim
