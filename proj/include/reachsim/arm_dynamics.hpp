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
#include <vector>

#include "reachsim/arm_model.hpp"

namespace reachsim {

/// Instantaneous state of the arm: joint angles/velocities plus the six
/// muscle activations. Activations stay in [0,1] and q stays inside the
/// model's joint limits after every integration step.
struct ArmState {
  Eigen::Vector2d q = Eigen::Vector2d::Zero();
  Eigen::Vector2d qdot = Eigen::Vector2d::Zero();
  Vector6d activations = Vector6d::Zero();
  double time = 0.0;
};

/// Neural excitation u(t) for all six muscles on a fixed time grid.
/// Row k drives the integrator step over [k*dt, (k+1)*dt); every entry
/// lies in [0,1].
struct ExcitationProfile {
  double dt = 0.0;
  Eigen::Matrix<double, Eigen::Dynamic, kNumMuscles> samples;

  int num_samples() const { return static_cast<int>(samples.rows()); }
};

/// Time-ordered result of a movement simulation. `states` holds the initial
/// state plus one state per excitation sample; `hand_positions` are the
/// matching fingertip positions and `final_position` is the last of them
/// (the movement's achieved position).
struct Trajectory {
  std::vector<ArmState> states;
  std::vector<Eigen::Vector2d> hand_positions;
  Eigen::Vector2d final_position = Eigen::Vector2d::Zero();
};

/// Rate of change of muscle activation for excitation u and activation a.
/// Both branches vanish at u = a, so the rate is continuous there.
double activation_derivative(double u, double a, const MuscleParams& params);

/// Active force-length factor f1 at normalized fiber length l = l_m / l0.
double force_length_factor(double l);

/// Force-velocity factor f2 at normalized contraction velocity v = v_m / 2.5.
/// Throws SimulationError when v >= 1 (the factor's denominator vanishes).
double force_velocity_factor(double v);

/// Passive force factor f3 at normalized fiber length l; zero at l = 0.22.
double passive_force_factor(double l);

/// Musculotendon tension F = f0 * (f1 f2 a + f3) [N].
/// Throws SimulationError when fiber_velocity / 2.5 >= 1.
double muscle_force(double a, double fiber_length, double fiber_velocity,
                    const MuscleParams& params);

struct FiberState {
  double length = 0.0;    ///< [m]
  double velocity = 0.0;  ///< [m/s], positive = lengthening
};

/// Fiber length and velocity at the given posture under the constant-
/// moment-arm map. Throws SimulationError when the length comes out <= 0.
FiberState muscle_geometry(const Eigen::Vector2d& q, const Eigen::Vector2d& qdot,
                           const MuscleParams& params);

/// Planar two-link mass matrix A(q); symmetric positive definite for
/// positive link inertias.
Eigen::Matrix2d mass_matrix(const Eigen::Vector2d& q, const ArmModel& model);

/// Generalized gravity force (RHS convention: added to the applied torques).
Eigen::Vector2d gravity_torque(const Eigen::Vector2d& q, const ArmModel& model);

/// Centrifugal/Coriolis generalized force of the two-link chain, RHS
/// convention. Together with mass_matrix and gravity_torque this completes
/// the standard form, so total energy obeys dE/dt = qdot . (tau - D qdot).
Eigen::Vector2d velocity_torque(const Eigen::Vector2d& q, const Eigen::Vector2d& qdot,
                                const ArmModel& model);

struct Derivatives {
  Eigen::Vector2d qddot = Eigen::Vector2d::Zero();
  Vector6d adot = Vector6d::Zero();
};

/// Right-hand side of the coupled 10-dimensional ODE: joint accelerations
/// from A(q)^-1 (R F_m + G(q) + c(q,qdot) - D qdot) and activation rates.
Derivatives dynamics_rhs(const ArmState& state, const Vector6d& u, const ArmModel& model);

/// One classical RK4 step of length model.integrator_dt with the excitation
/// sample held constant. Afterwards activations are clamped to [0,1] and
/// joints are clamped to their limits with the outward velocity zeroed.
ArmState step(const ArmState& state, const Vector6d& u_sample, const ArmModel& model);

/// Integrates the whole excitation profile from `initial`. Deterministic for
/// identical inputs. Throws ConfigError when the profile's grid does not
/// match the model's dt/duration; simulation failures carry the step index.
Trajectory simulate(const ExcitationProfile& excitations, const ArmModel& model,
                    const ArmState& initial);

/// Fingertip position for joint angles q, shoulder at the origin.
Eigen::Vector2d forward_kinematics(const Eigen::Vector2d& q, const ArmModel& model);

/// The reference posture every movement starts from: q = (pi/4, pi/2),
/// at rest, activations zero.
ArmState standard_initial_state(const ArmModel& model);

}  // namespace reachsim
