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

#include "reachsim/arm_dynamics.hpp"

#include <cassert>
#include <cmath>
#include <string>

#include "reachsim/errors.hpp"

namespace reachsim {

namespace {

inline double sq(double x) { return x * x; }

inline double pow10(double x) {
  const double x2 = x * x;
  const double x4 = x2 * x2;
  return x4 * x4 * x2;
}

}  // namespace

double activation_derivative(double u, double a, const MuscleParams& params) {
  assert(u >= -1e-12 && u <= 1.0 + 1e-12);
  // RK4 stage estimates may nudge `a` slightly past the invariant region.
  assert(a >= -0.5 && a <= 1.5);
  if (u >= a) {
    return (u - a) * (u / params.tau_act + (1.0 - u) / params.tau_deact);
  }
  return (u - a) / params.tau_deact;
}

double force_length_factor(double l) {
  const double d = l - 0.95;
  return std::exp(-40.0 * sq(sq(d)) + sq(d));
}

double force_velocity_factor(double v) {
  if (v >= 1.0) {
    throw SimulationError("non-physical contraction speed: normalized velocity " +
                          std::to_string(v) + " >= 1");
  }
  const double w = 1.0 - v;
  return 1.6 - 1.6 * std::exp(-1.1 / sq(sq(w)) + 0.1 / sq(w));
}

double passive_force_factor(double l) { return 1.3 * std::atan(0.1 * pow10(l - 0.22)); }

double muscle_force(double a, double fiber_length, double fiber_velocity,
                    const MuscleParams& params) {
  assert(fiber_length > 0.0);
  const double l = fiber_length / params.l0;
  const double v = fiber_velocity / 2.5;
  const double f1 = force_length_factor(l);
  const double f2 = force_velocity_factor(v);
  const double f3 = passive_force_factor(l);
  return params.f0 * (f1 * f2 * a + f3);
}

FiberState muscle_geometry(const Eigen::Vector2d& q, const Eigen::Vector2d& qdot,
                           const MuscleParams& params) {
  FiberState fiber;
  fiber.length = params.rest_length - params.moment_arms.dot(q);
  fiber.velocity = -params.moment_arms.dot(qdot);
  if (fiber.length <= 0.0) {
    throw SimulationError("muscle " + params.name + ": fiber length " +
                          std::to_string(fiber.length) + " <= 0");
  }
  return fiber;
}

Eigen::Matrix2d mass_matrix(const Eigen::Vector2d& q, const ArmModel& model) {
  const double m1 = model.link_masses[0], m2 = model.link_masses[1];
  const double l1 = model.link_lengths[0];
  const double lc1 = model.link_com_offsets[0], lc2 = model.link_com_offsets[1];
  const double i1 = model.link_inertias[0], i2 = model.link_inertias[1];

  const double shoulder_term = i1 + i2 + m1 * sq(lc1) + m2 * (sq(l1) + sq(lc2));
  const double coupling = m2 * l1 * lc2;
  const double elbow_term = i2 + m2 * sq(lc2);

  const double c2 = std::cos(q[1]);
  Eigen::Matrix2d a;
  a << shoulder_term + 2.0 * coupling * c2, elbow_term + coupling * c2,
      elbow_term + coupling * c2, elbow_term;
  return a;
}

Eigen::Vector2d gravity_torque(const Eigen::Vector2d& q, const ArmModel& model) {
  const double m1 = model.link_masses[0], m2 = model.link_masses[1];
  const double l1 = model.link_lengths[0];
  const double lc1 = model.link_com_offsets[0], lc2 = model.link_com_offsets[1];
  const double g = model.gravity;

  const double c1 = std::cos(q[0]);
  const double c12 = std::cos(q[0] + q[1]);
  return {-g * (m1 * lc1 * c1 + m2 * (l1 * c1 + lc2 * c12)), -g * m2 * lc2 * c12};
}

Eigen::Vector2d velocity_torque(const Eigen::Vector2d& q, const Eigen::Vector2d& qdot,
                                const ArmModel& model) {
  const double coupling = model.link_masses[1] * model.link_lengths[0] * model.link_com_offsets[1];
  const double s2 = std::sin(q[1]);
  return {coupling * s2 * (2.0 * qdot[0] * qdot[1] + sq(qdot[1])),
          -coupling * s2 * sq(qdot[0])};
}

Derivatives dynamics_rhs(const ArmState& state, const Vector6d& u, const ArmModel& model) {
  Vector6d forces;
  Derivatives out;
  for (int m = 0; m < kNumMuscles; ++m) {
    const MuscleParams& muscle = model.muscles[m];
    const FiberState fiber = muscle_geometry(state.q, state.qdot, muscle);
    forces[m] = muscle_force(state.activations[m], fiber.length, fiber.velocity, muscle);
    out.adot[m] = activation_derivative(u[m], state.activations[m], muscle);
  }

  const Eigen::Vector2d tau = model.moment_arm_matrix() * forces +
                              gravity_torque(state.q, model) +
                              velocity_torque(state.q, state.qdot, model) -
                              model.joint_damping.cwiseProduct(state.qdot);

  // A(q) is SPD for positive inertias; a 2x2 solve is exact and cheap.
  out.qddot = mass_matrix(state.q, model).inverse() * tau;
  return out;
}

namespace {

struct StateRates {
  Eigen::Vector2d dq;
  Eigen::Vector2d dqdot;
  Vector6d da;
};

StateRates rates(const ArmState& s, const Vector6d& u, const ArmModel& model) {
  const Derivatives d = dynamics_rhs(s, u, model);
  return {s.qdot, d.qddot, d.adot};
}

ArmState advanced(const ArmState& s, const StateRates& r, double h) {
  ArmState next = s;
  next.q += h * r.dq;
  next.qdot += h * r.dqdot;
  next.activations += h * r.da;
  return next;
}

}  // namespace

ArmState step(const ArmState& state, const Vector6d& u_sample, const ArmModel& model) {
  const double dt = model.integrator_dt;

  const StateRates k1 = rates(state, u_sample, model);
  const StateRates k2 = rates(advanced(state, k1, dt / 2.0), u_sample, model);
  const StateRates k3 = rates(advanced(state, k2, dt / 2.0), u_sample, model);
  const StateRates k4 = rates(advanced(state, k3, dt), u_sample, model);

  ArmState next = state;
  next.q += dt / 6.0 * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq);
  next.qdot += dt / 6.0 * (k1.dqdot + 2.0 * k2.dqdot + 2.0 * k3.dqdot + k4.dqdot);
  next.activations +=
      dt / 6.0 * (k1.da + 2.0 * k2.da + 2.0 * k3.da + k4.da);
  next.time = state.time + dt;

  next.activations = next.activations.cwiseMax(0.0).cwiseMin(1.0);
  for (int j = 0; j < kNumJoints; ++j) {
    if (next.q[j] < model.joint_lower[j]) {
      next.q[j] = model.joint_lower[j];
      if (next.qdot[j] < 0.0) next.qdot[j] = 0.0;
    } else if (next.q[j] > model.joint_upper[j]) {
      next.q[j] = model.joint_upper[j];
      if (next.qdot[j] > 0.0) next.qdot[j] = 0.0;
    }
  }
  return next;
}

Trajectory simulate(const ExcitationProfile& excitations, const ArmModel& model,
                    const ArmState& initial) {
  const double dt = model.integrator_dt;
  if (std::abs(excitations.dt - dt) > 1e-12 * std::max(1.0, dt)) {
    throw ConfigError("excitation grid dt " + std::to_string(excitations.dt) +
                      " does not match integrator dt " + std::to_string(dt));
  }
  if (excitations.num_samples() != model.num_steps()) {
    throw ConfigError("excitation profile has " + std::to_string(excitations.num_samples()) +
                      " samples, expected " + std::to_string(model.num_steps()));
  }
  if (excitations.samples.size() > 0 &&
      (excitations.samples.minCoeff() < 0.0 || excitations.samples.maxCoeff() > 1.0)) {
    throw ConfigError("excitation samples must lie in [0,1]");
  }

  Trajectory traj;
  traj.states.reserve(excitations.num_samples() + 1);
  traj.hand_positions.reserve(excitations.num_samples() + 1);
  traj.states.push_back(initial);
  traj.hand_positions.push_back(forward_kinematics(initial.q, model));

  ArmState state = initial;
  for (int k = 0; k < excitations.num_samples(); ++k) {
    try {
      state = step(state, excitations.samples.row(k).transpose(), model);
    } catch (const SimulationError& e) {
      throw SimulationError(std::string(e.what()) + " at step " + std::to_string(k) +
                                " (t = " + std::to_string(state.time) + " s)",
                            k);
    }
    traj.states.push_back(state);
    traj.hand_positions.push_back(forward_kinematics(state.q, model));
  }
  traj.final_position = traj.hand_positions.back();
  return traj;
}

Eigen::Vector2d forward_kinematics(const Eigen::Vector2d& q, const ArmModel& model) {
  const double l1 = model.link_lengths[0], l2 = model.link_lengths[1];
  const double q12 = q[0] + q[1];
  return {l1 * std::cos(q[0]) + l2 * std::cos(q12), l1 * std::sin(q[0]) + l2 * std::sin(q12)};
}

ArmState standard_initial_state(const ArmModel&) {
  ArmState state;
  state.q = {M_PI / 4.0, M_PI / 2.0};
  return state;
}

}  // namespace reachsim
