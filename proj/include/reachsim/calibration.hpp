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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reachsim/planner.hpp"
#include "reachsim/template_store.hpp"

namespace reachsim {

/// One movement's calibration outcome. `planner_weights` are the habitual
/// plan's weights, `offline_weights` the weights after the trial-and-error
/// sweep, `error_before`/`error_after` the endpoint errors of the movement
/// the sweep started from and of the selected candidate. The sweep always
/// includes the unchanged baseline, so error_after <= error_before.
struct CalibrationRecord {
  Eigen::Vector2d target = Eigen::Vector2d::Zero();
  std::vector<std::string> template_ids;
  std::vector<Eigen::Vector2d> template_positions;
  Eigen::VectorXd planner_weights;
  Eigen::VectorXd offline_weights;
  Eigen::Vector2d achieved_before = Eigen::Vector2d::Zero();
  Eigen::Vector2d achieved_after = Eigen::Vector2d::Zero();
  double error_before = 0.0;
  double error_after = 0.0;
  std::optional<int> chosen_n;  ///< nullopt = baseline (no correction) won
};

/// Sweep range for the correction-gain integer n, endpoints inclusive.
struct NGrid {
  int min = 0;
  int max = 20;
};

/// Population-vector decomposition of an endpoint error onto the templates:
/// delta_i = k_i cos(theta_i), where theta_i is the angle between the error
/// e = p_t - p_a and r_i = p_i - p_a, and
/// k_i = (|e|/|p_a|) (1 + n (|p_t| - |p_i|)/|p_i|), all norms taken from the
/// shoulder origin. A zero error yields all-zero deltas; a degenerate
/// geometry (p_a or some p_i at the origin, or p_i == p_a) throws
/// DegenerateGeometryError and callers fall back to zero deltas.
Eigen::VectorXd offline_delta(const Eigen::Vector2d& error_vec, const Eigen::Vector2d& p_a,
                              const Eigen::Vector2d& p_t,
                              std::span<const Eigen::Vector2d> template_positions, int n);

struct OfflineResult {
  Eigen::VectorXd weights;     ///< the selected candidate's weights
  CalibrationRecord record;
  int failed_candidates = 0;   ///< candidates discarded due to simulation errors
};

/// Trial-and-error calibration from arbitrary base weights: simulates the
/// base movement, then every n in the grid plus the unchanged baseline, and
/// keeps the candidate with the smallest endpoint error (ties prefer smaller
/// n; the baseline loses ties). Candidates whose simulation fails are
/// discarded and counted.
OfflineResult offline_calibrate_weights(const Eigen::Vector2d& target, const Plan& plan,
                                        const Eigen::VectorXd& base_weights,
                                        const ArmModel& model, const TemplateLibrary& library,
                                        const NGrid& grid = {});

/// offline_calibrate_weights starting from the plan's own weights.
OfflineResult offline_calibrate(const Eigen::Vector2d& target, const Plan& plan,
                                const ArmModel& model, const TemplateLibrary& library,
                                const NGrid& grid = {});

/// Linear map from movement features to per-template weight corrections.
/// Feature layout (version 1): [1, target (2), template positions (2N),
/// planner weights (N)], so feature_dim = 3 + 3N.
struct OnlineCalibrationModel {
  int num_templates = 0;
  int feature_dim = 0;
  Eigen::MatrixXd coefficients;  ///< num_templates x feature_dim
  double ridge_lambda = 0.0;
  int training_record_count = 0;
};

inline constexpr int kFeatureLayoutVersion = 1;

int online_feature_dim(int num_templates);

Eigen::VectorXd online_features(const Eigen::Vector2d& target,
                                std::span<const Eigen::Vector2d> template_positions,
                                const Eigen::VectorXd& planner_weights);

/// Predicted weight corrections, coefficients * features.
/// Throws ConfigError on a feature-dimension mismatch.
Eigen::VectorXd online_predict(const OnlineCalibrationModel& model,
                               const Eigen::VectorXd& features);

/// Per-output ridge least squares on the records' (features -> offline
/// weight delta) pairs. Deterministic and a function of the record multiset:
/// rows are put in a canonical order before assembly, so permuting the
/// records cannot change the result. ridge_lambda = 0 requires full-rank
/// features (RankDeficiencyError otherwise).
OnlineCalibrationModel online_fit(std::span<const CalibrationRecord> records,
                                  double ridge_lambda, int num_templates);

struct RoundEntry {
  Eigen::Vector2d target = Eigen::Vector2d::Zero();
  Eigen::VectorXd online_weights;
  Eigen::Vector2d achieved = Eigen::Vector2d::Zero();  ///< after online correction
  double error = 0.0;                                  ///< after online correction
  std::optional<int> followup_chosen_n;  ///< n picked by the post-hoc sweep
  bool skipped = false;
};

struct RoundReport {
  std::vector<RoundEntry> entries;
  double mean_error = 0.0;  ///< over non-skipped entries
  int skipped = 0;
};

struct OnlineRoundResult {
  OnlineCalibrationModel model;  ///< refit on all accumulated records
  RoundReport report;
};

/// One practice round: for every target, plan, apply the model's predicted
/// correction, execute, then run the trial-and-error sweep on top and append
/// the outcome to `records`. The model is refit once on all accumulated
/// records after the round. Targets whose processing fails are skipped and
/// reported.
OnlineRoundResult online_round(std::span<const Eigen::Vector2d> targets,
                               const TemplateLibrary& library, const ArmModel& model,
                               const OnlineCalibrationModel& online_model,
                               std::vector<CalibrationRecord>& records,
                               const NGrid& grid = {}, int num_templates = 4);

/// Append-only JSON-lines persistence for calibration records.
void append_records(std::span<const CalibrationRecord> records,
                    const std::filesystem::path& path);
std::vector<CalibrationRecord> load_records(const std::filesystem::path& path);

void save_online_model(const OnlineCalibrationModel& model, const std::filesystem::path& path);
OnlineCalibrationModel load_online_model(const std::filesystem::path& path);

}  // namespace reachsim
