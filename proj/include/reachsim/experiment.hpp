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
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "reachsim/calibration.hpp"

namespace reachsim {

/// Axis-aligned rectangle in the shoulder frame.
struct Rect {
  Eigen::Vector2d min = Eigen::Vector2d::Zero();
  Eigen::Vector2d max = Eigen::Vector2d::Zero();
};

/// Where the template library comes from: an existing file, or a fresh
/// seeded generation run.
struct LibraryGenSpec {
  int count = 50;
  std::uint64_t seed = 1;
  double amplitude_max = 0.6;
};
using LibrarySource = std::variant<std::filesystem::path, LibraryGenSpec>;

/// Target sampling: `count` points drawn uniformly from `region`, or, when
/// no region is given, from the central-quartile box of the template cloud
/// shrunk by 10% about its center. The same targets are reused by every
/// stage and round.
struct TargetSpec {
  int count = 25;
  std::uint64_t seed = 2;
  std::optional<Rect> region;
};

struct OutputSpec {
  std::string report_csv = "report.csv";
  std::string report_json = "report.json";
  std::string records = "records.jsonl";
};

struct ExperimentConfig {
  std::filesystem::path arm_path;
  LibrarySource library = LibraryGenSpec{};
  TargetSpec targets;
  int num_templates = 4;
  NGrid n_grid;
  double ridge_lambda = 1e-6;
  int rounds = 5;
  OutputSpec outputs;
};

/// Strict parse of a config file; unknown keys are rejected. Semantic
/// validation (counts >= 1, region inside the reachable annulus) happens
/// against the arm at run time.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
ExperimentConfig experiment_config_from_json(const std::string& text);

struct ReportRow {
  int round = 0;  ///< 0 for the plan/offline stages, 1..R for online rounds
  Eigen::Vector2d target = Eigen::Vector2d::Zero();
  std::string stage;  ///< "plan", "offline" or "online"
  Eigen::Vector2d actual = Eigen::Vector2d::Zero();
  Eigen::VectorXd weights;
  std::optional<int> chosen_n;
  double error = 0.0;
};

struct ExperimentReport {
  std::string config_digest;
  std::uint64_t seed = 0;
  int num_templates = 4;
  std::vector<ReportRow> rows;
  double mean_plan = 0.0;
  double mean_offline = 0.0;
  std::vector<double> round_means;  ///< online stage, one entry per round
  bool partial = false;             ///< a stage aborted; see partial_reason
  std::string partial_reason;
};

/// Runs the three stages on one target set: habitual plan, trial-and-error
/// calibration (which also bootstraps the online model), then `rounds`
/// online practice rounds. Deterministic for a fixed config + seed.
/// `seed_override`, when set, replaces the config's target seed.
ExperimentReport run_experiment(const ExperimentConfig& config,
                                std::optional<std::uint64_t> seed_override = std::nullopt,
                                std::vector<CalibrationRecord>* records_out = nullptr);

/// CSV with the exact column set
/// round,target_x,target_y,stage,actual_x,actual_y,w1..wN,chosen_n,error
/// and byte-stable number formatting.
std::string report_to_csv(const ExperimentReport& report);
void write_report_csv(const ExperimentReport& report, const std::filesystem::path& path);

std::string report_to_json(const ExperimentReport& report);
void write_report_json(const ExperimentReport& report, const std::filesystem::path& path);
ExperimentReport load_report_json(const std::filesystem::path& path);

/// Plot-ready tidy CSV, one row per online-round target with the round mean
/// replicated: round,target_x,target_y,error,round_mean. Header-only for a
/// report without online rounds.
std::string plot_data_csv(const ExperimentReport& report);

/// Uniform target samples for an arm/library pair, honoring spec.region or
/// deriving the default region from the template cloud.
std::vector<Eigen::Vector2d> sample_targets(const TargetSpec& spec, const ArmModel& model,
                                            const TemplateLibrary& library);

/// Throws ConfigError unless the rectangle lies inside the arm's reachable
/// annulus.
void validate_region(const Rect& region, const ArmModel& model);

}  // namespace reachsim
