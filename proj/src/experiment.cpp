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

#include "reachsim/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <sstream>

#include "json_util.hpp"
#include "reachsim/errors.hpp"

namespace reachsim {

using detail::json;

namespace {

// Shortest round-trip decimal form; keeps reports byte-stable across runs.
std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double uniform53(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Rect rect_from_json(const json& j, const std::string& ctx) {
  detail::check_keys(j, ctx, {"min", "max"});
  Rect r;
  r.min = detail::get_vec2(j["min"], ctx + ".min");
  r.max = detail::get_vec2(j["max"], ctx + ".max");
  return r;
}

json rect_to_json(const Rect& r) {
  return json{{"min", detail::vec2_to_json(r.min)}, {"max", detail::vec2_to_json(r.max)}};
}

json config_to_json(const ExperimentConfig& c, std::uint64_t effective_seed) {
  json j;
  j["arm"] = c.arm_path.string();
  if (std::holds_alternative<std::filesystem::path>(c.library)) {
    j["library"] = {{"path", std::get<std::filesystem::path>(c.library).string()}};
  } else {
    const LibraryGenSpec& g = std::get<LibraryGenSpec>(c.library);
    j["library"] = {{"generate",
                     {{"count", g.count}, {"seed", g.seed}, {"amplitude_max", g.amplitude_max}}}};
  }
  json targets{{"count", c.targets.count}, {"seed", effective_seed}};
  if (c.targets.region) targets["region"] = rect_to_json(*c.targets.region);
  j["targets"] = std::move(targets);
  j["num_templates"] = c.num_templates;
  j["n_grid"] = {{"min", c.n_grid.min}, {"max", c.n_grid.max}};
  j["ridge_lambda"] = c.ridge_lambda;
  j["rounds"] = c.rounds;
  j["outputs"] = {{"report_csv", c.outputs.report_csv},
                  {"report_json", c.outputs.report_json},
                  {"records", c.outputs.records}};
  return j;
}

}  // namespace

ExperimentConfig experiment_config_from_json(const std::string& text) {
  const json j = detail::parse_json(text, "experiment config");
  const std::string ctx = "experiment config";
  detail::check_keys(j, ctx, {"arm", "library", "targets"},
                     {"num_templates", "n_grid", "ridge_lambda", "rounds", "outputs"});

  ExperimentConfig c;
  if (!j["arm"].is_string()) throw SchemaError(ctx + ": 'arm' must be a path string");
  c.arm_path = j["arm"].get<std::string>();

  const json& lib = j["library"];
  if (lib.is_object() && lib.contains("path")) {
    detail::check_keys(lib, ctx + ".library", {"path"});
    if (!lib["path"].is_string()) throw SchemaError(ctx + ".library.path must be a string");
    c.library = std::filesystem::path(lib["path"].get<std::string>());
  } else if (lib.is_object() && lib.contains("generate")) {
    detail::check_keys(lib, ctx + ".library", {"generate"});
    const json& gen = lib["generate"];
    detail::check_keys(gen, ctx + ".library.generate", {"count"}, {"seed", "amplitude_max"});
    LibraryGenSpec spec;
    spec.count = gen["count"].get<int>();
    if (gen.contains("seed")) spec.seed = gen["seed"].get<std::uint64_t>();
    if (gen.contains("amplitude_max"))
      spec.amplitude_max = detail::get_number(gen["amplitude_max"], ctx + ".amplitude_max");
    c.library = spec;
  } else {
    throw SchemaError(ctx + ".library: expected {\"path\": ...} or {\"generate\": ...}");
  }

  const json& targets = j["targets"];
  detail::check_keys(targets, ctx + ".targets", {"count"}, {"seed", "region"});
  c.targets.count = targets["count"].get<int>();
  if (targets.contains("seed")) c.targets.seed = targets["seed"].get<std::uint64_t>();
  if (targets.contains("region"))
    c.targets.region = rect_from_json(targets["region"], ctx + ".targets.region");

  if (j.contains("num_templates")) c.num_templates = j["num_templates"].get<int>();
  if (j.contains("n_grid")) {
    detail::check_keys(j["n_grid"], ctx + ".n_grid", {"min", "max"});
    c.n_grid.min = j["n_grid"]["min"].get<int>();
    c.n_grid.max = j["n_grid"]["max"].get<int>();
  }
  if (j.contains("ridge_lambda"))
    c.ridge_lambda = detail::get_number(j["ridge_lambda"], ctx + ".ridge_lambda");
  if (j.contains("rounds")) c.rounds = j["rounds"].get<int>();
  if (j.contains("outputs")) {
    const json& out = j["outputs"];
    detail::check_keys(out, ctx + ".outputs", {}, {"report_csv", "report_json", "records"});
    if (out.contains("report_csv")) c.outputs.report_csv = out["report_csv"].get<std::string>();
    if (out.contains("report_json")) c.outputs.report_json = out["report_json"].get<std::string>();
    if (out.contains("records")) c.outputs.records = out["records"].get<std::string>();
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  ExperimentConfig config = experiment_config_from_json(buf.str());

  // Input paths are relative to the config file, not the working directory.
  const std::filesystem::path base = path.parent_path();
  if (config.arm_path.is_relative()) config.arm_path = base / config.arm_path;
  if (auto* lib = std::get_if<std::filesystem::path>(&config.library); lib && lib->is_relative())
    config.library = base / *lib;
  return config;
}

void validate_region(const Rect& region, const ArmModel& model) {
  if (!(region.min.x() <= region.max.x() && region.min.y() <= region.max.y()))
    throw ConfigError("target region is empty");

  const double outer = model.link_lengths.sum();
  const double inner = std::abs(model.link_lengths[0] - model.link_lengths[1]);

  double far = 0.0;
  for (double x : {region.min.x(), region.max.x()})
    for (double y : {region.min.y(), region.max.y()})
      far = std::max(far, Eigen::Vector2d(x, y).norm());
  if (far > outer)
    throw ConfigError("target region leaves the reachable annulus (corner at " + fmt(far) +
                      " m > " + fmt(outer) + " m)");

  // Closest approach of the rectangle to the shoulder.
  const Eigen::Vector2d closest(std::clamp(0.0, region.min.x(), region.max.x()),
                                std::clamp(0.0, region.min.y(), region.max.y()));
  if (closest.norm() < inner)
    throw ConfigError("target region enters the unreachable inner disk");
}

std::vector<Eigen::Vector2d> sample_targets(const TargetSpec& spec, const ArmModel& model,
                                            const TemplateLibrary& library) {
  if (spec.count < 1) throw ConfigError("target count must be >= 1");

  Rect region;
  if (spec.region) {
    region = *spec.region;
  } else {
    if (library.templates.empty()) throw ConfigError("cannot derive a target region from an empty library");
    // Central-quartile box of the template endpoints, shrunk 10% about its
    // center. The raw bounding box has empty corners where nearest-template
    // distances blow up; the quartile box keeps targets in the dense part
    // of the cloud.
    std::vector<double> xs, ys;
    xs.reserve(library.templates.size());
    ys.reserve(library.templates.size());
    for (const Template& t : library.templates) {
      xs.push_back(t.final_position.x());
      ys.push_back(t.final_position.y());
    }
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    auto quantile = [](const std::vector<double>& v, double p) {
      return v[static_cast<std::size_t>(p * static_cast<double>(v.size() - 1))];
    };
    const Eigen::Vector2d qlo(quantile(xs, 0.25), quantile(ys, 0.25));
    const Eigen::Vector2d qhi(quantile(xs, 0.75), quantile(ys, 0.75));
    const Eigen::Vector2d center = 0.5 * (qlo + qhi);
    Eigen::Vector2d half = 0.45 * (qhi - qlo);
    // A thin cloud can still leave the annulus; shrink until reachable.
    for (int i = 0; i < 400; ++i) {
      region.min = center - half;
      region.max = center + half;
      try {
        validate_region(region, model);
        break;
      } catch (const ConfigError&) {
        half *= 0.95;
      }
    }
  }
  validate_region(region, model);

  std::mt19937_64 rng(spec.seed);
  std::vector<Eigen::Vector2d> targets;
  targets.reserve(spec.count);
  for (int i = 0; i < spec.count; ++i) {
    const double x = region.min.x() + uniform53(rng) * (region.max.x() - region.min.x());
    const double y = region.min.y() + uniform53(rng) * (region.max.y() - region.min.y());
    targets.emplace_back(x, y);
  }
  return targets;
}

ExperimentReport run_experiment(const ExperimentConfig& config,
                                std::optional<std::uint64_t> seed_override,
                                std::vector<CalibrationRecord>* records_out) {
  if (config.targets.count < 1) throw ConfigError("targets.count must be >= 1");
  if (config.num_templates < 1) throw ConfigError("num_templates must be >= 1");
  if (config.rounds < 0) throw ConfigError("rounds must be >= 0");
  if (config.n_grid.min > config.n_grid.max) throw ConfigError("n_grid is empty");
  if (config.ridge_lambda < 0.0) throw ConfigError("ridge_lambda must be >= 0");

  const std::uint64_t seed = seed_override.value_or(config.targets.seed);

  const ArmModel model = load_arm_model(config.arm_path);
  TemplateLibrary library;
  if (std::holds_alternative<std::filesystem::path>(config.library)) {
    library = load_library(std::get<std::filesystem::path>(config.library));
    require_matching_arm(library, model);
  } else {
    const LibraryGenSpec& gen = std::get<LibraryGenSpec>(config.library);
    library = generate_library(model, gen.count, gen.seed, WaveformSpec{gen.amplitude_max});
  }
  if (config.num_templates > static_cast<int>(library.templates.size()))
    throw ConfigError("num_templates exceeds the library size");

  TargetSpec target_spec = config.targets;
  target_spec.seed = seed;
  const std::vector<Eigen::Vector2d> targets = sample_targets(target_spec, model, library);

  ExperimentReport report;
  report.seed = seed;
  report.num_templates = config.num_templates;
  report.config_digest = detail::fnv1a64_hex(config_to_json(config, seed).dump());

  const ArmState initial = standard_initial_state(model);
  std::vector<CalibrationRecord> records;
  std::vector<Plan> plans;
  plans.reserve(targets.size());

  try {
    // Stage 1: habitual plans, uncorrected.
    double plan_error_sum = 0.0;
    for (const Eigen::Vector2d& target : targets) {
      Plan p = plan(target, library, config.num_templates);
      const Eigen::Vector2d actual =
          simulate(p.blended_excitations, model, initial).final_position;
      const double error = (target - actual).norm();
      plan_error_sum += error;
      report.rows.push_back(
          {0, target, "plan", actual, p.weights, std::nullopt, error});
      plans.push_back(std::move(p));
    }
    report.mean_plan = plan_error_sum / static_cast<double>(targets.size());

    // Stage 2: trial-and-error calibration; its records bootstrap the
    // online model.
    double offline_error_sum = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      OfflineResult off = offline_calibrate(targets[i], plans[i], model, library, config.n_grid);
      offline_error_sum += off.record.error_after;
      report.rows.push_back({0, targets[i], "offline", off.record.achieved_after,
                             off.record.offline_weights, off.record.chosen_n,
                             off.record.error_after});
      records.push_back(std::move(off.record));
    }
    report.mean_offline = offline_error_sum / static_cast<double>(targets.size());

    // Stage 3: online rounds on the same targets.
    if (config.rounds > 0) {
      OnlineCalibrationModel online_model =
          online_fit(records, config.ridge_lambda, config.num_templates);
      for (int round = 1; round <= config.rounds; ++round) {
        OnlineRoundResult result = online_round(targets, library, model, online_model, records,
                                                config.n_grid, config.num_templates);
        for (const RoundEntry& entry : result.report.entries) {
          if (entry.skipped) continue;
          report.rows.push_back({round, entry.target, "online", entry.achieved,
                                 entry.online_weights, entry.followup_chosen_n, entry.error});
        }
        report.round_means.push_back(result.report.mean_error);
        online_model = std::move(result.model);
      }
    }
  } catch (const Error& e) {
    report.partial = true;
    report.partial_reason = e.what();
  }

  if (records_out) *records_out = std::move(records);
  return report;
}

std::string report_to_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "round,target_x,target_y,stage,actual_x,actual_y";
  for (int i = 1; i <= report.num_templates; ++i) out << ",w" << i;
  out << ",chosen_n,error\n";
  for (const ReportRow& row : report.rows) {
    out << row.round << ',' << fmt(row.target.x()) << ',' << fmt(row.target.y()) << ','
        << row.stage << ',' << fmt(row.actual.x()) << ',' << fmt(row.actual.y());
    for (Eigen::Index i = 0; i < row.weights.size(); ++i) out << ',' << fmt(row.weights[i]);
    out << ',' << (row.chosen_n ? std::to_string(*row.chosen_n) : std::string("none")) << ','
        << fmt(row.error) << '\n';
  }
  return out.str();
}

void write_report_csv(const ExperimentReport& report, const std::filesystem::path& path) {
  detail::write_text_file(path, report_to_csv(report));
}

namespace {

json report_to_json_value(const ExperimentReport& report) {
  json rows = json::array();
  for (const ReportRow& row : report.rows) {
    json r{{"round", row.round},
           {"target", detail::vec2_to_json(row.target)},
           {"stage", row.stage},
           {"actual", detail::vec2_to_json(row.actual)},
           {"weights", detail::vecx_to_json(row.weights)},
           {"error", row.error}};
    r["chosen_n"] = row.chosen_n ? json(*row.chosen_n) : json(nullptr);
    rows.push_back(std::move(r));
  }
  return json{{"config_digest", report.config_digest},
              {"seed", report.seed},
              {"num_templates", report.num_templates},
              {"mean_plan", report.mean_plan},
              {"mean_offline", report.mean_offline},
              {"round_means", report.round_means},
              {"partial", report.partial},
              {"partial_reason", report.partial_reason},
              {"rows", std::move(rows)}};
}

}  // namespace

std::string report_to_json(const ExperimentReport& report) {
  return report_to_json_value(report).dump(2) + "\n";
}

void write_report_json(const ExperimentReport& report, const std::filesystem::path& path) {
  detail::write_text_file(path, report_to_json(report));
}

ExperimentReport load_report_json(const std::filesystem::path& path) {
  const json j = detail::parse_json_file(path);
  const std::string ctx = path.string();
  detail::check_keys(j, ctx,
                     {"config_digest", "seed", "num_templates", "mean_plan", "mean_offline",
                      "round_means", "partial", "partial_reason", "rows"});
  ExperimentReport report;
  report.config_digest = j["config_digest"].get<std::string>();
  report.seed = j["seed"].get<std::uint64_t>();
  report.num_templates = j["num_templates"].get<int>();
  report.mean_plan = detail::get_number(j["mean_plan"], ctx + ".mean_plan");
  report.mean_offline = detail::get_number(j["mean_offline"], ctx + ".mean_offline");
  for (const auto& m : j["round_means"])
    report.round_means.push_back(detail::get_number(m, ctx + ".round_means"));
  report.partial = j["partial"].get<bool>();
  report.partial_reason = j["partial_reason"].get<std::string>();
  for (const auto& rj : j["rows"]) {
    detail::check_keys(rj, ctx + ".rows",
                       {"round", "target", "stage", "actual", "weights", "error", "chosen_n"});
    ReportRow row;
    row.round = rj["round"].get<int>();
    row.target = detail::get_vec2(rj["target"], ctx + ".rows.target");
    row.stage = rj["stage"].get<std::string>();
    row.actual = detail::get_vec2(rj["actual"], ctx + ".rows.actual");
    row.weights = detail::get_vecx(rj["weights"], ctx + ".rows.weights");
    row.error = detail::get_number(rj["error"], ctx + ".rows.error");
    if (!rj["chosen_n"].is_null()) row.chosen_n = rj["chosen_n"].get<int>();
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string plot_data_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "round,target_x,target_y,error,round_mean\n";
  for (const ReportRow& row : report.rows) {
    if (row.stage != "online") continue;
    const std::size_t idx = static_cast<std::size_t>(row.round - 1);
    if (idx >= report.round_means.size())
      throw SchemaError("report row references round " + std::to_string(row.round) +
                        " without a recorded mean");
    out << row.round << ',' << fmt(row.target.x()) << ',' << fmt(row.target.y()) << ','
        << fmt(row.error) << ',' << fmt(report.round_means[idx]) << '\n';
  }
  return out.str();
}

}  // namespace reachsim
