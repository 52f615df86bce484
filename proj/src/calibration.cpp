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

#include "reachsim/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "json_util.hpp"
#include "reachsim/errors.hpp"

namespace reachsim {

using detail::json;

namespace {
constexpr double kDegenerateNorm = 1e-12;
}

Eigen::VectorXd offline_delta(const Eigen::Vector2d& error_vec, const Eigen::Vector2d& p_a,
                              const Eigen::Vector2d& p_t,
                              std::span<const Eigen::Vector2d> template_positions, int n) {
  const int count = static_cast<int>(template_positions.size());
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(count);

  const double d_e = error_vec.norm();
  if (d_e <= kDegenerateNorm) return delta;  // already on target

  const double d_a = p_a.norm();
  if (d_a <= kDegenerateNorm)
    throw DegenerateGeometryError("actual position at the origin, correction gain undefined");
  const double d_t = p_t.norm();

  for (int i = 0; i < count; ++i) {
    const Eigen::Vector2d r = template_positions[i] - p_a;
    const double r_norm = r.norm();
    if (r_norm <= kDegenerateNorm)
      throw DegenerateGeometryError("template " + std::to_string(i) +
                                    " coincides with the actual position");
    const double d_i = template_positions[i].norm();
    if (d_i <= kDegenerateNorm)
      throw DegenerateGeometryError("template " + std::to_string(i) + " at the origin");

    const double cos_theta = error_vec.dot(r) / (d_e * r_norm);
    const double k = d_e / d_a * (1.0 + n * (d_t - d_i) / d_i);
    delta[i] = k * cos_theta;
  }
  return delta;
}

namespace {

std::vector<const ExcitationProfile*> profiles_for(const Plan& plan,
                                                   const TemplateLibrary& library) {
  std::vector<const ExcitationProfile*> profiles;
  profiles.reserve(plan.template_ids.size());
  for (const std::string& id : plan.template_ids) {
    auto it = std::find_if(library.templates.begin(), library.templates.end(),
                           [&](const Template& t) { return t.id == id; });
    if (it == library.templates.end())
      throw ConfigError("plan references template " + id + " missing from the library");
    profiles.push_back(&it->excitations);
  }
  return profiles;
}

}  // namespace

OfflineResult offline_calibrate_weights(const Eigen::Vector2d& target, const Plan& plan,
                                        const Eigen::VectorXd& base_weights,
                                        const ArmModel& model, const TemplateLibrary& library,
                                        const NGrid& grid) {
  if (grid.min > grid.max) throw ConfigError("n grid is empty");
  const std::vector<const ExcitationProfile*> profiles = profiles_for(plan, library);
  const ArmState initial = standard_initial_state(model);

  auto run = [&](const Eigen::VectorXd& w) -> Eigen::Vector2d {
    return simulate(blend_excitations(w, profiles).profile, model, initial).final_position;
  };

  const Eigen::Vector2d achieved_base = run(base_weights);
  const Eigen::Vector2d error_vec = target - achieved_base;
  const double error_base = error_vec.norm();

  OfflineResult result;
  result.weights = base_weights;

  Eigen::VectorXd best_weights = base_weights;
  Eigen::Vector2d best_achieved = achieved_base;
  double best_error = std::numeric_limits<double>::infinity();
  std::optional<int> best_n;
  bool any_candidate = false;

  for (int n = grid.min; n <= grid.max; ++n) {
    Eigen::VectorXd delta;
    try {
      delta = offline_delta(error_vec, achieved_base, target,
                            std::span<const Eigen::Vector2d>(plan.template_positions), n);
    } catch (const DegenerateGeometryError&) {
      break;  // no usable geometry for any n; keep the baseline
    }
    if (delta.isZero(0.0)) continue;  // not a correction, identical to the baseline
    const Eigen::VectorXd candidate = base_weights + delta;
    try {
      const Eigen::Vector2d achieved = run(candidate);
      const double err = (target - achieved).norm();
      any_candidate = true;
      if (err < best_error) {
        best_error = err;
        best_weights = candidate;
        best_achieved = achieved;
        best_n = n;
      }
    } catch (const SimulationError&) {
      ++result.failed_candidates;
    }
  }

  // The unchanged baseline competes last and loses ties, so the selected
  // error can never exceed the starting error.
  if (!any_candidate || error_base < best_error) {
    best_error = error_base;
    best_weights = base_weights;
    best_achieved = achieved_base;
    best_n.reset();
  }

  result.weights = best_weights;
  result.record.target = target;
  result.record.template_ids = plan.template_ids;
  result.record.template_positions = plan.template_positions;
  result.record.planner_weights = plan.weights;
  result.record.offline_weights = best_weights;
  result.record.achieved_before = achieved_base;
  result.record.achieved_after = best_achieved;
  result.record.error_before = error_base;
  result.record.error_after = best_error;
  result.record.chosen_n = best_n;
  return result;
}

OfflineResult offline_calibrate(const Eigen::Vector2d& target, const Plan& plan,
                                const ArmModel& model, const TemplateLibrary& library,
                                const NGrid& grid) {
  return offline_calibrate_weights(target, plan, plan.weights, model, library, grid);
}

int online_feature_dim(int num_templates) { return 3 + 3 * num_templates; }

Eigen::VectorXd online_features(const Eigen::Vector2d& target,
                                std::span<const Eigen::Vector2d> template_positions,
                                const Eigen::VectorXd& planner_weights) {
  const int n = static_cast<int>(template_positions.size());
  if (planner_weights.size() != n)
    throw ConfigError("online_features: " + std::to_string(planner_weights.size()) +
                      " weights for " + std::to_string(n) + " template positions");

  Eigen::VectorXd f(online_feature_dim(n));
  f[0] = 1.0;
  f[1] = target.x();
  f[2] = target.y();
  for (int i = 0; i < n; ++i) {
    f[3 + 2 * i] = template_positions[i].x();
    f[3 + 2 * i + 1] = template_positions[i].y();
  }
  f.tail(n) = planner_weights;
  return f;
}

Eigen::VectorXd online_predict(const OnlineCalibrationModel& model,
                               const Eigen::VectorXd& features) {
  if (features.size() != model.feature_dim)
    throw ConfigError("online_predict: got " + std::to_string(features.size()) +
                      " features, model expects " + std::to_string(model.feature_dim));
  return model.coefficients * features;
}

OnlineCalibrationModel online_fit(std::span<const CalibrationRecord> records,
                                  double ridge_lambda, int num_templates) {
  if (records.empty()) throw ConfigError("online_fit needs at least one record");
  if (ridge_lambda < 0.0) throw ConfigError("ridge lambda must be non-negative");
  const int feature_dim = online_feature_dim(num_templates);

  struct Row {
    Eigen::VectorXd features;
    Eigen::VectorXd delta;
  };
  std::vector<Row> rows;
  rows.reserve(records.size());
  for (const CalibrationRecord& r : records) {
    if (static_cast<int>(r.template_positions.size()) != num_templates ||
        r.planner_weights.size() != num_templates || r.offline_weights.size() != num_templates)
      throw ConfigError("online_fit: record does not use " + std::to_string(num_templates) +
                        " templates");
    rows.push_back({online_features(r.target, r.template_positions, r.planner_weights),
                    r.offline_weights - r.planner_weights});
  }

  // Canonical row order makes the fit a function of the record multiset:
  // permuting the inputs cannot perturb the floating-point assembly.
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    for (Eigen::Index i = 0; i < a.features.size(); ++i) {
      if (a.features[i] != b.features[i]) return a.features[i] < b.features[i];
    }
    for (Eigen::Index i = 0; i < a.delta.size(); ++i) {
      if (a.delta[i] != b.delta[i]) return a.delta[i] < b.delta[i];
    }
    return false;
  });

  const Eigen::Index r_count = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd phi(r_count, feature_dim);
  Eigen::MatrixXd targets(r_count, num_templates);
  for (Eigen::Index r = 0; r < r_count; ++r) {
    phi.row(r) = rows[r].features.transpose();
    targets.row(r) = rows[r].delta.transpose();
  }

  OnlineCalibrationModel model;
  model.num_templates = num_templates;
  model.feature_dim = feature_dim;
  model.ridge_lambda = ridge_lambda;
  model.training_record_count = static_cast<int>(r_count);

  if (ridge_lambda == 0.0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(phi);
    if (qr.rank() < feature_dim)
      throw RankDeficiencyError("features are rank-deficient and ridge lambda is zero");
    model.coefficients = qr.solve(targets).transpose();
  } else {
    const Eigen::MatrixXd normal =
        phi.transpose() * phi +
        ridge_lambda * Eigen::MatrixXd::Identity(feature_dim, feature_dim);
    model.coefficients = normal.ldlt().solve(phi.transpose() * targets).transpose();
  }
  if (!model.coefficients.allFinite())
    throw RankDeficiencyError("regression produced non-finite coefficients");
  return model;
}

OnlineRoundResult online_round(std::span<const Eigen::Vector2d> targets,
                               const TemplateLibrary& library, const ArmModel& model,
                               const OnlineCalibrationModel& online_model,
                               std::vector<CalibrationRecord>& records,
                               const NGrid& grid, int num_templates) {
  if (online_model.training_record_count < 1)
    throw ConfigError("online_round requires a model trained on at least one record");
  if (targets.empty()) throw ConfigError("online_round needs at least one target");

  OnlineRoundResult result;
  double error_sum = 0.0;
  int succeeded = 0;

  for (const Eigen::Vector2d& target : targets) {
    RoundEntry entry;
    entry.target = target;
    try {
      const Plan p = plan(target, library, num_templates);
      const Eigen::VectorXd features =
          online_features(target, p.template_positions, p.weights);
      const Eigen::VectorXd corrected = p.weights + online_predict(online_model, features);

      OfflineResult followup = offline_calibrate_weights(target, p, corrected, model, library, grid);
      entry.online_weights = corrected;
      entry.achieved = followup.record.achieved_before;
      entry.error = followup.record.error_before;
      entry.followup_chosen_n = followup.record.chosen_n;
      records.push_back(std::move(followup.record));

      error_sum += entry.error;
      ++succeeded;
    } catch (const Error&) {
      entry.skipped = true;
      ++result.report.skipped;
    }
    result.report.entries.push_back(std::move(entry));
  }

  result.report.mean_error = succeeded > 0 ? error_sum / succeeded : 0.0;
  result.model = online_fit(records, online_model.ridge_lambda, num_templates);
  return result;
}

namespace {

json record_to_json(const CalibrationRecord& r) {
  json positions = json::array();
  for (const Eigen::Vector2d& p : r.template_positions)
    positions.push_back(detail::vec2_to_json(p));
  json j{{"target", detail::vec2_to_json(r.target)},
         {"template_ids", r.template_ids},
         {"template_positions", std::move(positions)},
         {"planner_weights", detail::vecx_to_json(r.planner_weights)},
         {"offline_weights", detail::vecx_to_json(r.offline_weights)},
         {"achieved_before", detail::vec2_to_json(r.achieved_before)},
         {"achieved_after", detail::vec2_to_json(r.achieved_after)},
         {"error_before", r.error_before},
         {"error_after", r.error_after}};
  j["chosen_n"] = r.chosen_n ? json(*r.chosen_n) : json(nullptr);
  return j;
}

CalibrationRecord record_from_json(const json& j, const std::string& ctx) {
  detail::check_keys(j, ctx,
                     {"target", "template_ids", "template_positions", "planner_weights",
                      "offline_weights", "achieved_before", "achieved_after", "error_before",
                      "error_after", "chosen_n"});
  CalibrationRecord r;
  r.target = detail::get_vec2(j["target"], ctx + ".target");
  if (!j["template_ids"].is_array()) throw SchemaError(ctx + ": template_ids must be an array");
  for (const auto& id : j["template_ids"]) {
    if (!id.is_string()) throw SchemaError(ctx + ": template ids must be strings");
    r.template_ids.push_back(id.get<std::string>());
  }
  if (!j["template_positions"].is_array())
    throw SchemaError(ctx + ": template_positions must be an array");
  for (const auto& p : j["template_positions"])
    r.template_positions.push_back(detail::get_vec2(p, ctx + ".template_positions"));
  r.planner_weights = detail::get_vecx(j["planner_weights"], ctx + ".planner_weights");
  r.offline_weights = detail::get_vecx(j["offline_weights"], ctx + ".offline_weights");
  r.achieved_before = detail::get_vec2(j["achieved_before"], ctx + ".achieved_before");
  r.achieved_after = detail::get_vec2(j["achieved_after"], ctx + ".achieved_after");
  r.error_before = detail::get_number(j["error_before"], ctx + ".error_before");
  r.error_after = detail::get_number(j["error_after"], ctx + ".error_after");
  if (!j["chosen_n"].is_null()) r.chosen_n = j["chosen_n"].get<int>();
  return r;
}

}  // namespace

void append_records(std::span<const CalibrationRecord> records,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw SchemaError("cannot open " + path.string() + " for append");
  for (const CalibrationRecord& r : records) out << record_to_json(r).dump() << "\n";
}

std::vector<CalibrationRecord> load_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path.string());
  std::vector<CalibrationRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string ctx = path.string() + ":" + std::to_string(line_no);
    records.push_back(record_from_json(detail::parse_json(line, ctx), ctx));
  }
  return records;
}

void save_online_model(const OnlineCalibrationModel& model, const std::filesystem::path& path) {
  json coeffs = json::array();
  for (int i = 0; i < model.num_templates; ++i)
    for (int c = 0; c < model.feature_dim; ++c) coeffs.push_back(model.coefficients(i, c));
  json j{{"layout_version", kFeatureLayoutVersion},
         {"num_templates", model.num_templates},
         {"feature_dim", model.feature_dim},
         {"ridge_lambda", model.ridge_lambda},
         {"training_record_count", model.training_record_count},
         {"coefficients", std::move(coeffs)}};
  detail::write_text_file(path, j.dump(2) + "\n");
}

OnlineCalibrationModel load_online_model(const std::filesystem::path& path) {
  const json j = detail::parse_json_file(path);
  const std::string ctx = path.string();
  detail::check_keys(j, ctx,
                     {"layout_version", "num_templates", "feature_dim", "ridge_lambda",
                      "training_record_count", "coefficients"});
  if (j["layout_version"].get<int>() != kFeatureLayoutVersion)
    throw SchemaError(ctx + ": unsupported feature layout version");

  OnlineCalibrationModel model;
  model.num_templates = j["num_templates"].get<int>();
  model.feature_dim = j["feature_dim"].get<int>();
  model.ridge_lambda = detail::get_number(j["ridge_lambda"], ctx + ".ridge_lambda");
  model.training_record_count = j["training_record_count"].get<int>();
  if (model.feature_dim != online_feature_dim(model.num_templates))
    throw SchemaError(ctx + ": feature_dim does not match the layout");

  const json& coeffs = j["coefficients"];
  if (!coeffs.is_array() ||
      coeffs.size() != static_cast<std::size_t>(model.num_templates * model.feature_dim))
    throw SchemaError(ctx + ": coefficients must hold num_templates * feature_dim values");
  model.coefficients.resize(model.num_templates, model.feature_dim);
  std::size_t idx = 0;
  for (int i = 0; i < model.num_templates; ++i)
    for (int c = 0; c < model.feature_dim; ++c)
      model.coefficients(i, c) = detail::get_number(coeffs[idx++], ctx + ".coefficients");
  return model;
}

}  // namespace reachsim
