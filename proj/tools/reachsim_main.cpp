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

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "json_util.hpp"
#include "reachsim/calibration.hpp"
#include "reachsim/errors.hpp"
#include "reachsim/experiment.hpp"
#include "reachsim/planner.hpp"
#include "reachsim/template_store.hpp"
#include "serialize.hpp"

namespace fs = std::filesystem;
using reachsim::detail::json;

namespace {

struct GlobalOpts {
  std::string arm;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::string format = "both";
};

reachsim::ArmModel require_arm(const GlobalOpts& g) {
  if (g.arm.empty()) throw reachsim::ConfigError("--arm <file> is required for this command");
  return reachsim::load_arm_model(g.arm);
}

fs::path out_path(const GlobalOpts& g, const std::string& name) {
  fs::create_directories(g.out);
  return fs::path(g.out) / name;
}

void emit(const GlobalOpts& g, const json& payload, const std::string& csv) {
  if (g.format == "csv")
    std::cout << csv;
  else
    std::cout << payload.dump(2) << "\n";
}

int run_gen_templates(const GlobalOpts& g, int count, double amplitude_max,
                      const std::string& out_name) {
  const reachsim::ArmModel model = require_arm(g);
  int resamples = 0;
  const reachsim::TemplateLibrary library = reachsim::generate_library(
      model, count, g.seed.value_or(1), reachsim::WaveformSpec{amplitude_max}, &resamples);
  const fs::path path = out_path(g, out_name);
  reachsim::save_library(library, path);

  Eigen::Vector2d lo = library.templates.front().final_position, hi = lo;
  for (const reachsim::Template& t : library.templates) {
    lo = lo.cwiseMin(t.final_position);
    hi = hi.cwiseMax(t.final_position);
  }
  std::cout << "wrote " << library.templates.size() << " templates to " << path.string()
            << " (resampled " << resamples << ")\n"
            << "endpoint bounding box: [" << lo.x() << ", " << lo.y() << "] .. [" << hi.x()
            << ", " << hi.y() << "]\n";
  return 0;
}

int run_plan(const GlobalOpts& g, const std::string& library_path,
             const std::vector<double>& target_xy, int num_templates,
             const std::string& out_name) {
  const reachsim::ArmModel model = require_arm(g);
  const reachsim::TemplateLibrary library = reachsim::load_library(library_path);
  reachsim::require_matching_arm(library, model);

  const Eigen::Vector2d target(target_xy[0], target_xy[1]);
  const reachsim::Plan plan = reachsim::plan(target, library, num_templates);
  reachsim::detail::write_text_file(out_path(g, out_name),
                                    reachsim::detail::plan_to_json(plan).dump() + "\n");

  json summary{{"target", reachsim::detail::vec2_to_json(plan.target)},
               {"template_ids", plan.template_ids},
               {"weights", reachsim::detail::vecx_to_json(plan.weights)},
               {"predicted_position", reachsim::detail::vec2_to_json(plan.predicted_position)},
               {"plan_file", out_path(g, out_name).string()}};
  std::string csv = "target_x,target_y,predicted_x,predicted_y\n" + std::to_string(target.x()) +
                    "," + std::to_string(target.y()) + "," +
                    std::to_string(plan.predicted_position.x()) + "," +
                    std::to_string(plan.predicted_position.y()) + "\n";
  emit(g, summary, csv);
  return 0;
}

int run_simulate(const GlobalOpts& g, const std::string& plan_path,
                 const std::string& library_path, const std::string& template_id,
                 const std::string& traj_name) {
  const reachsim::ArmModel model = require_arm(g);

  reachsim::ExcitationProfile profile;
  std::optional<Eigen::Vector2d> target;
  if (!plan_path.empty()) {
    const reachsim::Plan plan =
        reachsim::detail::plan_from_json(reachsim::detail::parse_json_file(plan_path), plan_path);
    profile = plan.blended_excitations;
    target = plan.target;
  } else if (!library_path.empty() && !template_id.empty()) {
    const reachsim::TemplateLibrary library = reachsim::load_library(library_path);
    reachsim::require_matching_arm(library, model);
    bool found = false;
    for (const reachsim::Template& t : library.templates) {
      if (t.id == template_id) {
        profile = t.excitations;
        found = true;
        break;
      }
    }
    if (!found)
      throw reachsim::ConfigError("template " + template_id + " not found in " + library_path);
  } else {
    throw reachsim::ConfigError("simulate needs --plan, or --library with --template-id");
  }

  const reachsim::Trajectory traj =
      reachsim::simulate(profile, model, reachsim::standard_initial_state(model));

  if (!traj_name.empty()) {
    std::ostringstream csv;
    csv << "time,q1,q2,hand_x,hand_y\n";
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
      csv << traj.states[i].time << ',' << traj.states[i].q[0] << ',' << traj.states[i].q[1]
          << ',' << traj.hand_positions[i].x() << ',' << traj.hand_positions[i].y() << '\n';
    }
    reachsim::detail::write_text_file(out_path(g, traj_name), csv.str());
  }

  json payload{{"final_position", reachsim::detail::vec2_to_json(traj.final_position)}};
  std::string csv = "final_x,final_y";
  std::string csv_row =
      std::to_string(traj.final_position.x()) + "," + std::to_string(traj.final_position.y());
  if (target) {
    const double err = (traj.final_position - *target).norm();
    payload["target"] = reachsim::detail::vec2_to_json(*target);
    payload["error"] = err;
    csv += ",error";
    csv_row += "," + std::to_string(err);
  }
  emit(g, payload, csv + "\n" + csv_row + "\n");
  return 0;
}

int run_calibrate(const GlobalOpts& g, const std::string& library_path,
                  const std::vector<double>& target_xy, int num_templates,
                  const reachsim::NGrid& grid, const std::string& record_name) {
  const reachsim::ArmModel model = require_arm(g);
  const reachsim::TemplateLibrary library = reachsim::load_library(library_path);
  reachsim::require_matching_arm(library, model);

  const Eigen::Vector2d target(target_xy[0], target_xy[1]);
  const reachsim::Plan plan = reachsim::plan(target, library, num_templates);
  const reachsim::OfflineResult result =
      reachsim::offline_calibrate(target, plan, model, library, grid);
  reachsim::append_records({&result.record, 1}, out_path(g, record_name));

  json payload{{"error_before", result.record.error_before},
               {"error_after", result.record.error_after},
               {"chosen_n", result.record.chosen_n ? json(*result.record.chosen_n) : json(nullptr)},
               {"weights_before", reachsim::detail::vecx_to_json(result.record.planner_weights)},
               {"weights_after", reachsim::detail::vecx_to_json(result.record.offline_weights)},
               {"failed_candidates", result.failed_candidates}};
  std::string csv = "error_before,error_after,chosen_n\n" +
                    std::to_string(result.record.error_before) + "," +
                    std::to_string(result.record.error_after) + "," +
                    (result.record.chosen_n ? std::to_string(*result.record.chosen_n)
                                            : std::string("none")) +
                    "\n";
  emit(g, payload, csv);
  return 0;
}

int run_experiment_cmd(const GlobalOpts& g, const std::string& config_path) {
  reachsim::ExperimentConfig config = reachsim::load_experiment_config(config_path);
  std::vector<reachsim::CalibrationRecord> records;
  const reachsim::ExperimentReport report = reachsim::run_experiment(config, g.seed, &records);

  fs::create_directories(g.out);
  const fs::path base(g.out);
  bool wrote_csv = false, wrote_json = false;
  if (g.format != "json") {
    reachsim::write_report_csv(report, base / config.outputs.report_csv);
    wrote_csv = true;
  }
  if (g.format != "csv") {
    reachsim::write_report_json(report, base / config.outputs.report_json);
    wrote_json = true;
  }
  reachsim::append_records(records, base / config.outputs.records);

  std::cout << "mean error (plan):    " << report.mean_plan << "\n"
            << "mean error (offline): " << report.mean_offline << "\n";
  for (std::size_t r = 0; r < report.round_means.size(); ++r)
    std::cout << "mean error (online round " << (r + 1) << "): " << report.round_means[r] << "\n";
  if (wrote_csv) std::cout << "report: " << (base / config.outputs.report_csv).string() << "\n";
  if (wrote_json) std::cout << "report: " << (base / config.outputs.report_json).string() << "\n";
  if (report.partial) {
    std::cout << "PARTIAL REPORT: " << report.partial_reason << "\n";
    return 3;
  }
  return 0;
}

int run_plot_data(const GlobalOpts& g, const std::string& report_path,
                  const std::string& out_name) {
  const reachsim::ExperimentReport report = reachsim::load_report_json(report_path);
  const std::string csv = reachsim::plot_data_csv(report);
  reachsim::detail::write_text_file(out_path(g, out_name), csv);
  std::cout << "wrote " << out_path(g, out_name).string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"muscle-driven planar reaching: template planning and calibration"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--arm", g.arm, "arm parameter file (JSON)");
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "seed override");
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_option("--format", g.format, "stdout/report format")
      ->check(CLI::IsMember({"csv", "json", "both"}))
      ->capture_default_str();

  // gen-templates
  auto* gen = app.add_subcommand("gen-templates", "generate a template library");
  gen->fallthrough();
  int gen_count = 50;
  double amplitude_max = 0.6;
  std::string gen_out = "library.json";
  gen->add_option("--count", gen_count, "number of templates")->capture_default_str();
  gen->add_option("--amplitude-max", amplitude_max, "per-muscle excitation amplitude bound")
      ->capture_default_str();
  gen->add_option("--name", gen_out, "library file name")->capture_default_str();

  // plan
  auto* plan_cmd = app.add_subcommand("plan", "plan a movement toward a target");
  plan_cmd->fallthrough();
  std::string library_path;
  std::vector<double> target_xy;
  int num_templates = 4;
  std::string plan_out = "plan.json";
  plan_cmd->add_option("--library", library_path, "template library file")->required();
  plan_cmd->add_option("--target", target_xy, "target x y [m]")->expected(2)->required();
  plan_cmd->add_option("--num-templates", num_templates, "templates per plan")
      ->capture_default_str();
  plan_cmd->add_option("--name", plan_out, "plan file name")->capture_default_str();

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "run forward dynamics");
  sim_cmd->fallthrough();
  std::string sim_plan, sim_library, sim_template, sim_traj;
  sim_cmd->add_option("--plan", sim_plan, "plan file to execute");
  sim_cmd->add_option("--library", sim_library, "template library file");
  sim_cmd->add_option("--template-id", sim_template, "template to replay");
  sim_cmd->add_option("--trajectory", sim_traj, "also write this trajectory CSV");

  // calibrate
  auto* cal_cmd = app.add_subcommand("calibrate", "plan plus trial-and-error calibration");
  cal_cmd->fallthrough();
  std::string cal_library;
  std::vector<double> cal_target;
  int cal_templates = 4;
  reachsim::NGrid grid;
  std::string record_name = "records.jsonl";
  cal_cmd->add_option("--library", cal_library, "template library file")->required();
  cal_cmd->add_option("--target", cal_target, "target x y [m]")->expected(2)->required();
  cal_cmd->add_option("--num-templates", cal_templates, "templates per plan")
      ->capture_default_str();
  cal_cmd->add_option("--n-min", grid.min, "smallest correction gain n")->capture_default_str();
  cal_cmd->add_option("--n-max", grid.max, "largest correction gain n")->capture_default_str();
  cal_cmd->add_option("--records", record_name, "record log file name")->capture_default_str();

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "run the full three-stage experiment");
  exp_cmd->fallthrough();
  std::string config_path;
  exp_cmd->add_option("--config", config_path, "experiment config (JSON)")->required();

  // plot-data
  auto* plot_cmd = app.add_subcommand("plot-data", "tidy CSV for plotting the learning curve");
  plot_cmd->fallthrough();
  std::string report_path, plot_out = "plot.csv";
  plot_cmd->add_option("--report", report_path, "experiment report (JSON)")->required();
  plot_cmd->add_option("--name", plot_out, "plot CSV file name")->capture_default_str();

  try {
    app.parse(argc, argv);
    if (*seed_opt) g.seed = seed_value;

    if (*gen) return run_gen_templates(g, gen_count, amplitude_max, gen_out);
    if (*plan_cmd) return run_plan(g, library_path, target_xy, num_templates, plan_out);
    if (*sim_cmd) return run_simulate(g, sim_plan, sim_library, sim_template, sim_traj);
    if (*cal_cmd) return run_calibrate(g, cal_library, cal_target, cal_templates, grid, record_name);
    if (*exp_cmd) return run_experiment_cmd(g, config_path);
    if (*plot_cmd) return run_plot_data(g, report_path, plot_out);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const reachsim::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return 4;
  } catch (const reachsim::SimulationError& e) {
    std::cerr << "simulation error: " << e.what() << "\n";
    return 3;
  } catch (const reachsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const reachsim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
