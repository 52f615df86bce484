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
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "reachsim/errors.hpp"
#include "reachsim/template_store.hpp"
#include "test_support.hpp"

using namespace reachsim;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "reachsim_store_tests";
  fs::create_directories(dir);
  return dir / name;
}

// Library fixture with hand-placed endpoints; ids a..e at distances
// {3, 1, 4, 1.5, 2} from the probe target.
TemplateLibrary toy_library(const ArmModel& model) {
  TemplateLibrary lib;
  lib.arm_model_hash = arm_model_digest(model);
  lib.generation_seed = 0;
  const char* ids[] = {"a", "b", "c", "d", "e"};
  const double dist[] = {3.0, 1.0, 4.0, 1.5, 2.0};
  for (int i = 0; i < 5; ++i) {
    Template t;
    t.id = ids[i];
    t.excitations = testing::zero_profile(model);
    t.final_position = {dist[i], 0.0};
    lib.templates.push_back(std::move(t));
  }
  return lib;
}

}  // namespace

TEST_CASE("generate_library: deterministic for a fixed seed") {
  const ArmModel model = testing::quick_arm();
  const TemplateLibrary a = generate_library(model, 8, 321);
  const TemplateLibrary b = generate_library(model, 8, 321);

  REQUIRE(a.templates.size() == 8);
  REQUIRE(b.templates.size() == 8);
  CHECK(a.arm_model_hash == b.arm_model_hash);
  for (int i = 0; i < 8; ++i) {
    CHECK(a.templates[i].id == b.templates[i].id);
    CHECK(a.templates[i].final_position == b.templates[i].final_position);
    CHECK(a.templates[i].excitations.samples == b.templates[i].excitations.samples);
  }

  const TemplateLibrary c = generate_library(model, 8, 322);
  bool any_differ = false;
  for (int i = 0; i < 8; ++i)
    any_differ |= (a.templates[i].final_position != c.templates[i].final_position);
  CHECK(any_differ);
}

TEST_CASE("generate_library: endpoints stay in the reachable annulus") {
  const ArmModel model = testing::quick_arm();
  const TemplateLibrary lib = generate_library(model, 50, 7);
  REQUIRE(lib.templates.size() == 50);

  const double outer = model.link_lengths.sum() + 1e-12;
  const double inner = std::abs(model.link_lengths[0] - model.link_lengths[1]) - 1e-12;
  std::set<std::string> ids;
  for (const Template& t : lib.templates) {
    CHECK(t.final_position.norm() <= outer);
    CHECK(t.final_position.norm() >= inner);
    CHECK(ids.insert(t.id).second);  // unique ids
  }
}

TEST_CASE("generate_library: zero amplitude collapses to the rest movement") {
  const ArmModel model = testing::quick_arm();
  const TemplateLibrary lib = generate_library(model, 5, 99, WaveformSpec{0.0});
  const Eigen::Vector2d rest_final =
      simulate(testing::zero_profile(model), model, standard_initial_state(model)).final_position;
  for (const Template& t : lib.templates) {
    CHECK(t.final_position == rest_final);
  }
}

TEST_CASE("generate_library: failing draws are resampled and counted") {
  // A front muscle that runs out of fiber length under strong drive.
  ArmModel model = testing::quick_arm();
  model.muscles[0].rest_length = 0.046;
  model.muscles[0].moment_arms = {0.05, 0.0};
  model.validate();

  int resamples = -1;
  const TemplateLibrary lib = generate_library(model, 10, 4, WaveformSpec{1.0}, &resamples);
  CHECK(lib.templates.size() == 10);
  CHECK(resamples > 0);
}

TEST_CASE("generate_library: rejects a non-positive count") {
  CHECK_THROWS_AS(generate_library(testing::quick_arm(), 0, 1), ConfigError);
}

TEST_CASE("nearest_templates: hand-checked ordering and tie breaking") {
  const ArmModel model = testing::quick_arm();
  TemplateLibrary lib = toy_library(model);
  const Eigen::Vector2d probe(0.0, 0.0);

  const std::vector<Template> four = nearest_templates(lib, probe, 4);
  REQUIRE(four.size() == 4);
  CHECK(four[0].id == "b");
  CHECK(four[1].id == "d");
  CHECK(four[2].id == "e");
  CHECK(four[3].id == "a");

  // n = size returns everything, sorted.
  const std::vector<Template> all = nearest_templates(lib, probe, 5);
  CHECK(all[4].id == "c");
  for (std::size_t i = 1; i < all.size(); ++i) {
    CHECK((all[i - 1].final_position - probe).norm() <=
          (all[i].final_position - probe).norm());
  }

  // Exact hit comes first.
  const std::vector<Template> hit = nearest_templates(lib, {1.5, 0.0}, 1);
  CHECK(hit[0].id == "d");

  // Result is a function of the set, not of storage order.
  std::reverse(lib.templates.begin(), lib.templates.end());
  const std::vector<Template> again = nearest_templates(lib, probe, 4);
  CHECK(again[0].id == "b");
  CHECK(again[3].id == "a");

  // Equal distances break toward the smaller id.
  TemplateLibrary tie = toy_library(model);
  tie.templates[2].final_position = {1.0, 0.0};  // "c" now ties with "b"
  const std::vector<Template> tied = nearest_templates(tie, probe, 2);
  CHECK(tied[0].id == "b");
  CHECK(tied[1].id == "c");
}

TEST_CASE("nearest_templates: empty library and oversized n are errors") {
  const ArmModel model = testing::quick_arm();
  TemplateLibrary empty;
  CHECK_THROWS_AS(nearest_templates(empty, {0.0, 0.0}, 1), ConfigError);
  const TemplateLibrary lib = toy_library(model);
  CHECK_THROWS_AS(nearest_templates(lib, {0.0, 0.0}, 6), ConfigError);
}

TEST_CASE("library persistence: JSON round-trip is lossless") {
  const ArmModel model = testing::quick_arm();
  const TemplateLibrary lib = generate_library(model, 12, 17);
  const fs::path path = temp_file("roundtrip.json");
  save_library(lib, path);
  const TemplateLibrary loaded = load_library(path);

  CHECK(loaded.arm_model_hash == lib.arm_model_hash);
  CHECK(loaded.generation_seed == lib.generation_seed);
  REQUIRE(loaded.templates.size() == lib.templates.size());
  for (std::size_t i = 0; i < lib.templates.size(); ++i) {
    CHECK(loaded.templates[i].id == lib.templates[i].id);
    CHECK(loaded.templates[i].final_position == lib.templates[i].final_position);
    CHECK(loaded.templates[i].excitations.dt == lib.templates[i].excitations.dt);
    CHECK(loaded.templates[i].excitations.samples == lib.templates[i].excitations.samples);
  }
}

TEST_CASE("library persistence: stored endpoints re-simulate within 1e-9") {
  const ArmModel model = testing::quick_arm();
  const TemplateLibrary lib = generate_library(model, 12, 17);
  const fs::path path = temp_file("verify.json");
  save_library(lib, path);
  TemplateLibrary loaded = load_library(path);
  CHECK_NOTHROW(verify_library(loaded, model));

  loaded.templates[3].final_position.x() += 1e-6;
  CHECK_THROWS_AS(verify_library(loaded, model), SchemaError);
}

TEST_CASE("library persistence: hash mismatch is refused") {
  const ArmModel model = testing::quick_arm();
  TemplateLibrary lib = generate_library(model, 3, 5);
  CHECK_NOTHROW(require_matching_arm(lib, model));

  lib.arm_model_hash[0] = lib.arm_model_hash[0] == '0' ? '1' : '0';
  CHECK_THROWS_AS(require_matching_arm(lib, model), HashMismatchError);

  ArmModel other = model;
  other.gravity = 3.7;
  const TemplateLibrary fresh = generate_library(model, 3, 5);
  CHECK_THROWS_AS(require_matching_arm(fresh, other), HashMismatchError);
}

TEST_CASE("library persistence: truncated file reports the byte offset") {
  const ArmModel model = testing::quick_arm();
  const TemplateLibrary lib = generate_library(model, 3, 5);
  const fs::path path = temp_file("truncated.json");
  save_library(lib, path);

  std::string text;
  {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text.substr(0, text.size() / 2);
  }
  try {
    load_library(path);
    FAIL("expected a SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("byte") != std::string::npos);
  }
}

TEST_CASE("library persistence: unknown keys are rejected") {
  const ArmModel model = testing::quick_arm();
  const TemplateLibrary lib = generate_library(model, 2, 5);
  const fs::path path = temp_file("unknown_key.json");
  save_library(lib, path);

  std::string text;
  {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  text.insert(1, "\"surprise\": 1, ");
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
  }
  CHECK_THROWS_AS(load_library(path), SchemaError);
}
