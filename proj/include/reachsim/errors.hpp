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

#include <stdexcept>
#include <string>

namespace reachsim {

/// Base class for all reachsim errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or unexpected file content: parse failures, unknown keys,
/// wrong shapes. CLI exit code 4.
class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& msg) : Error(msg) {}
};

/// A template library paired with an arm it was not generated from.
class HashMismatchError : public SchemaError {
 public:
  explicit HashMismatchError(const std::string& msg) : SchemaError(msg) {}
};

/// Semantically invalid inputs: bad parameter values, mismatched grids,
/// dimension mismatches, empty libraries. CLI exit code 2.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Non-physical state reached during forward dynamics (fiber length or
/// contraction speed outside the model's domain). CLI exit code 3.
class SimulationError : public Error {
 public:
  explicit SimulationError(const std::string& msg) : Error(msg), step_index(-1) {}
  SimulationError(const std::string& msg, long step) : Error(msg), step_index(step) {}

  /// Index of the integration step that failed, or -1 when not applicable.
  long step_index;
};

/// Calibration geometry with an undefined angle (actual position at the
/// origin, or a template coincident with it). Callers fall back to a zero
/// correction.
class DegenerateGeometryError : public Error {
 public:
  explicit DegenerateGeometryError(const std::string& msg) : Error(msg) {}
};

/// Normal equations without a unique solution (zero ridge on rank-deficient
/// features).
class RankDeficiencyError : public Error {
 public:
  explicit RankDeficiencyError(const std::string& msg) : Error(msg) {}
};

}  // namespace reachsim
