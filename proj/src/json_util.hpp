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

// Internal helpers shared by the serialization code. Not installed.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <json.hpp>
#include <set>
#include <sstream>
#include <string>

#include "reachsim/errors.hpp"

namespace reachsim::detail {

using nlohmann::json;

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string fnv1a64_hex(std::string_view bytes) {
  static const char* digits = "0123456789abcdef";
  std::uint64_t h = fnv1a64(bytes);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

/// Parse with SchemaError wrapping; nlohmann reports the failing byte.
inline json parse_json(const std::string& text, const std::string& context) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(context + ": " + e.what() + " (byte " + std::to_string(e.byte) + ")");
  }
}

inline json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_json(buf.str(), path.string());
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError("cannot write " + path.string());
  out << text;
}

/// Rejects non-objects, missing required keys and any unknown key.
inline void check_keys(const json& j, const std::string& context,
                       std::initializer_list<const char*> required,
                       std::initializer_list<const char*> optional = {}) {
  if (!j.is_object()) throw SchemaError(context + ": expected an object");
  for (const char* key : required) {
    if (!j.contains(key)) throw SchemaError(context + ": missing key '" + key + "'");
  }
  std::set<std::string> allowed;
  for (const char* key : required) allowed.insert(key);
  for (const char* key : optional) allowed.insert(key);
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key()))
      throw SchemaError(context + ": unknown key '" + item.key() + "'");
  }
}

inline double get_number(const json& j, const std::string& context) {
  if (!j.is_number()) throw SchemaError(context + ": expected a number");
  return j.get<double>();
}

inline Eigen::Vector2d get_vec2(const json& j, const std::string& context) {
  if (!j.is_array() || j.size() != 2) throw SchemaError(context + ": expected [x, y]");
  return {get_number(j[0], context), get_number(j[1], context)};
}

inline json vec2_to_json(const Eigen::Vector2d& v) { return json::array({v.x(), v.y()}); }

inline Eigen::VectorXd get_vecx(const json& j, const std::string& context) {
  if (!j.is_array()) throw SchemaError(context + ": expected an array of numbers");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = get_number(j[i], context);
  return v;
}

inline json vecx_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace reachsim::detail
