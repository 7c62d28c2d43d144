// src/json_util.hpp

// Copyright 2026  The pathdisc Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Strict JSON field access shared by the file loaders. Every accessor takes
// a `where` path ("nodes[3].pos") that ends up in the error message.

#pragma once

#include <json.hpp>

#include <initializer_list>
#include <string>
#include <string_view>
#include <type_traits>

#include "pathdisc/core.hpp"

namespace pathdisc::detail {

using Json = nlohmann::json;

inline Json parse_json(std::string_view text, std::string_view source) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ValidationError(std::string(source) + ": " + e.what());
  }
}

inline void expect_object(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
}

inline void reject_unknown(const Json& j, std::initializer_list<std::string_view> allowed,
                           const std::string& where) {
  expect_object(j, where);
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ValidationError(where + ": unknown field '" + key + "'");
  }
}

inline const Json& field(const Json& j, std::string_view key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) {
    throw ValidationError(where + ": missing field '" + std::string(key) + "'");
  }
  return *it;
}

inline std::string sub(const std::string& where, std::string_view key) {
  return where.empty() ? std::string(key) : where + "." + std::string(key);
}

inline std::string sub(const std::string& where, std::size_t i) {
  return where + "[" + std::to_string(i) + "]";
}

inline double as_number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw ValidationError(where + ": expected a number");
  return j.get<double>();
}

inline long long as_int(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ValidationError(where + ": expected an integer");
  return j.get<long long>();
}

inline std::string as_string(const Json& j, const std::string& where) {
  if (!j.is_string()) throw ValidationError(where + ": expected a string");
  return j.get<std::string>();
}

inline const Json& as_array(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ValidationError(where + ": expected an array");
  return j;
}

inline Vec as_vector(const Json& j, const std::string& where) {
  as_array(j, where);
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = as_number(j[i], sub(where, i));
  }
  return v;
}

inline Json to_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

/// Reads an optional numeric field into `out`, leaving it untouched when
/// absent. Integral targets must be non-negative integers.
template <typename T>
void read_field(const Json& doc, const char* name, T& out, const std::string& root) {
  const auto it = doc.find(name);
  if (it == doc.end()) return;
  const std::string where = root + ": " + name;
  if constexpr (std::is_floating_point_v<T>) {
    out = as_number(*it, where);
  } else {
    if (!it->is_number_unsigned()) throw ValidationError(where + ": expected a non-negative integer");
    out = it->template get<T>();
  }
}

}  // namespace pathdisc::detail
