#pragma once

#include <cstdio>
#include <set>
#include <string>
#include <string_view>

#include <json.hpp>

#include "budgetmem/package.hpp"

namespace budgetmem {

// Fixed 6-decimal rendering shared by package files and CSV output.
inline std::string format_decimal(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", quantize(x));
  return buf;
}

inline std::string json_string(std::string_view s) { return nlohmann::json(std::string(s)).dump(); }

// Canonical JSON rendering of a package: ids sorted, reals at 6 decimals,
// one array element per line. Identical packages give identical bytes.
inline std::string serialize_package(const package& input) {
  package pkg = input;
  canonicalize(pkg);

  std::string out;
  out += "{\n";
  out += "  \"package_id\": " + json_string(pkg.package_id) + ",\n";

  out += "  \"candidates\": [";
  for (std::size_t i = 0; i < pkg.candidates.size(); ++i) {
    const auto& c = pkg.candidates[i];
    out += i == 0 ? "\n" : ",\n";
    out += "    {\"candidate_id\": " + json_string(c.id) + ", \"group_id\": " + std::to_string(c.group_id) +
           ", \"kind\": " + json_string(to_string(c.kind)) + ", \"text\": " + json_string(c.text);
    if (c.explicit_cost) out += ", \"explicit_cost\": " + format_decimal(*c.explicit_cost);
    out += "}";
  }
  out += pkg.candidates.empty() ? "],\n" : "\n  ],\n";

  out += "  \"groups\": [";
  for (std::size_t i = 0; i < pkg.groups.size(); ++i) {
    const auto& g = pkg.groups[i];
    out += i == 0 ? "\n" : ",\n";
    out += "    {\"group_id\": " + std::to_string(g.group_id) + ", \"members\": [";
    for (std::size_t m = 0; m < g.members.size(); ++m) out += (m ? ", " : "") + json_string(g.members[m]);
    out += "]}";
  }
  out += pkg.groups.empty() ? "],\n" : "\n  ],\n";

  out += "  \"evidence_units\": [";
  for (std::size_t i = 0; i < pkg.evidence_units.size(); ++i) {
    const auto& u = pkg.evidence_units[i];
    out += i == 0 ? "\n" : ",\n";
    out += "    {\"unit_id\": " + json_string(u.id) + ", \"description\": " + json_string(u.description) +
           ", \"unit_class\": " + json_string(to_string(u.klass)) + "}";
  }
  out += pkg.evidence_units.empty() ? "],\n" : "\n  ],\n";

  out += "  \"weights\": {";
  for (std::size_t i = 0; i < pkg.evidence_units.size(); ++i) {
    const auto& u = pkg.evidence_units[i];
    out += (i == 0 ? "\n    " : ",\n    ") + json_string(u.id) + ": " + format_decimal(u.weight);
  }
  out += pkg.evidence_units.empty() ? "},\n" : "\n  },\n";

  out += "  \"coverage\": {";
  bool first = true;
  for (const auto& c : pkg.candidates) {
    out += (first ? "\n    " : ",\n    ") + json_string(c.id) + ": {";
    first = false;
    bool first_unit = true;
    for (const auto& [unit, a] : c.coverage) {
      out += (first_unit ? "" : ", ") + json_string(unit) + ": " + format_decimal(a);
      first_unit = false;
    }
    out += "}";
  }
  out += pkg.candidates.empty() ? "},\n" : "\n  },\n";

  out += "  \"objective_kind\": \"clipped\",\n";
  out += "  \"metadata\": {\"generator\": " + json_string(pkg.metadata.generator) +
         ", \"seed\": " + std::to_string(pkg.metadata.seed) +
         ", \"distribution\": " + json_string(pkg.metadata.distribution) + "}\n";
  out += "}\n";
  return out;
}

namespace detail {

using nlohmann::json;

inline const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw parse_error(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw parse_error(path + "." + key, "missing field");
  return *it;
}

inline std::string get_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw parse_error(path, "expected a string");
  return v.get<std::string>();
}

inline double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw parse_error(path, "expected a number");
  return v.get<double>();
}

inline long long get_integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw parse_error(path, "expected an integer");
  return v.get<long long>();
}

inline const json& get_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw parse_error(path, "expected an array");
  return v;
}

inline const json& get_object(const json& v, const std::string& path) {
  if (!v.is_object()) throw parse_error(path, "expected an object");
  return v;
}

inline json parse_json(std::string_view bytes) {
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw parse_error("$", e.what(), e.byte);
  }
}

}  // namespace detail

// Parses a package document. Schema errors carry a field path such as
// `$.candidates[3].candidate_id`; syntax errors carry the byte offset.
inline package parse_package(std::string_view bytes) {
  using detail::json;
  const json doc = detail::parse_json(bytes);
  detail::get_object(doc, "$");

  package pkg;
  pkg.package_id = detail::get_string(detail::require(doc, "package_id", "$"), "$.package_id");

  std::set<std::string> seen;
  const json& cands = detail::get_array(detail::require(doc, "candidates", "$"), "$.candidates");
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const std::string path = "$.candidates[" + std::to_string(i) + "]";
    const json& cj = detail::get_object(cands[i], path);
    candidate c;
    c.id = detail::get_string(detail::require(cj, "candidate_id", path), path + ".candidate_id");
    if (!seen.insert(c.id).second) throw parse_error(path + ".candidate_id", "duplicate candidate id '" + c.id + "'");
    c.group_id = static_cast<int>(detail::get_integer(detail::require(cj, "group_id", path), path + ".group_id"));
    const std::string kind = detail::get_string(detail::require(cj, "kind", path), path + ".kind");
    auto k = enum_from_name(candidate_kind_names, kind);
    if (!k) throw parse_error(path + ".kind", "unknown candidate kind '" + kind + "'");
    c.kind = *k;
    c.text = detail::get_string(detail::require(cj, "text", path), path + ".text");
    if (auto it = cj.find("explicit_cost"); it != cj.end() && !it->is_null())
      c.explicit_cost = detail::get_number(*it, path + ".explicit_cost");
    pkg.candidates.push_back(std::move(c));
  }

  const json& groups = detail::get_array(detail::require(doc, "groups", "$"), "$.groups");
  std::set<int> group_ids;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const std::string path = "$.groups[" + std::to_string(i) + "]";
    group g;
    g.group_id = static_cast<int>(detail::get_integer(detail::require(groups[i], "group_id", path), path + ".group_id"));
    if (!group_ids.insert(g.group_id).second)
      throw parse_error(path + ".group_id", "duplicate group id " + std::to_string(g.group_id));
    const json& members = detail::get_array(detail::require(groups[i], "members", path), path + ".members");
    for (std::size_t m = 0; m < members.size(); ++m)
      g.members.push_back(detail::get_string(members[m], path + ".members[" + std::to_string(m) + "]"));
    pkg.groups.push_back(std::move(g));
  }

  const json& weights = detail::get_object(detail::require(doc, "weights", "$"), "$.weights");
  const json& units = detail::get_array(detail::require(doc, "evidence_units", "$"), "$.evidence_units");
  std::set<std::string> unit_ids;
  for (std::size_t i = 0; i < units.size(); ++i) {
    const std::string path = "$.evidence_units[" + std::to_string(i) + "]";
    evidence_unit u;
    u.id = detail::get_string(detail::require(units[i], "unit_id", path), path + ".unit_id");
    if (!unit_ids.insert(u.id).second) throw parse_error(path + ".unit_id", "duplicate unit id '" + u.id + "'");
    u.description = detail::get_string(detail::require(units[i], "description", path), path + ".description");
    const std::string klass = detail::get_string(detail::require(units[i], "unit_class", path), path + ".unit_class");
    auto kc = enum_from_name(unit_class_names, klass);
    if (!kc) throw parse_error(path + ".unit_class", "unknown unit class '" + klass + "'");
    u.klass = *kc;
    auto w = weights.find(u.id);
    if (w == weights.end()) throw parse_error("$.weights." + u.id, "missing weight");
    u.weight = detail::get_number(*w, "$.weights." + u.id);
    pkg.evidence_units.push_back(std::move(u));
  }
  for (const auto& [unit, _] : weights.items())
    if (!unit_ids.contains(unit)) throw parse_error("$.weights." + unit, "weight for unknown unit");

  const json& coverage = detail::get_object(detail::require(doc, "coverage", "$"), "$.coverage");
  for (const auto& [cid, row] : coverage.items()) {
    const std::string path = "$.coverage." + cid;
    auto it = std::find_if(pkg.candidates.begin(), pkg.candidates.end(),
                           [&](const candidate& c) { return c.id == cid; });
    if (it == pkg.candidates.end()) throw parse_error(path, "coverage row for unknown candidate");
    detail::get_object(row, path);
    for (const auto& [unit, value] : row.items()) {
      if (!unit_ids.contains(unit)) throw parse_error(path + "." + unit, "coverage references unknown unit");
      it->coverage[unit] = detail::get_number(value, path + "." + unit);
    }
  }

  if (auto it = doc.find("objective_kind"); it != doc.end()) {
    const std::string kind = detail::get_string(*it, "$.objective_kind");
    if (kind != "clipped") throw parse_error("$.objective_kind", "unsupported objective kind '" + kind + "'");
  }

  if (auto it = doc.find("metadata"); it != doc.end()) {
    const json& meta = detail::get_object(*it, "$.metadata");
    if (auto g = meta.find("generator"); g != meta.end())
      pkg.metadata.generator = detail::get_string(*g, "$.metadata.generator");
    if (auto s = meta.find("seed"); s != meta.end()) {
      if (!s->is_number_unsigned() && !s->is_number_integer())
        throw parse_error("$.metadata.seed", "expected an integer");
      pkg.metadata.seed = s->get<std::uint64_t>();
    }
    if (auto d = meta.find("distribution"); d != meta.end())
      pkg.metadata.distribution = detail::get_string(*d, "$.metadata.distribution");
  }

  canonicalize(pkg);
  return pkg;
}

}  // namespace budgetmem
