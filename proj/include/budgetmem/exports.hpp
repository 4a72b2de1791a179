#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "budgetmem/package.hpp"
#include "budgetmem/serialize.hpp"

namespace budgetmem {

// Memories written by an external system, with per-rule measured costs and
// adjudicated coverage rows keyed by evidence-unit id.
struct exported_memory {
  std::string memory_id;
  std::string text;
  long long timestamp = 0;
  std::optional<double> salience;
  std::optional<double> word_cost;
  std::optional<double> byte_overhead_cost;
  std::map<std::string, double> coverage;

  std::optional<double> cost_for(cost_rule_kind k) const {
    return k == cost_rule_kind::word ? word_cost : byte_overhead_cost;
  }

  friend bool operator==(const exported_memory&, const exported_memory&) = default;
};

struct exported_store {
  std::string system;
  std::vector<exported_memory> memories;

  friend bool operator==(const exported_store&, const exported_store&) = default;
};

inline std::string serialize_export(const exported_store& ex) {
  std::vector<exported_memory> mems = ex.memories;
  std::sort(mems.begin(), mems.end(),
            [](const exported_memory& a, const exported_memory& b) { return a.memory_id < b.memory_id; });
  std::string out = "{\n  \"system\": " + json_string(ex.system) + ",\n  \"memories\": [";
  for (std::size_t i = 0; i < mems.size(); ++i) {
    const auto& m = mems[i];
    out += i == 0 ? "\n" : ",\n";
    out += "    {\"memory_id\": " + json_string(m.memory_id) + ", \"text\": " + json_string(m.text) +
           ", \"timestamp\": " + std::to_string(m.timestamp) +
           ", \"salience\": " + (m.salience ? format_decimal(*m.salience) : std::string("null")) + ", \"cost\": {";
    bool first = true;
    if (m.word_cost) {
      out += "\"word\": " + format_decimal(*m.word_cost);
      first = false;
    }
    if (m.byte_overhead_cost) out += std::string(first ? "" : ", ") + "\"byte_overhead\": " + format_decimal(*m.byte_overhead_cost);
    out += "}, \"coverage\": {";
    first = true;
    for (const auto& [unit, a] : m.coverage) {
      out += (first ? "" : ", ") + json_string(unit) + ": " + format_decimal(a);
      first = false;
    }
    out += "}}";
  }
  out += mems.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

inline exported_store parse_export(std::string_view bytes) {
  using detail::json;
  const json doc = detail::parse_json(bytes);
  detail::get_object(doc, "$");
  exported_store ex;
  ex.system = detail::get_string(detail::require(doc, "system", "$"), "$.system");
  const json& mems = detail::get_array(detail::require(doc, "memories", "$"), "$.memories");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < mems.size(); ++i) {
    const std::string path = "$.memories[" + std::to_string(i) + "]";
    const json& mj = detail::get_object(mems[i], path);
    exported_memory m;
    m.memory_id = detail::get_string(detail::require(mj, "memory_id", path), path + ".memory_id");
    if (!seen.insert(m.memory_id).second) throw parse_error(path + ".memory_id", "duplicate memory id '" + m.memory_id + "'");
    m.text = detail::get_string(detail::require(mj, "text", path), path + ".text");
    m.timestamp = detail::get_integer(detail::require(mj, "timestamp", path), path + ".timestamp");
    if (auto s = mj.find("salience"); s != mj.end() && !s->is_null()) m.salience = detail::get_number(*s, path + ".salience");
    if (auto c = mj.find("cost"); c != mj.end() && !c->is_null()) {
      detail::get_object(*c, path + ".cost");
      for (const auto& [key, value] : c->items()) {
        auto rule = cost_rule_from_name(key);
        if (!rule) throw parse_error(path + ".cost." + key, "unknown cost rule");
        const double v = detail::get_number(value, path + ".cost." + key);
        if (!(v > 0.0)) throw parse_error(path + ".cost." + key, "cost must be positive");
        (*rule == cost_rule_kind::word ? m.word_cost : m.byte_overhead_cost) = v;
      }
    }
    const json& cov = detail::get_object(detail::require(mj, "coverage", path), path + ".coverage");
    for (const auto& [unit, value] : cov.items()) {
      const double a = detail::get_number(value, path + ".coverage." + unit);
      if (!(a >= 0.0 && a <= 1.0)) throw parse_error(path + ".coverage." + unit, "coverage outside [0, 1]");
      m.coverage[unit] = a;
    }
    ex.memories.push_back(std::move(m));
  }
  return ex;
}

inline std::string union_candidate_id(const exported_store& ex, const exported_memory& m) {
  return "x." + ex.system + "." + m.memory_id;
}

}  // namespace budgetmem
