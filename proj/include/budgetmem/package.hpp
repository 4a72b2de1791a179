#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "budgetmem/error.hpp"

namespace budgetmem {

enum class candidate_kind {
  raw_span,
  atomic_fact,
  entity_summary,
  graph_edge,
  temporal_event,
  rule,
  tombstone,
  compound_update,
  external,
};

inline constexpr std::array<std::pair<candidate_kind, std::string_view>, 9> candidate_kind_names{{
    {candidate_kind::raw_span, "raw_span"},
    {candidate_kind::atomic_fact, "atomic_fact"},
    {candidate_kind::entity_summary, "entity_summary"},
    {candidate_kind::graph_edge, "graph_edge"},
    {candidate_kind::temporal_event, "temporal_event"},
    {candidate_kind::rule, "rule"},
    {candidate_kind::tombstone, "tombstone"},
    {candidate_kind::compound_update, "compound_update"},
    {candidate_kind::external, "external"},
}};

enum class unit_class { fact, temporal, preference, invalidation, abstention, provenance };

inline constexpr std::array<std::pair<unit_class, std::string_view>, 6> unit_class_names{{
    {unit_class::fact, "fact"},
    {unit_class::temporal, "temporal"},
    {unit_class::preference, "preference"},
    {unit_class::invalidation, "invalidation"},
    {unit_class::abstention, "abstention"},
    {unit_class::provenance, "provenance"},
}};

// Only the clipped transform h(z) = min(1, z) ships.
enum class objective_kind { clipped };

enum class store_source { solver, writer, exported, pruned };

template <typename Enum, std::size_t N>
std::string_view enum_name(const std::array<std::pair<Enum, std::string_view>, N>& table, Enum e) {
  for (const auto& [value, name] : table)
    if (value == e) return name;
  return "?";
}

template <typename Enum, std::size_t N>
std::optional<Enum> enum_from_name(const std::array<std::pair<Enum, std::string_view>, N>& table,
                                   std::string_view name) {
  for (const auto& [value, n] : table)
    if (n == name) return value;
  return std::nullopt;
}

inline std::string_view to_string(candidate_kind k) { return enum_name(candidate_kind_names, k); }
inline std::string_view to_string(unit_class c) { return enum_name(unit_class_names, c); }

inline bool is_validity_class(unit_class c) {
  return c == unit_class::invalidation || c == unit_class::abstention;
}

// Rounds to the 6-decimal grid used by serialization. Values on the grid
// survive a serialize/parse round trip bit-for-bit.
inline double quantize(double x) {
  const double q = std::round(x * 1e6) / 1e6;
  return q == 0.0 ? 0.0 : q;
}

struct candidate {
  std::string id;
  int group_id = 0;
  candidate_kind kind = candidate_kind::raw_span;
  std::string text;
  std::optional<double> explicit_cost;
  std::map<std::string, double> coverage;  // unit id -> a_ur
  // Derived by canonicalize(): true for tombstones, compound updates, and
  // anything covering an invalidation or abstention unit.
  bool validity_flag = false;

  friend bool operator==(const candidate&, const candidate&) = default;
};

struct group {
  int group_id = 0;
  std::vector<std::string> members;

  friend bool operator==(const group&, const group&) = default;
};

struct evidence_unit {
  std::string id;
  std::string description;
  unit_class klass = unit_class::fact;
  double weight = 0.0;

  friend bool operator==(const evidence_unit&, const evidence_unit&) = default;
};

struct package_metadata {
  std::string generator;
  std::uint64_t seed = 0;
  std::string distribution;

  friend bool operator==(const package_metadata&, const package_metadata&) = default;
};

struct package {
  std::string package_id;
  std::vector<candidate> candidates;
  std::vector<group> groups;
  std::vector<evidence_unit> evidence_units;
  objective_kind objective = objective_kind::clipped;
  package_metadata metadata;

  const candidate* find_candidate(std::string_view id) const {
    auto it = std::lower_bound(candidates.begin(), candidates.end(), id,
                               [](const candidate& c, std::string_view v) { return c.id < v; });
    if (it != candidates.end() && it->id == id) return &*it;
    // Fall back to a scan for packages that are not canonical yet.
    for (const auto& c : candidates)
      if (c.id == id) return &c;
    return nullptr;
  }

  const evidence_unit* find_unit(std::string_view id) const {
    for (const auto& u : evidence_units)
      if (u.id == id) return &u;
    return nullptr;
  }

  friend bool operator==(const package&, const package&) = default;
};

struct store {
  std::set<std::string> selected;
  store_source source = store_source::solver;

  friend bool operator==(const store&, const store&) = default;
};

// ---------------------------------------------------------------------------
// Cost rules

enum class cost_rule_kind { word, byte_overhead };

struct cost_rule {
  cost_rule_kind kind = cost_rule_kind::word;
  double overhead = 8.0;   // byte_overhead: fixed per-record charge
  double divisor = 24.0;   // byte_overhead: bytes per unit

  static cost_rule word() { return {}; }
  static cost_rule byte_overhead() { return {cost_rule_kind::byte_overhead}; }
};

inline std::string_view to_string(cost_rule_kind k) {
  return k == cost_rule_kind::word ? "word" : "byte_overhead";
}

// Accepts both the JSON spelling (byte_overhead) and the CLI one (byte-overhead).
inline std::optional<cost_rule_kind> cost_rule_from_name(std::string_view name) {
  if (name == "word") return cost_rule_kind::word;
  if (name == "byte_overhead" || name == "byte-overhead") return cost_rule_kind::byte_overhead;
  return std::nullopt;
}

inline std::size_t word_count(std::string_view text) {
  std::size_t count = 0;
  bool in_word = false;
  for (unsigned char ch : text) {
    const bool space = ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\f' || ch == '\v';
    if (!space && !in_word) ++count;
    in_word = !space;
  }
  return count;
}

inline double text_cost(std::string_view text, const cost_rule& rule) {
  if (rule.kind == cost_rule_kind::word)
    return static_cast<double>(std::max<std::size_t>(1, word_count(text)));
  return rule.overhead + std::ceil(static_cast<double>(text.size()) / rule.divisor);
}

// Explicit cost wins; otherwise the rule is applied to the serialized text.
inline double candidate_cost(const candidate& cand, const cost_rule& rule = {}) {
  if (cand.explicit_cost) {
    const double c = *cand.explicit_cost;
    if (!(c > 0.0) || !std::isfinite(c))
      throw invalid_candidate("candidate '" + cand.id + "' has non-positive explicit cost");
    return c;
  }
  if (cand.text.empty())
    throw invalid_candidate("candidate '" + cand.id + "' has empty text and no explicit cost");
  return text_cost(cand.text, rule);
}

// ---------------------------------------------------------------------------
// Canonical form

// Sorts ids, group members, and units into canonical order and derives
// validity flags. Idempotent.
inline void canonicalize(package& pkg) {
  std::sort(pkg.candidates.begin(), pkg.candidates.end(),
            [](const candidate& a, const candidate& b) { return a.id < b.id; });
  std::sort(pkg.groups.begin(), pkg.groups.end(),
            [](const group& a, const group& b) { return a.group_id < b.group_id; });
  for (auto& g : pkg.groups) std::sort(g.members.begin(), g.members.end());
  std::sort(pkg.evidence_units.begin(), pkg.evidence_units.end(),
            [](const evidence_unit& a, const evidence_unit& b) { return a.id < b.id; });

  std::set<std::string, std::less<>> validity_units;
  for (const auto& u : pkg.evidence_units)
    if (is_validity_class(u.klass)) validity_units.insert(u.id);
  for (auto& c : pkg.candidates) {
    c.validity_flag = c.kind == candidate_kind::tombstone || c.kind == candidate_kind::compound_update;
    for (const auto& [unit, a] : c.coverage)
      if (a > 0.0 && validity_units.contains(unit)) c.validity_flag = true;
  }
}

// Rebuilds the group list from candidate group ids.
inline void rebuild_groups(package& pkg) {
  std::map<int, std::vector<std::string>> by_group;
  for (const auto& c : pkg.candidates) by_group[c.group_id].push_back(c.id);
  pkg.groups.clear();
  for (auto& [gid, members] : by_group) pkg.groups.push_back({gid, std::move(members)});
}

// ---------------------------------------------------------------------------
// Validation

struct violation {
  std::string code;
  std::string candidate_id;
  std::string unit_id;
  std::string message;
};

inline std::vector<violation> validate_package(const package& pkg) {
  std::vector<violation> out;
  auto add = [&](std::string code, std::string cand, std::string unit, std::string msg) {
    out.push_back({std::move(code), std::move(cand), std::move(unit), std::move(msg)});
  };

  std::map<std::string, int> candidate_seen;
  for (const auto& c : pkg.candidates) {
    if (c.id.empty()) add("empty_id", c.id, "", "candidate with empty id");
    if (++candidate_seen[c.id] == 2) add("duplicate_candidate", c.id, "", "duplicate candidate id");
  }
  std::map<std::string, int> unit_seen;
  for (const auto& u : pkg.evidence_units) {
    if (++unit_seen[u.id] == 2) add("duplicate_unit", "", u.id, "duplicate evidence unit id");
    if (!(u.weight >= 0.0) || !std::isfinite(u.weight))
      add("negative_weight", "", u.id, "weight must be a finite nonnegative number");
  }

  std::set<int> group_ids;
  std::map<std::string, int> membership;
  for (const auto& g : pkg.groups) {
    if (!group_ids.insert(g.group_id).second)
      add("duplicate_group", "", "", "duplicate group id " + std::to_string(g.group_id));
    for (const auto& m : g.members) {
      ++membership[m];
      const candidate* c = pkg.find_candidate(m);
      if (c == nullptr)
        add("unknown_member", m, "", "group " + std::to_string(g.group_id) + " lists an unknown candidate");
      else if (c->group_id != g.group_id)
        add("group_mismatch", m, "", "candidate group_id disagrees with group " + std::to_string(g.group_id));
    }
  }

  for (const auto& c : pkg.candidates) {
    const int n = membership.contains(c.id) ? membership.at(c.id) : 0;
    if (n != 1)
      add("partition", c.id, "", "candidate appears in " + std::to_string(n) + " groups, expected exactly 1");
    if (c.explicit_cost) {
      if (!(*c.explicit_cost > 0.0) || !std::isfinite(*c.explicit_cost))
        add("nonpositive_cost", c.id, "", "explicit cost must be positive");
    } else if (c.text.empty()) {
      add("nonpositive_cost", c.id, "", "empty text and no explicit cost");
    }
    for (const auto& [unit, a] : c.coverage) {
      if (!unit_seen.contains(unit)) add("unknown_unit", c.id, unit, "coverage references an unknown unit");
      if (!(a >= 0.0 && a <= 1.0)) add("coverage_range", c.id, unit, "coverage entry outside [0, 1]");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Feasibility

inline constexpr double budget_tolerance = 1e-9;

inline bool is_feasible(const store& s, const package& pkg, double budget, int k = 1,
                        const cost_rule& rule = {}) {
  double spent = 0.0;
  std::map<int, int> per_group;
  for (const auto& id : s.selected) {
    const candidate* c = pkg.find_candidate(id);
    if (c == nullptr) throw unknown_id(id);
    spent += candidate_cost(*c, rule);
    ++per_group[c->group_id];
  }
  if (spent > budget + budget_tolerance) return false;
  return std::all_of(per_group.begin(), per_group.end(), [k](const auto& kv) { return kv.second <= k; });
}

}  // namespace budgetmem
