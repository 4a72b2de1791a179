#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "budgetmem/package.hpp"

namespace budgetmem {

struct cover_entry {
  std::size_t unit;
  double amount;
};

// Dense, index-based view of a package under one cost rule. Candidate indices
// follow canonical id order, so comparing sorted index vectors is the same as
// comparing sorted id sequences. Groups follow ascending group id.
struct instance {
  std::string package_id;
  std::vector<std::string> ids;
  std::vector<double> cost;
  std::vector<candidate_kind> kind;
  std::vector<bool> validity_bearing;
  std::vector<std::size_t> group_of;
  std::vector<int> group_ids;
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::vector<cover_entry>> cover;
  std::vector<std::string> unit_ids;
  std::vector<double> weight;
  std::vector<unit_class> klass;
  std::unordered_map<std::string, std::size_t> index;

  std::size_t size() const noexcept { return ids.size(); }
  std::size_t num_units() const noexcept { return weight.size(); }
  std::size_t num_groups() const noexcept { return groups.size(); }

  std::size_t index_of(const std::string& id) const {
    auto it = index.find(id);
    if (it == index.end()) throw unknown_id(id);
    return it->second;
  }

  std::vector<std::size_t> indices_of(const store& s) const {
    std::vector<std::size_t> out;
    out.reserve(s.selected.size());
    for (const auto& id : s.selected) out.push_back(index_of(id));
    std::sort(out.begin(), out.end());
    return out;
  }

  store make_store(std::span<const std::size_t> selected, store_source source) const {
    store s{{}, source};
    for (auto u : selected) s.selected.insert(ids[u]);
    return s;
  }

  double total_weight() const { return std::accumulate(weight.begin(), weight.end(), 0.0); }
};

inline instance compile(const package& input, const cost_rule& rule = {}) {
  package pkg = input;
  canonicalize(pkg);

  instance inst;
  inst.package_id = pkg.package_id;
  std::unordered_map<std::string, std::size_t> unit_index;
  for (const auto& u : pkg.evidence_units) {
    unit_index.emplace(u.id, inst.unit_ids.size());
    inst.unit_ids.push_back(u.id);
    inst.weight.push_back(u.weight);
    inst.klass.push_back(u.klass);
  }

  std::map<int, std::size_t> group_index;
  for (const auto& c : pkg.candidates) group_index.emplace(c.group_id, 0);
  for (auto& [gid, idx] : group_index) {
    idx = inst.group_ids.size();
    inst.group_ids.push_back(gid);
  }
  inst.groups.resize(inst.group_ids.size());

  for (const auto& c : pkg.candidates) {
    const std::size_t u = inst.ids.size();
    inst.index.emplace(c.id, u);
    inst.ids.push_back(c.id);
    inst.cost.push_back(candidate_cost(c, rule));
    inst.kind.push_back(c.kind);
    inst.validity_bearing.push_back(c.validity_flag);
    const std::size_t g = group_index.at(c.group_id);
    inst.group_of.push_back(g);
    inst.groups[g].push_back(u);
    std::vector<cover_entry> row;
    for (const auto& [unit, a] : c.coverage) {
      auto it = unit_index.find(unit);
      if (it == unit_index.end()) throw unknown_id(unit);
      if (a > 0.0) row.push_back({it->second, a});
    }
    inst.cover.push_back(std::move(row));
  }
  return inst;
}

// ---------------------------------------------------------------------------
// Clipped coverage F(X) = sum_r w_r * min(1, sum_{u in X} a_ur)

inline double clipped(double z) { return z < 1.0 ? z : 1.0; }

inline std::vector<double> coverage_vector(const instance& inst, std::span<const std::size_t> selected) {
  std::vector<std::size_t> sorted(selected.begin(), selected.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> z(inst.num_units(), 0.0);
  for (auto u : sorted) {
    if (u >= inst.size()) throw unknown_id("#" + std::to_string(u));
    for (const auto& e : inst.cover[u]) z[e.unit] += e.amount;
  }
  return z;
}

inline double value_of(const instance& inst, const std::vector<double>& z) {
  double value = 0.0;
  for (std::size_t r = 0; r < z.size(); ++r) value += inst.weight[r] * clipped(z[r]);
  return value;
}

// From-scratch evaluation; independent of insertion order.
inline double coverage_value(const instance& inst, std::span<const std::size_t> selected) {
  return value_of(inst, coverage_vector(inst, selected));
}

inline double coverage_value(const store& s, const package& pkg) {
  const instance inst = compile(pkg);
  const auto idx = inst.indices_of(s);
  return coverage_value(inst, idx);
}

// Incremental evaluation state. Value type: incorporate() returns a new state.
struct coverage_state {
  std::vector<double> z;
  double value = 0.0;
  double spent = 0.0;
  std::vector<std::size_t> selected;  // insertion order
  std::vector<char> member;
  std::vector<int> group_count;

  bool contains(std::size_t u) const { return member[u] != 0; }

  std::vector<std::size_t> sorted_selection() const {
    auto out = selected;
    std::sort(out.begin(), out.end());
    return out;
  }
};

inline coverage_state empty_state(const instance& inst) {
  coverage_state s;
  s.z.assign(inst.num_units(), 0.0);
  s.member.assign(inst.size(), 0);
  s.group_count.assign(inst.num_groups(), 0);
  return s;
}

// Delta(u | X) without the membership check; solvers call this in hot loops.
inline double gain_unchecked(const instance& inst, const std::vector<double>& z, std::size_t u) {
  double gain = 0.0;
  for (const auto& e : inst.cover[u]) {
    const double before = z[e.unit];
    if (before >= 1.0) continue;
    gain += inst.weight[e.unit] * (clipped(before + e.amount) - before);
  }
  return gain;
}

inline double marginal_gain(const instance& inst, const coverage_state& state, std::size_t u) {
  if (u >= inst.size()) throw unknown_id("#" + std::to_string(u));
  if (state.contains(u)) throw error("candidate '" + inst.ids[u] + "' is already in the store");
  return gain_unchecked(inst, state.z, u);
}

// In-place variant used by search code that owns its state.
inline void incorporate_in_place(const instance& inst, coverage_state& state, std::size_t u) {
  state.value += gain_unchecked(inst, state.z, u);
  for (const auto& e : inst.cover[u]) state.z[e.unit] += e.amount;
  state.spent += inst.cost[u];
  state.selected.push_back(u);
  state.member[u] = 1;
  ++state.group_count[inst.group_of[u]];
}

inline coverage_state incorporate(const instance& inst, const coverage_state& state, std::size_t u) {
  if (u >= inst.size()) throw unknown_id("#" + std::to_string(u));
  if (state.contains(u)) throw error("candidate '" + inst.ids[u] + "' is already in the store");
  coverage_state next = state;
  incorporate_in_place(inst, next, u);
  return next;
}

inline coverage_state state_of(const instance& inst, std::span<const std::size_t> selected) {
  coverage_state s = empty_state(inst);
  for (auto u : selected) s = incorporate(inst, s, u);
  return s;
}

inline double singleton_value(const instance& inst, std::size_t u) {
  double v = 0.0;
  for (const auto& e : inst.cover[u]) v += inst.weight[e.unit] * clipped(e.amount);
  return v;
}

// Feasibility on the compiled view: budget plus at most k per group.
inline bool is_feasible(const instance& inst, std::span<const std::size_t> selected, double budget, int k = 1) {
  double spent = 0.0;
  std::vector<int> count(inst.num_groups(), 0);
  for (auto u : selected) {
    if (u >= inst.size()) throw unknown_id("#" + std::to_string(u));
    spent += inst.cost[u];
    if (++count[inst.group_of[u]] > k) return false;
  }
  return spent <= budget + budget_tolerance;
}

// Covered mass of invalidation/abstention units: sum of min(1, z_r).
inline double invalidation_coverage(const instance& inst, std::span<const std::size_t> selected) {
  const auto z = coverage_vector(inst, selected);
  double total = 0.0;
  for (std::size_t r = 0; r < z.size(); ++r)
    if (is_validity_class(inst.klass[r])) total += clipped(z[r]);
  return total;
}

inline std::size_t validity_unit_count(const instance& inst) {
  return static_cast<std::size_t>(std::count_if(inst.klass.begin(), inst.klass.end(), is_validity_class));
}

}  // namespace budgetmem
