#pragma once

// Shared fixtures for the test binaries: tiny package builders, a hand-rolled
// random package source, and a brute-force optimum that works on the package
// struct directly (no compiled instance, no solver code).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "budgetmem/objective.hpp"
#include "budgetmem/package.hpp"

namespace testing_support {

using namespace budgetmem;

inline evidence_unit unit(std::string id, double weight, unit_class klass = unit_class::fact) {
  return {std::move(id), "", klass, weight};
}

inline candidate cand(std::string id, int group, double cost, std::map<std::string, double> coverage,
                      candidate_kind kind = candidate_kind::atomic_fact) {
  candidate c;
  c.id = std::move(id);
  c.group_id = group;
  c.kind = kind;
  c.text = c.id;
  c.explicit_cost = cost;
  c.coverage = std::move(coverage);
  return c;
}

inline package make_package(std::string id, std::vector<evidence_unit> units, std::vector<candidate> cands) {
  package p;
  p.package_id = std::move(id);
  p.evidence_units = std::move(units);
  p.candidates = std::move(cands);
  rebuild_groups(p);
  canonicalize(p);
  return p;
}

// Four candidates over three units; every candidate in its own group.
inline package objective_micro() {
  return make_package("objective-micro",
                      {unit("r1", 0.7), unit("r2", 1.2), unit("r3", 0.4)},
                      {cand("c1", 1, 1, {{"r1", 0.5}, {"r2", 0.3}}), cand("c2", 2, 1, {{"r2", 0.9}}),
                       cand("c3", 3, 1, {{"r1", 0.6}, {"r3", 1.0}}), cand("c4", 4, 1, {{"r3", 0.25}, {"r2", 0.2}})});
}

// Three groups of three candidates over four units.
inline package solver_micro() {
  return make_package(
      "solver-micro", {unit("u1", 1.0), unit("u2", 0.8), unit("u3", 0.5), unit("u4", 0.3)},
      {cand("g1a", 1, 3, {{"u1", 1.0}, {"u2", 0.5}}), cand("g1b", 1, 1, {{"u1", 0.6}}), cand("g1c", 1, 2, {{"u3", 1.0}}),
       cand("g2a", 2, 2, {{"u2", 1.0}}), cand("g2b", 2, 1, {{"u2", 0.4}, {"u4", 1.0}}),
       cand("g2c", 2, 4, {{"u1", 1.0}, {"u2", 1.0}, {"u3", 1.0}}), cand("g3a", 3, 1, {{"u3", 0.5}}),
       cand("g3b", 3, 2, {{"u1", 0.4}, {"u4", 0.5}}), cand("g3c", 3, 3, {{"u2", 0.7}, {"u3", 0.7}})});
}

struct random_spec {
  int min_groups = 1, max_groups = 4;
  int min_per_group = 1, max_per_group = 3;
  int min_units = 1, max_units = 5;
  double max_cost = 4.0;
  double max_weight = 1.5;
  double density = 0.5;  // chance a candidate covers a given unit
};

// Random package on the 6-decimal grid, drawn from std::mt19937_64 so it shares
// nothing with the library generator.
inline package random_package(std::uint64_t seed, const random_spec& spec = {}) {
  std::mt19937_64 gen(seed);
  auto uni_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); };
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); };
  const int n_units = uni_int(spec.min_units, spec.max_units);
  std::vector<evidence_unit> units;
  for (int r = 0; r < n_units; ++r) {
    const auto klass = static_cast<unit_class>(uni_int(0, 5));
    units.push_back(unit("r" + std::to_string(r), quantize(uni(0.0, spec.max_weight)), klass));
  }
  std::vector<candidate> cands;
  const int groups = uni_int(spec.min_groups, spec.max_groups);
  for (int g = 0; g < groups; ++g) {
    const int n = uni_int(spec.min_per_group, spec.max_per_group);
    for (int i = 0; i < n; ++i) {
      std::map<std::string, double> cov;
      for (int r = 0; r < n_units; ++r)
        if (uni(0.0, 1.0) < spec.density) cov["r" + std::to_string(r)] = quantize(uni(0.05, 1.0));
      const auto kind = static_cast<candidate_kind>(uni_int(0, 7));
      cands.push_back(cand("g" + std::to_string(g) + "c" + std::to_string(i), g, quantize(uni(0.25, spec.max_cost)),
                           std::move(cov), kind));
    }
  }
  return make_package("random-" + std::to_string(seed), std::move(units), std::move(cands));
}

// F straight from the definition on the package struct.
inline double direct_value(const package& pkg, const std::vector<std::string>& ids) {
  std::map<std::string, double> z;
  for (const auto& id : ids)
    for (const auto& [unit_id, a] : pkg.find_candidate(id)->coverage) z[unit_id] += a;
  double v = 0.0;
  for (const auto& u : pkg.evidence_units) v += u.weight * std::min(1.0, z[u.id]);
  return v;
}

struct brute_result {
  double value = 0.0;
  std::vector<std::string> ids;  // lexicographically smallest optimal id sequence
};

// Every subset of candidates (bitmask); only for packages with <= 20 candidates.
inline brute_result brute_force_opt(const package& pkg, double budget, int k = 1) {
  const std::size_t n = pkg.candidates.size();
  brute_result best;
  bool have = false;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<std::string> ids;
    double cost = 0.0;
    std::map<int, int> per_group;
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (!(mask >> i & 1)) continue;
      const auto& c = pkg.candidates[i];
      ids.push_back(c.id);
      cost += *c.explicit_cost;
      ok = ++per_group[c.group_id] <= k;
    }
    if (!ok || cost > budget + 1e-9) continue;
    std::sort(ids.begin(), ids.end());
    const double v = direct_value(pkg, ids);
    if (!have || v > best.value + 1e-10) {
      best = {v, ids};
      have = true;
    } else if (std::abs(v - best.value) <= 1e-10 && ids < best.ids) {
      best.ids = ids;
    }
  }
  return best;
}

inline std::vector<std::string> ids_of(const instance& inst, const std::vector<std::size_t>& idx) {
  std::vector<std::string> out;
  for (auto u : idx) out.push_back(inst.ids[u]);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace testing_support
