#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "budgetmem/objective.hpp"
#include "budgetmem/serialize.hpp"

namespace budgetmem {

struct solve_result {
  double opt_value = 0.0;
  std::vector<std::size_t> selected;  // sorted candidate indices
  store opt_store;
  std::int64_t nodes_explored = 0;
  std::int64_t pruned_by_bound = 0;
  int k = 1;
  double budget = 0.0;
  bool exact = true;
  std::string solver;
};

struct bnb_options {
  // Multiplies the optimistic part of the bound. 1.0 is the admissible bound;
  // anything smaller is a fault injection hook for negative-control tests.
  double bound_scale = 1.0;
};

// Stores within this distance of the optimum count as tied.
inline constexpr double tie_tolerance = 1e-10;

// Current value plus a fractional-knapsack fill of `remaining` ordered by
// marginal density Delta(u|X)/c_u. Group constraints are ignored. Admissible
// because marginals only shrink as X grows.
inline double fractional_upper_bound(const instance& inst, const coverage_state& state,
                                     std::span<const std::size_t> remaining, double residual_budget) {
  struct item {
    double gain;
    double cost;
  };
  std::vector<item> items;
  items.reserve(remaining.size());
  for (auto u : remaining) {
    if (state.contains(u)) continue;
    const double g = gain_unchecked(inst, state.z, u);
    if (g > 0.0) items.push_back({g, inst.cost[u]});
  }
  std::sort(items.begin(), items.end(),
            [](const item& a, const item& b) { return a.gain * b.cost > b.gain * a.cost; });
  double bound = state.value;
  double room = std::max(0.0, residual_budget);
  for (const auto& it : items) {
    if (room <= 0.0) break;
    if (it.cost <= room) {
      bound += it.gain;
      room -= it.cost;
    } else {
      bound += it.gain * (room / it.cost);
      room = 0.0;
    }
  }
  return bound;
}

namespace detail {

class branch_and_bound {
 public:
  branch_and_bound(const instance& inst, double budget, int k, bnb_options opts)
      : inst_(inst), budget_(budget), k_(k), opts_(opts) {
    // Groups in experience order; members by descending singleton value,
    // ties by id. Discard is always the last branch.
    order_ = inst.groups;
    for (auto& members : order_)
      std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
        const double va = singleton_value(inst, a), vb = singleton_value(inst, b);
        return va != vb ? va > vb : a < b;
      });
    suffix_.resize(order_.size() + 1);
    for (std::size_t g = order_.size(); g-- > 0;) {
      suffix_[g] = suffix_[g + 1];
      suffix_[g].insert(suffix_[g].begin(), order_[g].begin(), order_[g].end());
    }
  }

  solve_result run() {
    coverage_state root = empty_state(inst_);
    best_value_ = 0.0;
    search(0, 0, 0, root);

    // Canonical tie-break: lexicographically smallest sorted id sequence among
    // stores reaching the optimum.
    std::vector<std::size_t> chosen;
    if (best_value_ > 0.0) {
      target_ = best_value_ - tie_tolerance;
      coverage_state start = empty_state(inst_);
      if (!lex_search(0, start, chosen)) chosen = best_set_;
    }
    std::sort(chosen.begin(), chosen.end());

    solve_result r;
    r.selected = chosen;
    r.opt_value = coverage_value(inst_, chosen);
    r.opt_store = inst_.make_store(chosen, store_source::solver);
    r.nodes_explored = nodes_;
    r.pruned_by_bound = pruned_;
    r.k = k_;
    r.budget = budget_;
    r.solver = "bnb";
    return r;
  }

 private:
  double bound(const coverage_state& s, std::span<const std::size_t> remaining) const {
    const double b = fractional_upper_bound(inst_, s, remaining, budget_ - s.spent);
    return s.value + opts_.bound_scale * (b - s.value);
  }

  bool fits(const coverage_state& s, std::size_t u) const {
    return s.spent + inst_.cost[u] <= budget_ + budget_tolerance;
  }

  void offer(const coverage_state& s) {
    if (s.value > best_value_ + tie_tolerance) {
      best_value_ = s.value;
      best_set_ = s.selected;
    }
  }

  // Node (g, pos, picked): group g is open with `picked` members chosen so far;
  // the next pick must come from order_[g][pos..].
  void search(std::size_t g, std::size_t pos, int picked, const coverage_state& s) {
    ++nodes_;
    offer(s);
    if (g == order_.size()) return;

    remaining_.clear();
    if (picked < k_) remaining_.assign(order_[g].begin() + static_cast<std::ptrdiff_t>(pos), order_[g].end());
    remaining_.insert(remaining_.end(), suffix_[g + 1].begin(), suffix_[g + 1].end());
    if (bound(s, remaining_) <= best_value_ + tie_tolerance) {
      ++pruned_;
      return;
    }

    if (picked < k_) {
      for (std::size_t q = pos; q < order_[g].size(); ++q) {
        const std::size_t u = order_[g][q];
        if (!fits(s, u)) continue;
        coverage_state child = s;
        incorporate_in_place(inst_, child, u);
        if (picked + 1 < k_)
          search(g, q + 1, picked + 1, child);
        else
          search(g + 1, 0, 0, child);
      }
    }
    search(g + 1, 0, 0, s);
  }

  // Depth-first over candidates in id order: stopping beats extending, and a
  // smaller next element beats a larger one, so the first hit is lex-minimal.
  bool lex_search(std::size_t from, const coverage_state& s, std::vector<std::size_t>& out) {
    ++nodes_;
    if (s.value >= target_) {
      out = s.selected;
      return true;
    }
    std::vector<std::size_t> rest;
    for (std::size_t j = from; j < inst_.size(); ++j)
      if (s.group_count[inst_.group_of[j]] < k_ && fits(s, j)) rest.push_back(j);
    for (std::size_t i = 0; i < rest.size(); ++i) {
      std::span<const std::size_t> tail(rest.data() + i, rest.size() - i);
      if (bound(s, tail) < target_) {
        ++pruned_;
        return false;
      }
      const std::size_t u = rest[i];
      coverage_state child = s;
      incorporate_in_place(inst_, child, u);
      if (lex_search(u + 1, child, out)) return true;
    }
    return false;
  }

  const instance& inst_;
  double budget_;
  int k_;
  bnb_options opts_;
  std::vector<std::vector<std::size_t>> order_;
  std::vector<std::vector<std::size_t>> suffix_;
  std::vector<std::size_t> remaining_;
  double best_value_ = 0.0;
  double target_ = 0.0;
  std::vector<std::size_t> best_set_;
  std::int64_t nodes_ = 0;
  std::int64_t pruned_ = 0;
};

}  // namespace detail

// Exact optimum of F over stores with cost <= budget and at most k members
// per group. Deterministic; ties go to the lexicographically smallest sorted
// id sequence.
inline solve_result solve_exact_bnb(const instance& inst, double budget, int k = 1, bnb_options opts = {}) {
  if (k < 1) throw parameter_error("k must be positive");
  if (!(budget >= 0.0)) throw parameter_error("budget must be nonnegative");
  solve_result r = detail::branch_and_bound(inst, budget, k, opts).run();
  // A shrunken bound can prune the optimum, so the result is no longer a proof.
  r.exact = opts.bound_scale >= 1.0;
  return r;
}

inline constexpr std::uint64_t default_max_assignments = 10'000'000;

// Number of per-group choices with at most k members (including discard).
inline std::uint64_t choices_per_group(std::size_t members, int k) {
  std::uint64_t total = 0, binom = 1;
  for (int j = 0; j <= k && static_cast<std::size_t>(j) <= members; ++j) {
    total += binom;
    binom = binom * (members - static_cast<std::size_t>(j)) / static_cast<std::uint64_t>(j + 1);
  }
  return total;
}

// Saturating product of per-group choice counts.
inline std::uint64_t assignment_count(const instance& inst, int k) {
  std::uint64_t product = 1;
  for (const auto& g : inst.groups) {
    const std::uint64_t c = choices_per_group(g.size(), k);
    if (product > std::numeric_limits<std::uint64_t>::max() / c) return std::numeric_limits<std::uint64_t>::max();
    product *= c;
  }
  return product;
}

// Exhaustive audit solver. Walks every per-group assignment with a mixed-radix
// counter and evaluates each one from a dense coverage matrix; it shares no
// search or bounding code with the branch-and-bound solver.
inline solve_result solve_exact_enumeration(const instance& inst, double budget, int k = 1,
                                            std::uint64_t max_assignments = default_max_assignments) {
  if (k < 1) throw parameter_error("k must be positive");
  const std::uint64_t count = assignment_count(inst, k);
  if (count > max_assignments)
    throw scope_error("instance '" + inst.package_id + "' has " + std::to_string(count) +
                      " assignments, above the audit cap of " + std::to_string(max_assignments) +
                      "; shrink the instance");

  const std::size_t n = inst.size(), m = inst.num_units();
  std::vector<double> dense(n * m, 0.0);
  for (std::size_t u = 0; u < n; ++u)
    for (const auto& e : inst.cover[u]) dense[u * m + e.unit] += e.amount;

  // Per-group option lists: every subset of size <= k, discard first.
  std::vector<std::vector<std::vector<std::size_t>>> options(inst.num_groups());
  for (std::size_t g = 0; g < inst.num_groups(); ++g) {
    const auto& members = inst.groups[g];
    auto& opts = options[g];
    opts.push_back({});
    for (std::size_t i = 0; i < opts.size(); ++i) {
      if (opts[i].size() == static_cast<std::size_t>(k)) continue;
      const std::size_t start = opts[i].empty() ? 0 : static_cast<std::size_t>(
          std::find(members.begin(), members.end(), opts[i].back()) - members.begin()) + 1;
      for (std::size_t j = start; j < members.size(); ++j) {
        auto next = opts[i];
        next.push_back(members[j]);
        opts.push_back(std::move(next));
      }
    }
  }

  std::vector<std::size_t> digit(inst.num_groups(), 0);
  std::vector<double> z(m);
  std::vector<std::size_t> chosen, best;
  double best_value = -1.0;
  std::int64_t visited = 0;

  for (;;) {
    ++visited;
    chosen.clear();
    double spent = 0.0;
    for (std::size_t g = 0; g < digit.size(); ++g)
      for (auto u : options[g][digit[g]]) {
        chosen.push_back(u);
        spent += inst.cost[u];
      }
    if (spent <= budget + budget_tolerance) {
      std::fill(z.begin(), z.end(), 0.0);
      std::sort(chosen.begin(), chosen.end());
      for (auto u : chosen)
        for (std::size_t r = 0; r < m; ++r) z[r] += dense[u * m + r];
      double value = 0.0;
      for (std::size_t r = 0; r < m; ++r) value += inst.weight[r] * std::min(1.0, z[r]);
      if (value > best_value + tie_tolerance ||
          (std::abs(value - best_value) <= tie_tolerance &&
           std::lexicographical_compare(chosen.begin(), chosen.end(), best.begin(), best.end()))) {
        best_value = std::max(best_value, value);
        best = chosen;
      }
    }
    std::size_t g = 0;
    while (g < digit.size() && ++digit[g] == options[g].size()) digit[g++] = 0;
    if (g == digit.size()) break;
  }

  solve_result r;
  r.selected = best;
  r.opt_value = best_value < 0.0 ? 0.0 : best_value;
  r.opt_store = inst.make_store(best, store_source::solver);
  r.nodes_explored = visited;
  r.k = k;
  r.budget = budget;
  r.solver = "enumeration";
  return r;
}

struct certification_row {
  std::string package_id;
  double budget = 0.0;
  int k = 1;
  double bnb_value = 0.0;
  double audit_value = 0.0;
  bool equal = false;
  double max_diff = 0.0;
  std::int64_t nodes_explored = 0;
};

// Runs both exact solvers and compares objective values after rounding to the
// serialization grid. Tied stores with different ids still certify.
inline certification_row certify(const instance& inst, double budget, int k = 1, bnb_options opts = {},
                                 std::uint64_t max_assignments = default_max_assignments) {
  const solve_result bnb = solve_exact_bnb(inst, budget, k, opts);
  const solve_result audit = solve_exact_enumeration(inst, budget, k, max_assignments);
  certification_row row;
  row.package_id = inst.package_id;
  row.budget = budget;
  row.k = k;
  row.bnb_value = bnb.opt_value;
  row.audit_value = audit.opt_value;
  row.max_diff = std::abs(quantize(bnb.opt_value) - quantize(audit.opt_value));
  row.equal = row.max_diff == 0.0;
  row.nodes_explored = bnb.nodes_explored;
  return row;
}

}  // namespace budgetmem
