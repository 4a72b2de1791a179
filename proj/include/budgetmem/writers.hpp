#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "budgetmem/objective.hpp"
#include "budgetmem/rng.hpp"
#include "budgetmem/serialize.hpp"
#include "budgetmem/solvers.hpp"

namespace budgetmem {

// Descending geometric grid lambda_max * (1 - eps)^j, extended until it drops
// to or below lambda_min.
struct threshold_grid {
  std::vector<double> lambdas;
  double epsilon = 0.1;

  static threshold_grid geometric(double lambda_max, double lambda_min, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw parameter_error("grid epsilon must lie in (0, 1)");
    if (!(lambda_max > 0.0) || !(lambda_min > 0.0) || lambda_min > lambda_max)
      throw parameter_error("grid needs 0 < lambda_min <= lambda_max");
    threshold_grid g;
    g.epsilon = epsilon;
    for (double l = lambda_max;; l *= 1.0 - epsilon) {
      g.lambdas.push_back(l);
      if (l <= lambda_min) break;
    }
    return g;
  }

  static threshold_grid single(double lambda) {
    threshold_grid g;
    g.lambdas = {lambda};
    return g;
  }

  // True when some grid point lies in [(1 - eps) * target, target].
  bool brackets(double target) const {
    return std::any_of(lambdas.begin(), lambdas.end(), [&](double l) {
      return l <= target * (1.0 + 1e-12) && l >= (1.0 - epsilon) * target * (1.0 - 1e-12);
    });
  }
};

// Grid used when the writer is not told OPT. Upper end is the largest
// singleton density; the lower end reaches below every value OPT/(2B) can take.
inline threshold_grid default_grid(const instance& inst, double budget, double epsilon = 0.1) {
  double max_density = 0.0, max_feasible_value = 0.0;
  for (std::size_t u = 0; u < inst.size(); ++u) {
    const double v = singleton_value(inst, u);
    max_density = std::max(max_density, v / inst.cost[u]);
    if (inst.cost[u] <= budget + budget_tolerance) max_feasible_value = std::max(max_feasible_value, v);
  }
  if (max_density <= 0.0) return threshold_grid::single(1.0);
  double lambda_min = max_density * epsilon / (2.0 * static_cast<double>(inst.size()));
  if (max_feasible_value > 0.0 && budget > 0.0)
    lambda_min = std::min(lambda_min, (1.0 - epsilon) * max_feasible_value / (2.0 * budget));
  return threshold_grid::geometric(max_density, lambda_min, epsilon);
}

struct trace_entry {
  int group_id = 0;
  std::optional<std::string> chosen;  // nullopt = discard
  double marginal = 0.0;
};

struct writer_result {
  store selection;
  std::vector<std::size_t> selected;  // sorted indices
  double value = 0.0;
  std::string method;
  std::optional<double> grid_lambda_used;
  std::vector<trace_entry> trace;
  std::vector<std::string> warnings;
};

// One JSON object per group decision, newline-terminated.
inline std::string trace_jsonl(const writer_result& r) {
  std::string out;
  for (const auto& t : r.trace)
    out += "{\"method\": " + json_string(r.method) + ", \"group_id\": " + std::to_string(t.group_id) +
           ", \"chosen\": " + (t.chosen ? json_string(*t.chosen) : std::string("null")) +
           ", \"marginal\": " + format_decimal(t.marginal) + "}\n";
  return out;
}

namespace detail {

inline writer_result finish(const instance& inst, const coverage_state& s, std::string method,
                            std::vector<trace_entry> trace) {
  writer_result r;
  r.selected = s.sorted_selection();
  r.selection = inst.make_store(r.selected, store_source::writer);
  r.value = coverage_value(inst, r.selected);
  r.method = std::move(method);
  r.trace = std::move(trace);
  return r;
}

inline bool fits(const instance& inst, const coverage_state& s, std::size_t u, double budget) {
  return s.spent + inst.cost[u] <= budget + budget_tolerance;
}

// One pass of the grouped value-threshold rule. `noise` (optional) scales each
// candidate's marginal before thresholding and argmax. `estimated_total`
// receives the sum of the (possibly noised) marginals that were accepted.
inline coverage_state gvt_pass(const instance& inst, double budget, double lambda,
                               const std::vector<double>* noise, std::vector<trace_entry>* trace,
                               double* estimated_total) {
  coverage_state s = empty_state(inst);
  double estimate = 0.0;
  for (std::size_t g = 0; g < inst.num_groups(); ++g) {
    std::optional<std::size_t> pick;
    double pick_gain = 0.0;
    for (auto u : inst.groups[g]) {
      if (!fits(inst, s, u, budget)) continue;
      double gain = gain_unchecked(inst, s.z, u);
      if (noise) gain *= (*noise)[u];
      if (!(gain / inst.cost[u] >= lambda)) continue;
      if (!pick || gain > pick_gain) {  // members are in id order, so ties keep the smaller id
        pick = u;
        pick_gain = gain;
      }
    }
    if (trace) trace->push_back({inst.group_ids[g], pick ? std::optional(inst.ids[*pick]) : std::nullopt, pick_gain});
    if (pick) {
      estimate += pick_gain;
      incorporate_in_place(inst, s, *pick);
    }
  }
  if (estimated_total) *estimated_total = estimate;
  return s;
}

inline std::vector<std::string> small_item_violations(const instance& inst, double budget) {
  std::vector<std::string> out;
  for (std::size_t u = 0; u < inst.size(); ++u)
    if (inst.cost[u] > budget / 2.0 + budget_tolerance)
      out.push_back("small-item condition violated by '" + inst.ids[u] + "' (cost " +
                    format_decimal(inst.cost[u]) + " > B/2); guarantee void");
  return out;
}

inline writer_result best_over_grid(const instance& inst, double budget, const threshold_grid& grid,
                                    const std::vector<double>* noise, std::string method) {
  if (grid.lambdas.empty()) throw parameter_error("threshold grid is empty");
  std::optional<coverage_state> best;
  std::vector<trace_entry> best_trace;
  double best_estimate = -1.0, best_lambda = 0.0;
  for (double lambda : grid.lambdas) {
    std::vector<trace_entry> trace;
    double estimate = 0.0;
    coverage_state s = gvt_pass(inst, budget, lambda, noise, &trace, &estimate);
    if (estimate > best_estimate) {
      best_estimate = estimate;
      best = std::move(s);
      best_trace = std::move(trace);
      best_lambda = lambda;
    }
  }
  writer_result r = finish(inst, *best, std::move(method), std::move(best_trace));
  r.grid_lambda_used = best_lambda;
  r.warnings = small_item_violations(inst, budget);
  return r;
}

}  // namespace detail

// Grouped value-threshold writer at a single threshold: per arriving group,
// among budget-feasible candidates with Delta/c >= lambda insert the one with
// the largest raw marginal. Insertion-only, at most one per group.
inline writer_result gvt_write(const instance& inst, double budget, double lambda) {
  std::vector<trace_entry> trace;
  coverage_state s = detail::gvt_pass(inst, budget, lambda, nullptr, &trace, nullptr);
  writer_result r = detail::finish(inst, s, "gvt", std::move(trace));
  r.grid_lambda_used = lambda;
  return r;
}

// Best of gvt_write over the grid. With every cost <= B/2 and a grid point in
// [(1-eps) OPT/(2B), OPT/(2B)], F(X) >= (1-eps) OPT/4. Small-item violations
// are reported in `warnings`.
inline writer_result gvt_best_over_grid(const instance& inst, double budget, const threshold_grid& grid) {
  return detail::best_over_grid(inst, budget, grid, nullptr, "gvt");
}

inline writer_result gvt_best_over_grid(const instance& inst, double budget) {
  return gvt_best_over_grid(inst, budget, default_grid(inst, budget));
}

// Log-normal multiplicative factors exp(sigma * N(0,1)), one per candidate.
// Each candidate is scored at exactly one decision point (its group's arrival),
// so this is one independent draw per (candidate, decision point).
inline std::vector<double> lognormal_factors(std::size_t n, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw parameter_error("sigma must be nonnegative");
  rng gen(seed);
  std::vector<double> f(n);
  for (auto& x : f) x = std::exp(sigma * gen.normal());
  return f;
}

// Same control flow as the grid GVT, but the writer only sees noised marginals;
// it also picks its grid point by its own (noised) value estimate. The
// reported value is the true F of the chosen store.
inline writer_result estimated_gvt_write(const instance& inst, double budget, const threshold_grid& grid,
                                         double sigma, std::uint64_t seed) {
  const std::vector<double> noise = lognormal_factors(inst.size(), sigma, seed);
  return detail::best_over_grid(inst, budget, grid, &noise, "estimated_gvt");
}

// Negative control: per group, the budget-feasible candidate with the largest
// positive marginal density; ties to the smaller id.
inline writer_result density_only_write(const instance& inst, double budget) {
  coverage_state s = empty_state(inst);
  std::vector<trace_entry> trace;
  for (std::size_t g = 0; g < inst.num_groups(); ++g) {
    std::optional<std::size_t> pick;
    double pick_density = 0.0, pick_gain = 0.0;
    for (auto u : inst.groups[g]) {
      if (!detail::fits(inst, s, u, budget)) continue;
      const double gain = gain_unchecked(inst, s.z, u);
      if (!(gain > 0.0)) continue;
      const double density = gain / inst.cost[u];
      if (!pick || density > pick_density) {
        pick = u;
        pick_density = density;
        pick_gain = gain;
      }
    }
    trace.push_back({inst.group_ids[g], pick ? std::optional(inst.ids[*pick]) : std::nullopt, pick_gain});
    if (pick) incorporate_in_place(inst, s, *pick);
  }
  return detail::finish(inst, s, "density_only", std::move(trace));
}

// Newest experience first, keep each group's raw span while it fits.
inline writer_result recency_raw_write(const instance& inst, double budget) {
  coverage_state s = empty_state(inst);
  std::vector<trace_entry> trace;
  for (std::size_t g = inst.num_groups(); g-- > 0;) {
    std::optional<std::size_t> pick;
    for (auto u : inst.groups[g])
      if (inst.kind[u] == candidate_kind::raw_span) {
        pick = u;
        break;
      }
    double gain = 0.0;
    if (pick && detail::fits(inst, s, *pick, budget)) {
      gain = gain_unchecked(inst, s.z, *pick);
      incorporate_in_place(inst, s, *pick);
    } else {
      pick.reset();
    }
    trace.push_back({inst.group_ids[g], pick ? std::optional(inst.ids[*pick]) : std::nullopt, gain});
  }
  return detail::finish(inst, s, "recency_raw", std::move(trace));
}

// ---------------------------------------------------------------------------
// Representation-restricted exact ablations

struct kind_restriction {
  std::set<candidate_kind> allowed;
  bool exclude_validity_bearing = false;

  bool admits(const instance& inst, std::size_t u) const {
    if (!allowed.contains(inst.kind[u])) return false;
    return !(exclude_validity_bearing && inst.validity_bearing[u]);
  }

  static kind_restriction all() {
    kind_restriction r;
    for (const auto& [k, _] : candidate_kind_names) r.allowed.insert(k);
    return r;
  }
  // Drops tombstones, compound updates, and every validity-bearing candidate.
  static kind_restriction no_tombstone() {
    kind_restriction r = all();
    r.allowed.erase(candidate_kind::tombstone);
    r.allowed.erase(candidate_kind::compound_update);
    r.exclude_validity_bearing = true;
    return r;
  }
  static kind_restriction only(candidate_kind k) { return {{k}, false}; }
};

// Sub-instance keeping only admitted candidates. Groups that lose every member
// disappear; units and weights are unchanged.
inline instance restrict_instance(const instance& inst, const std::vector<bool>& keep) {
  instance out;
  out.package_id = inst.package_id;
  out.unit_ids = inst.unit_ids;
  out.weight = inst.weight;
  out.klass = inst.klass;
  std::vector<std::ptrdiff_t> new_group(inst.num_groups(), -1);
  for (std::size_t u = 0; u < inst.size(); ++u) {
    if (!keep[u]) continue;
    const std::size_t g = inst.group_of[u];
    if (new_group[g] < 0) {
      new_group[g] = static_cast<std::ptrdiff_t>(out.groups.size());
      out.groups.emplace_back();
      out.group_ids.push_back(inst.group_ids[g]);
    }
    const std::size_t v = out.ids.size();
    out.index.emplace(inst.ids[u], v);
    out.ids.push_back(inst.ids[u]);
    out.cost.push_back(inst.cost[u]);
    out.kind.push_back(inst.kind[u]);
    out.validity_bearing.push_back(inst.validity_bearing[u]);
    out.group_of.push_back(static_cast<std::size_t>(new_group[g]));
    out.groups[static_cast<std::size_t>(new_group[g])].push_back(v);
    out.cover.push_back(inst.cover[u]);
  }
  return out;
}

inline instance restrict_instance(const instance& inst, const kind_restriction& restriction) {
  std::vector<bool> keep(inst.size());
  for (std::size_t u = 0; u < inst.size(); ++u) keep[u] = restriction.admits(inst, u);
  return restrict_instance(inst, keep);
}

// Exact optimum over the admitted sub-package. The returned store uses the
// original candidate ids; an empty sub-package gives OPT 0.
inline solve_result restricted_exact(const instance& inst, double budget, const kind_restriction& restriction,
                                     int k = 1) {
  if (restriction.allowed.empty()) throw parameter_error("allowed kinds must be nonempty");
  const instance sub = restrict_instance(inst, restriction);
  solve_result r = solve_exact_bnb(sub, budget, k);
  std::vector<std::size_t> mapped;
  for (auto v : r.selected) mapped.push_back(inst.index_of(sub.ids[v]));
  std::sort(mapped.begin(), mapped.end());
  r.selected = mapped;
  return r;
}

// ---------------------------------------------------------------------------
// Pruning policies for exported stores

enum class prune_policy { recency, salience, upper };

inline std::string_view to_string(prune_policy p) {
  switch (p) {
    case prune_policy::recency: return "recency";
    case prune_policy::salience: return "salience";
    case prune_policy::upper: return "upper";
  }
  return "?";
}

inline std::optional<prune_policy> prune_policy_from_name(std::string_view name) {
  if (name == "recency") return prune_policy::recency;
  if (name == "salience") return prune_policy::salience;
  if (name == "upper") return prune_policy::upper;
  return std::nullopt;
}

// An exported memory already embedded in a union instance.
struct embedded_export {
  std::size_t candidate;  // index in the union instance
  long long timestamp = 0;
  std::optional<double> salience;
};

// Recency keeps newest-first and salience keeps highest-salience-first, each
// skipping memories that no longer fit. Upper is the exact optimum over the
// exported memories alone (analysis-only).
inline std::vector<std::size_t> prune_exported(const instance& union_inst, const std::vector<embedded_export>& memories,
                                               double budget, prune_policy policy, int k = 1) {
  std::vector<std::size_t> kept;
  if (policy == prune_policy::upper) {
    std::vector<bool> keep(union_inst.size(), false);
    for (const auto& m : memories) keep[m.candidate] = true;
    const instance sub = restrict_instance(union_inst, keep);
    const solve_result r = solve_exact_bnb(sub, budget, k);
    for (auto v : r.selected) kept.push_back(union_inst.index_of(sub.ids[v]));
    std::sort(kept.begin(), kept.end());
    return kept;
  }

  std::vector<embedded_export> order = memories;
  if (policy == prune_policy::recency) {
    std::stable_sort(order.begin(), order.end(), [&](const embedded_export& a, const embedded_export& b) {
      return a.timestamp != b.timestamp ? a.timestamp > b.timestamp : a.candidate < b.candidate;
    });
  } else {
    for (const auto& m : order)
      if (!m.salience)
        throw parameter_error("salience pruning needs a salience score for '" + union_inst.ids[m.candidate] + "'");
    std::stable_sort(order.begin(), order.end(), [&](const embedded_export& a, const embedded_export& b) {
      return *a.salience != *b.salience ? *a.salience > *b.salience : a.candidate < b.candidate;
    });
  }
  double spent = 0.0;
  std::vector<int> per_group(union_inst.num_groups(), 0);
  for (const auto& m : order) {
    const std::size_t u = m.candidate;
    if (spent + union_inst.cost[u] > budget + budget_tolerance) continue;
    if (per_group[union_inst.group_of[u]] >= k) continue;
    spent += union_inst.cost[u];
    ++per_group[union_inst.group_of[u]];
    kept.push_back(u);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

}  // namespace budgetmem
