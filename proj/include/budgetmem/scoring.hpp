#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "budgetmem/exports.hpp"
#include "budgetmem/objective.hpp"
#include "budgetmem/rng.hpp"
#include "budgetmem/serialize.hpp"
#include "budgetmem/solvers.hpp"
#include "budgetmem/writers.hpp"

namespace budgetmem {

// P+(Y): the package plus one `external` candidate per exported memory, each in
// a fresh singleton group. Units and weights are unchanged.
inline package build_union_package(const package& pkg, const std::vector<exported_store>& exports,
                                   const cost_rule& rule = {}) {
  package out = pkg;
  int next_group = 0;
  for (const auto& c : pkg.candidates) next_group = std::max(next_group, c.group_id + 1);
  for (const auto& ex : exports) {
    for (const auto& m : ex.memories) {
      candidate c;
      c.id = union_candidate_id(ex, m);
      if (out.find_candidate(c.id) != nullptr) throw error("union candidate id '" + c.id + "' collides with an existing id");
      c.group_id = next_group++;
      c.kind = candidate_kind::external;
      c.text = m.text;
      c.explicit_cost = m.cost_for(rule.kind);
      if (!c.explicit_cost) c.explicit_cost = text_cost(m.text, rule);
      for (const auto& [unit, a] : m.coverage) {
        if (pkg.find_unit(unit) == nullptr)
          throw unknown_id(unit);
        c.coverage[unit] = a;
      }
      out.candidates.push_back(std::move(c));
      out.groups.push_back({out.candidates.back().group_id, {out.candidates.back().id}});
    }
  }
  if (!exports.empty()) out.package_id = pkg.package_id + "+union";
  canonicalize(out);
  return out;
}

inline package build_union_package(const package& pkg, const exported_store& ex, const cost_rule& rule = {}) {
  return build_union_package(pkg, std::vector<exported_store>{ex}, rule);
}

// ---------------------------------------------------------------------------
// Ratios

enum class denominator_kind { package, union_package };

inline std::string_view to_string(denominator_kind k) { return k == denominator_kind::package ? "package" : "union"; }

struct ratio_report {
  std::string method;
  double budget = 0.0;
  cost_rule_kind rule = cost_rule_kind::word;
  int k = 1;
  double value = 0.0;
  double denominator = 0.0;
  std::optional<double> ratio;  // null when the denominator is 0
  denominator_kind kind = denominator_kind::package;
  double invalidation_coverage = 0.0;
  std::optional<std::pair<double, double>> ci;
  std::string denominator_solver = "bnb";
  bool certified = true;
  bool analysis_only = false;
};

inline std::optional<double> safe_ratio(double value, double denominator) {
  if (!(denominator > 0.0)) return std::nullopt;
  return value / denominator;
}

// rho_P(X) = F(X) / OPT_P(B). The store must be feasible.
inline ratio_report package_ratio(const instance& inst, std::span<const std::size_t> selected, double budget, int k,
                                  std::string method, std::optional<solve_result> opt = std::nullopt,
                                  cost_rule_kind rule = cost_rule_kind::word) {
  if (!is_feasible(inst, selected, budget, k)) throw error("store scored by '" + method + "' is infeasible");
  if (!opt) opt = solve_exact_bnb(inst, budget, k);
  ratio_report r;
  r.method = std::move(method);
  r.budget = budget;
  r.rule = rule;
  r.k = k;
  r.value = coverage_value(inst, selected);
  r.denominator = opt->opt_value;
  r.ratio = safe_ratio(r.value, r.denominator);
  r.invalidation_coverage = invalidation_coverage(inst, selected);
  r.denominator_solver = opt->solver;
  r.certified = opt->exact;
  return r;
}

inline ratio_report package_ratio(const store& s, const package& pkg, double budget, int k = 1,
                                  const cost_rule& rule = {}) {
  const instance inst = compile(pkg, rule);
  const auto idx = inst.indices_of(s);
  return package_ratio(inst, idx, budget, k, "store", std::nullopt, rule.kind);
}

struct union_score {
  ratio_report union_report;    // denominator OPT_{P+}
  ratio_report package_report;  // denominator OPT_P; may exceed 1
  std::vector<std::string> kept;
};

// Scores one exported store after pruning it to the budget with `policy`.
inline union_score union_ratio(const exported_store& ex, const package& pkg, double budget, prune_policy policy,
                               const cost_rule& rule = {}, int k = 1) {
  const package plus = build_union_package(pkg, ex, rule);
  const instance uinst = compile(plus, rule);
  std::vector<embedded_export> embedded;
  for (const auto& m : ex.memories)
    embedded.push_back({uinst.index_of(union_candidate_id(ex, m)), m.timestamp, m.salience});
  const auto kept = prune_exported(uinst, embedded, budget, policy, k);

  const std::string method = ex.system + ":" + std::string(to_string(policy));
  union_score out;
  out.union_report = package_ratio(uinst, kept, budget, k, method, std::nullopt, rule.kind);
  out.union_report.kind = denominator_kind::union_package;
  out.union_report.analysis_only = policy == prune_policy::upper;

  const instance pinst = compile(pkg, rule);
  const solve_result popt = solve_exact_bnb(pinst, budget, k);
  out.package_report = out.union_report;
  out.package_report.kind = denominator_kind::package;
  out.package_report.denominator = popt.opt_value;
  out.package_report.ratio = safe_ratio(out.union_report.value, popt.opt_value);
  for (auto u : kept) out.kept.push_back(uinst.ids[u]);
  return out;
}

inline double invalidation_coverage(const store& s, const package& pkg) {
  const instance inst = compile(pkg);
  const auto idx = inst.indices_of(s);
  return invalidation_coverage(inst, idx);
}

// ---------------------------------------------------------------------------
// Statistics

inline double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Linear-interpolated quantile of sorted data (Hyndman-Fan type 7).
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.size() == 1) return sorted.front();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Percentile bootstrap interval for the mean.
inline std::pair<double, double> bootstrap_ci(const std::vector<double>& values, double level = 0.95,
                                              int resamples = 10'000, std::uint64_t seed = 0) {
  if (values.empty()) throw parameter_error("bootstrap needs at least one value");
  if (!(level > 0.0 && level < 1.0)) throw parameter_error("confidence level must lie in (0, 1)");
  if (resamples < 1) throw parameter_error("resamples must be positive");
  rng gen(seed);
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (auto& m : means) {
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) sum += values[gen.index(values.size())];
    m = sum / static_cast<double>(values.size());
  }
  std::sort(means.begin(), means.end());
  const double alpha = (1.0 - level) / 2.0;
  double lo = quantile_sorted(means, alpha), hi = quantile_sorted(means, 1.0 - alpha);
  // Constant inputs: keep the interval exactly degenerate.
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); }))
    lo = hi = values.front();
  return {lo, hi};
}

inline std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

// Spearman correlation with average ranks for ties; null when either side is
// constant.
inline std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) return std::nullopt;
  const auto ra = average_ranks(a), rb = average_ranks(b);
  const double ma = mean(ra), mb = mean(rb);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

// ---------------------------------------------------------------------------
// Sensitivity audit: k in {1, 2} x cost rule in {word, byte_overhead}

struct method_ratio {
  std::string method;
  std::optional<double> word_ratio;
  std::optional<double> byte_ratio;
};

struct sensitivity_report {
  std::string package_id;
  double budget = 0.0;
  double opt_k1_word = 0.0, opt_k2_word = 0.0, opt_k1_byte = 0.0, opt_k2_byte = 0.0;
  std::optional<double> k2_over_k1_word, k2_over_k1_byte, byte_over_word_k1, byte_over_word_k2;
  std::vector<method_ratio> writer_methods;
  std::vector<method_ratio> export_methods;
  std::optional<double> writer_rank_correlation;
  std::optional<double> export_rank_correlation;
};

inline std::optional<double> rank_correlation(const std::vector<method_ratio>& rows) {
  std::vector<double> w, b;
  for (const auto& r : rows) {
    w.push_back(r.word_ratio.value_or(0.0));
    b.push_back(r.byte_ratio.value_or(0.0));
  }
  return spearman(w, b);
}

inline prune_policy designated_policy(const exported_store& ex) {
  const bool scored = !ex.memories.empty() && std::all_of(ex.memories.begin(), ex.memories.end(),
                                                          [](const exported_memory& m) { return m.salience.has_value(); });
  return scored ? prune_policy::salience : prune_policy::recency;
}

inline sensitivity_report sensitivity_audit(const package& pkg, double budget,
                                            const std::vector<exported_store>& exports = {},
                                            double sigma = 0.5, std::uint64_t seed = 0) {
  sensitivity_report rep;
  rep.package_id = pkg.package_id;
  rep.budget = budget;

  const instance word = compile(pkg, cost_rule::word());
  const instance byte = compile(pkg, cost_rule::byte_overhead());
  const solve_result w1 = solve_exact_bnb(word, budget, 1), w2 = solve_exact_bnb(word, budget, 2);
  const solve_result b1 = solve_exact_bnb(byte, budget, 1), b2 = solve_exact_bnb(byte, budget, 2);
  rep.opt_k1_word = w1.opt_value;
  rep.opt_k2_word = w2.opt_value;
  rep.opt_k1_byte = b1.opt_value;
  rep.opt_k2_byte = b2.opt_value;
  rep.k2_over_k1_word = safe_ratio(w2.opt_value, w1.opt_value);
  rep.k2_over_k1_byte = safe_ratio(b2.opt_value, b1.opt_value);
  rep.byte_over_word_k1 = safe_ratio(b1.opt_value, w1.opt_value);
  rep.byte_over_word_k2 = safe_ratio(b2.opt_value, w2.opt_value);

  auto writer_ratio = [&](const instance& inst, const solve_result& opt, const std::string& method) {
    writer_result r;
    if (method == "gvt") r = gvt_best_over_grid(inst, budget);
    else if (method == "estimated_gvt") r = estimated_gvt_write(inst, budget, default_grid(inst, budget), sigma, seed);
    else if (method == "density_only") r = density_only_write(inst, budget);
    else r = recency_raw_write(inst, budget);
    return safe_ratio(r.value, opt.opt_value);
  };
  for (const char* m : {"gvt", "estimated_gvt", "density_only", "recency_raw"})
    rep.writer_methods.push_back({m, writer_ratio(word, w1, m), writer_ratio(byte, b1, m)});
  rep.writer_rank_correlation = rank_correlation(rep.writer_methods);

  // Exported stores, scored against the package-candidate denominator. Each
  // system is ranked under one policy: salience when every memory carries a
  // score, recency otherwise.
  for (const auto& ex : exports) {
    const prune_policy p = designated_policy(ex);
    const union_score sw = union_ratio(ex, pkg, budget, p, cost_rule::word());
    const union_score sb = union_ratio(ex, pkg, budget, p, cost_rule::byte_overhead());
    rep.export_methods.push_back({sw.package_report.method, sw.package_report.ratio, sb.package_report.ratio});
  }
  rep.export_rank_correlation = rank_correlation(rep.export_methods);
  return rep;
}

}  // namespace budgetmem
