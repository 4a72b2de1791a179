#include <gtest/gtest.h>

#include "budgetmem/generator.hpp"
#include "budgetmem/scoring.hpp"
#include "budgetmem/writers.hpp"
#include "support.hpp"

using namespace budgetmem;
using namespace testing_support;

namespace {

bool is_subset_of_trace(const writer_result& r) {
  std::set<std::string> chosen;
  for (const auto& t : r.trace)
    if (t.chosen) chosen.insert(*t.chosen);
  return chosen == r.selection.selected;
}

// Three experiences with one raw span of cost 1 each, newest last.
package raw_chain() {
  return make_package("raw", {unit("r1", 1.0), unit("r2", 1.0), unit("r3", 1.0)},
                      {cand("s1", 1, 1, {{"r1", 1.0}}, candidate_kind::raw_span),
                       cand("f1", 1, 0.5, {{"r1", 0.5}}),
                       cand("s2", 2, 1, {{"r2", 1.0}}, candidate_kind::raw_span),
                       cand("s3", 3, 1, {{"r3", 1.0}}, candidate_kind::raw_span)});
}

exported_memory memory(std::string id, long long ts, std::optional<double> sal, double cost,
                       std::map<std::string, double> cov) {
  exported_memory m;
  m.memory_id = std::move(id);
  m.text = m.memory_id;
  m.timestamp = ts;
  m.salience = sal;
  m.word_cost = cost;
  m.byte_overhead_cost = cost;
  m.coverage = std::move(cov);
  return m;
}

struct pruning_case {
  package plus;
  instance inst;
  std::vector<embedded_export> embedded;
};

pruning_case make_pruning_case(bool with_salience = true) {
  const package pkg = make_package("p", {unit("r1", 1.0), unit("r2", 0.5)}, {cand("c", 1, 5, {{"r1", 0.2}})});
  exported_store ex{"sys",
                    {memory("m1", 1, with_salience ? std::optional(0.9) : std::nullopt, 2, {{"r1", 1.0}}),
                     memory("m2", 2, with_salience ? std::optional(0.1) : std::nullopt, 2, {{"r2", 1.0}}),
                     memory("m3", 3, with_salience ? std::optional(0.5) : std::nullopt, 10, {{"r1", 1.0}, {"r2", 1.0}})}};
  pruning_case pc{build_union_package(pkg, ex), {}, {}};
  pc.inst = compile(pc.plus);
  for (const auto& m : ex.memories)
    pc.embedded.push_back({pc.inst.index_of(union_candidate_id(ex, m)), m.timestamp, m.salience});
  return pc;
}

}  // namespace

TEST(Gvt, AdversarialInstanceTakesTheLargeCandidate) {
  for (double eta : {0.5, 0.1, 0.01}) {
    const instance inst = compile(adversarial_density_instance(eta));
    const writer_result r = gvt_write(inst, adversarial_budget, 0.25);
    EXPECT_EQ(r.selection.selected, std::set<std::string>{"b"}) << eta;
    EXPECT_DOUBLE_EQ(r.value, 1.0);
    EXPECT_TRUE(r.warnings.empty());
  }
}

TEST(Gvt, ThresholdAboveEveryDensityKeepsNothing) {
  const instance inst = compile(solver_micro());
  const writer_result r = gvt_write(inst, 8.0, 100.0);
  EXPECT_TRUE(r.selected.empty());
  EXPECT_EQ(r.value, 0.0);
  ASSERT_EQ(r.trace.size(), inst.num_groups());
  for (const auto& t : r.trace) EXPECT_FALSE(t.chosen.has_value());
}

TEST(Gvt, SaturatedStateDiscardsLaterGroups) {
  const package p = make_package("sat", {unit("r", 1.0)},
                                 {cand("a", 1, 1, {{"r", 1.0}}), cand("b", 2, 1, {{"r", 1.0}}), cand("c", 3, 1, {{"r", 0.5}})});
  const writer_result r = gvt_write(compile(p), 10.0, 1e-6);
  EXPECT_EQ(r.selection.selected, std::set<std::string>{"a"});
  EXPECT_FALSE(r.trace[1].chosen.has_value());
  EXPECT_FALSE(r.trace[2].chosen.has_value());
}

TEST(Gvt, SingletonGridEqualsSingleThreshold) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const instance inst = compile(random_package(seed));
    for (double lambda : {0.05, 0.2, 0.6}) {
      const writer_result a = gvt_write(inst, 4.0, lambda);
      const writer_result b = gvt_best_over_grid(inst, 4.0, threshold_grid::single(lambda));
      EXPECT_EQ(a.selected, b.selected) << seed;
    }
  }
}

TEST(Gvt, DefaultGridBracketsHalfOptDensity) {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const instance inst = compile(random_package(seed));
    for (double budget : {1.0, 3.0, 8.0}) {
      const double opt = solve_exact_bnb(inst, budget).opt_value;
      if (opt <= 0.0) continue;
      EXPECT_TRUE(default_grid(inst, budget).brackets(opt / (2.0 * budget))) << seed << " B=" << budget;
      ++checked;
    }
  }
  EXPECT_GT(checked, 300);
}

TEST(Gvt, QuarterGuaranteeUnderSmallItems) {
  const double budget = 4.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const package p = random_package(seed, {1, 5, 1, 3, 1, 6, budget / 2.0, 1.5, 0.5});
    const instance inst = compile(p);
    const double opt = solve_exact_bnb(inst, budget).opt_value;
    const writer_result r = gvt_best_over_grid(inst, budget);
    EXPECT_TRUE(r.warnings.empty());
    EXPECT_GE(r.value, (1.0 - 0.1) * opt / 4.0 - 1e-12) << seed;
  }
}

TEST(Gvt, LargeItemsProduceWarnings) {
  const instance inst = compile(solver_micro());
  const writer_result r = gvt_best_over_grid(inst, 7.0);
  ASSERT_EQ(r.warnings.size(), 1u);  // only g2c (cost 4) exceeds 3.5
  EXPECT_NE(r.warnings[0].find("g2c"), std::string::npos);
}

TEST(Grid, GeometricShapeAndErrors) {
  const threshold_grid g = threshold_grid::geometric(1.0, 0.3, 0.5);
  EXPECT_EQ(g.lambdas, (std::vector<double>{1.0, 0.5, 0.25}));
  EXPECT_THROW(threshold_grid::geometric(1.0, 0.3, 0.0), parameter_error);
  EXPECT_THROW(threshold_grid::geometric(1.0, 2.0, 0.1), parameter_error);
  EXPECT_THROW(gvt_best_over_grid(compile(solver_micro()), 4.0, threshold_grid{}), parameter_error);
}

TEST(EstimatedGvt, ZeroNoiseMatchesGvt) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const instance inst = compile(random_package(seed));
    const threshold_grid grid = default_grid(inst, 4.0);
    EXPECT_EQ(estimated_gvt_write(inst, 4.0, grid, 0.0, seed).selected, gvt_best_over_grid(inst, 4.0, grid).selected);
  }
}

TEST(EstimatedGvt, SameSeedSameStore) {
  const instance inst = compile(random_package(9, {4, 8, 2, 4, 3, 8, 3.0, 1.5, 0.5}));
  const threshold_grid grid = default_grid(inst, 5.0);
  const writer_result a = estimated_gvt_write(inst, 5.0, grid, 0.5, 77);
  const writer_result b = estimated_gvt_write(inst, 5.0, grid, 0.5, 77);
  EXPECT_EQ(a.selected, b.selected);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.method, "estimated_gvt");
}

TEST(EstimatedGvt, NegativeSigmaThrows) {
  const instance inst = compile(solver_micro());
  EXPECT_THROW(estimated_gvt_write(inst, 4.0, default_grid(inst, 4.0), -0.1, 0), parameter_error);
}

TEST(EstimatedGvt, SitsBetweenDensityOnlyAndGvtOnAverage) {
  double gvt = 0.0, est = 0.0, dens = 0.0;
  int n = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    generator_params p;
    p.seed = seed;
    const instance inst = compile(generate_package(p));
    const double budget = 4.0;
    const double opt = solve_exact_bnb(inst, budget).opt_value;
    if (opt <= 0.0) continue;
    gvt += gvt_best_over_grid(inst, budget).value / opt;
    est += estimated_gvt_write(inst, budget, default_grid(inst, budget), 0.5, seed).value / opt;
    dens += density_only_write(inst, budget).value / opt;
    ++n;
  }
  ASSERT_GT(n, 90);
  EXPECT_LT(dens / n, est / n);
  EXPECT_LT(est / n, gvt / n);
}

TEST(DensityOnly, AdversarialInstanceLosesToTheSmallCandidate) {
  for (double eta : {0.5, 0.1, 0.01}) {
    const instance inst = compile(adversarial_density_instance(eta));
    const writer_result r = density_only_write(inst, adversarial_budget);
    const double delta = std::min(eta / 2.0, 0.25);
    EXPECT_EQ(r.selection.selected, std::set<std::string>{"a"}) << eta;
    EXPECT_NEAR(r.value, 2.0 * delta, 1e-12);
    EXPECT_NEAR(solve_exact_bnb(inst, adversarial_budget).opt_value, 1.0, 1e-12);
  }
}

TEST(DensityOnly, EqualDensityTiesGoToSmallerId) {
  const package p = make_package("tie", {unit("r", 1.0), unit("q", 1.0)},
                                 {cand("y", 1, 2, {{"r", 1.0}}), cand("x", 1, 1, {{"q", 0.5}})});
  EXPECT_EQ(density_only_write(compile(p), 5.0).selection.selected, std::set<std::string>{"x"});
}

TEST(DensityOnly, SkipsZeroGainCandidates) {
  const package p = make_package("zero", {unit("r", 1.0)}, {cand("a", 1, 1, {{"r", 1.0}}), cand("b", 2, 0.1, {{"r", 1.0}})});
  const writer_result r = density_only_write(compile(p), 5.0);
  EXPECT_EQ(r.selection.selected, std::set<std::string>{"a"});
}

TEST(RecencyRaw, LargeBudgetKeepsEveryRawSpan) {
  const writer_result r = recency_raw_write(compile(raw_chain()), 10.0);
  EXPECT_EQ(r.selection.selected, (std::set<std::string>{"s1", "s2", "s3"}));
}

TEST(RecencyRaw, TightBudgetKeepsTheNewest) {
  const writer_result r = recency_raw_write(compile(raw_chain()), 1.0);
  EXPECT_EQ(r.selection.selected, std::set<std::string>{"s3"});
  EXPECT_EQ(r.trace.front().group_id, 3);
}

TEST(Writers, FeasibleAndBelowOptOnRandomPackages) {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    const package p = random_package(seed, {2, 6, 1, 3, 2, 6, 3.0, 1.5, 0.5});
    const instance inst = compile(p);
    for (double budget : {1.0, 3.0, 6.0}) {
      const double opt = solve_exact_bnb(inst, budget).opt_value;
      for (const writer_result& r :
           {gvt_best_over_grid(inst, budget), estimated_gvt_write(inst, budget, default_grid(inst, budget), 0.5, seed),
            density_only_write(inst, budget), recency_raw_write(inst, budget)}) {
        EXPECT_TRUE(is_feasible(inst, r.selected, budget, 1)) << r.method << " " << seed;
        EXPECT_LE(r.value, opt + 1e-12) << r.method << " " << seed;
        EXPECT_TRUE(is_subset_of_trace(r)) << r.method;
        EXPECT_EQ(r.trace.size(), inst.num_groups());
      }
    }
  }
}

TEST(Writers, TraceJsonHasOneLinePerGroup) {
  const instance inst = compile(solver_micro());
  const writer_result r = gvt_write(inst, 3.0, 0.1);
  const std::string s = trace_jsonl(r);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 3);
  EXPECT_EQ(s.substr(0, s.find('\n')), "{\"method\": \"gvt\", \"group_id\": 1, \"chosen\": \"g1a\", \"marginal\": 1.400000}");
}

TEST(RestrictedExact, AllKindsMatchesFullOpt) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const instance inst = compile(random_package(seed));
    EXPECT_NEAR(restricted_exact(inst, 4.0, kind_restriction::all()).opt_value, solve_exact_bnb(inst, 4.0).opt_value,
                1e-12);
  }
}

TEST(RestrictedExact, NoTombstoneLosesTheInvalidation) {
  const package p = make_package(
      "tomb", {unit("f", 0.5), unit("i", 1.0, unit_class::invalidation)},
      {cand("fact", 1, 1, {{"f", 1.0}}), cand("tomb", 2, 1, {{"i", 1.0}}, candidate_kind::tombstone)});
  const instance inst = compile(p);
  const solve_result full = solve_exact_bnb(inst, 1.0);
  const solve_result restricted = restricted_exact(inst, 1.0, kind_restriction::no_tombstone());
  EXPECT_DOUBLE_EQ(full.opt_value, 1.0);
  EXPECT_DOUBLE_EQ(restricted.opt_value, 0.5);
  EXPECT_EQ(ids_of(inst, restricted.selected), std::vector<std::string>{"fact"});
}

TEST(RestrictedExact, SingleKindAndEmptyRestriction) {
  const instance inst = compile(raw_chain());
  const solve_result r = restricted_exact(inst, 10.0, kind_restriction::only(candidate_kind::atomic_fact));
  EXPECT_EQ(ids_of(inst, r.selected), std::vector<std::string>{"f1"});
  EXPECT_DOUBLE_EQ(restricted_exact(inst, 10.0, kind_restriction::only(candidate_kind::entity_summary)).opt_value, 0.0);
  EXPECT_THROW(restricted_exact(inst, 10.0, kind_restriction{}), parameter_error);
}

TEST(Pruning, LargeBudgetKeepsEverything) {
  const pruning_case pc = make_pruning_case();
  for (auto policy : {prune_policy::recency, prune_policy::salience})
    EXPECT_EQ(prune_exported(pc.inst, pc.embedded, 100.0, policy).size(), 3u);
}

TEST(Pruning, PoliciesAtTightBudget) {
  const pruning_case pc = make_pruning_case();
  auto ids = [&](prune_policy p) { return ids_of(pc.inst, prune_exported(pc.inst, pc.embedded, 3.0, p)); };
  // m3 never fits; recency then takes m2, salience takes m1.
  EXPECT_EQ(ids(prune_policy::recency), std::vector<std::string>{"x.sys.m2"});
  EXPECT_EQ(ids(prune_policy::salience), std::vector<std::string>{"x.sys.m1"});
  EXPECT_EQ(ids(prune_policy::upper), std::vector<std::string>{"x.sys.m1"});
}

TEST(Pruning, UpperDominatesTheHeuristics) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    generator_params gp;
    gp.seed = seed;
    const package pkg = generate_small(gp);
    for (const auto& ex : synthetic_exports(pkg, seed)) {
      const package plus = build_union_package(pkg, ex);
      const instance inst = compile(plus);
      std::vector<embedded_export> emb;
      for (const auto& m : ex.memories) emb.push_back({inst.index_of(union_candidate_id(ex, m)), m.timestamp, m.salience});
      const double upper = coverage_value(inst, prune_exported(inst, emb, 8.0, prune_policy::upper));
      EXPECT_GE(upper + 1e-12, coverage_value(inst, prune_exported(inst, emb, 8.0, prune_policy::recency)));
      if (designated_policy(ex) == prune_policy::salience) {
        EXPECT_GE(upper + 1e-12, coverage_value(inst, prune_exported(inst, emb, 8.0, prune_policy::salience)));
      }
    }
  }
}

TEST(Pruning, OversizedMemoryIsNeverKept) {
  const pruning_case pc = make_pruning_case();
  const std::size_t m3 = pc.inst.index_of("x.sys.m3");
  for (auto policy : {prune_policy::recency, prune_policy::salience, prune_policy::upper}) {
    const auto kept = prune_exported(pc.inst, pc.embedded, 9.0, policy);
    EXPECT_EQ(std::count(kept.begin(), kept.end(), m3), 0);
  }
}

TEST(Pruning, SalienceWithoutScoresThrows) {
  const pruning_case pc = make_pruning_case(false);
  EXPECT_THROW(prune_exported(pc.inst, pc.embedded, 3.0, prune_policy::salience), parameter_error);
  EXPECT_NO_THROW(prune_exported(pc.inst, pc.embedded, 3.0, prune_policy::recency));
}
