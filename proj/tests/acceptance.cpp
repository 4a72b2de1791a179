// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Every seed, count and tolerance used below is fixed here.

#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <unistd.h>

#include "budgetmem/harness.hpp"

using namespace budgetmem;

namespace {

constexpr double law_tolerance = 1e-12;
constexpr double ratio_slack = 1e-12;

struct outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct scratch_dir {
  fs::path path;
  explicit scratch_dir(const std::string& name) {
    path = fs::temp_directory_path() / ("budgetmem-acceptance-" + name + "-" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~scratch_dir() { fs::remove_all(path); }
};

// 1. Branch-and-bound agrees with enumeration on 1,200 audit instances.
outcome certification() {
  constexpr int n = 1200;
  const auto rows = certify_suite(n, 20240611, 1);
  std::size_t equal = 0;
  double max_diff = 0.0;
  for (const auto& r : rows) {
    equal += r.equal ? 1 : 0;
    max_diff = std::max(max_diff, r.max_diff);
  }
  return {equal == rows.size() && rows.size() == n && max_diff == 0.0,
          std::to_string(equal) + "/" + std::to_string(rows.size()) + " equal, max diff " + fmt(max_diff, 6)};
}

// 2. Density-only scores exactly 2 delta = min(eta, 1/2) against OPT 1.
outcome adversarial_density() {
  bool ok = true;
  std::string detail;
  for (double eta : {0.5, 0.1, 0.01}) {
    const instance inst = compile(adversarial_density_instance(eta));
    const double opt = solve_exact_bnb(inst, adversarial_budget).opt_value;
    const double ratio = density_only_write(inst, adversarial_budget).value / opt;
    ok = ok && opt == 1.0 && ratio == std::min(eta, 0.5);
    detail += "eta=" + fmt(eta, 2) + ": ratio " + fmt(ratio, 6) + " opt " + fmt(opt, 6) + "; ";
  }
  return {ok, detail};
}

// 3. Best-of-grid GVT reaches (1 - eps) OPT / 4 when every cost is <= B/2.
outcome gvt_guarantee() {
  constexpr int n = 500;
  constexpr double epsilon = 0.1;
  const std::array<double, 5> budgets{4, 6, 8, 12, 16};
  int held = 0, certified = 0;
  double worst = 1e9;
  for (int i = 0; i < n; ++i) {
    const double budget = budgets[static_cast<std::size_t>(i) % budgets.size()];
    const int cap = static_cast<int>(budget / 2.0);
    generator_params p;
    p.seed = rng::derive(31337, static_cast<std::uint64_t>(i));
    p.dist = static_cast<distribution>(i % 3);
    p.min_experiences = 3;
    p.max_experiences = 7;
    p.max_candidates_per_group = 4;
    p.chain_supersessions = {2, 3};
    p.chain_count = 1;
    for (word_range* r : {&p.raw_cost, &p.fact_cost, &p.summary_cost, &p.temporal_cost, &p.tombstone_cost,
                          &p.compound_cost}) {
      r->max = std::min(r->max, cap);
      r->min = std::min(r->min, r->max);
    }
    const instance inst = compile(generate_package(p));
    const certification_row cert = certify(inst, budget, 1);
    if (cert.equal) ++certified;
    const writer_result w = gvt_best_over_grid(inst, budget, default_grid(inst, budget, epsilon));
    const bool small = w.warnings.empty();
    const bool bound = w.value >= (1.0 - epsilon) * cert.bnb_value / 4.0 - law_tolerance;
    if (small && bound) ++held;
    if (cert.bnb_value > 0.0) worst = std::min(worst, w.value / cert.bnb_value);
  }
  return {held == n && certified == n, std::to_string(held) + "/" + std::to_string(n) + " hold (" +
                                           std::to_string(certified) + " OPT certified), worst ratio " + fmt(worst)};
}

// 4. F is normalized, monotone and submodular on random nested pairs.
outcome set_function_laws() {
  constexpr int n = 1000;
  std::mt19937_64 gen(4242);
  int violations = 0, checked = 0;
  for (int i = 0; i < n; ++i) {
    generator_params p;
    p.seed = static_cast<std::uint64_t>(i);
    p.dist = static_cast<distribution>(i % 3);
    p.min_experiences = 2;
    p.max_experiences = 10;
    const instance inst = compile(generate_package(p));
    if (inst.size() < 2) continue;
    const std::size_t u = gen() % inst.size();
    std::vector<std::size_t> S, T;
    for (std::size_t v = 0; v < inst.size(); ++v) {
      if (v == u) continue;
      const auto r = gen() % 4;
      if (r == 0) S.push_back(v);
      if (r <= 1) T.push_back(v);
    }
    const coverage_state s = state_of(inst, S), t = state_of(inst, T);
    const bool normalized = coverage_value(inst, std::vector<std::size_t>{}) == 0.0;
    const bool monotone = t.value >= s.value - law_tolerance && marginal_gain(inst, t, u) >= -law_tolerance;
    const bool submodular = marginal_gain(inst, s, u) >= marginal_gain(inst, t, u) - law_tolerance;
    if (!(normalized && monotone && submodular)) ++violations;
    ++checked;
  }
  return {violations == 0 && checked == n,
          std::to_string(checked) + " triples, " + std::to_string(violations) + " violations"};
}

// 5. Removing validity-bearing candidates hurts update_chain most.
outcome validity_frontier() {
  constexpr int seeds = 200;
  constexpr double budget = 6.0;
  std::map<distribution, std::pair<double, int>> sums;
  std::map<distribution, int> below;
  for (auto d : {distribution::base, distribution::update_chain, distribution::temporal_interval})
    for (int s = 0; s < seeds; ++s) {
      generator_params p;
      p.seed = static_cast<std::uint64_t>(s);
      p.dist = d;
      const instance inst = compile(generate_package(p));
      const double full = solve_exact_bnb(inst, budget).opt_value;
      if (!(full > 0.0)) continue;
      const double restricted = restricted_exact(inst, budget, kind_restriction::no_tombstone()).opt_value;
      const double ratio = restricted / full;
      sums[d].first += ratio;
      ++sums[d].second;
      if (ratio < 1.0) ++below[d];
    }
  auto mean_of = [&](distribution d) { return sums[d].first / std::max(1, sums[d].second); };
  const double base = mean_of(distribution::base), chain = mean_of(distribution::update_chain),
               interval = mean_of(distribution::temporal_interval);
  const double share = static_cast<double>(below[distribution::update_chain]) /
                       std::max(1, sums[distribution::update_chain].second);
  const bool enough = sums[distribution::base].second >= seeds * 9 / 10 &&
                      sums[distribution::update_chain].second >= seeds * 9 / 10;
  return {enough && chain < base && share >= 0.90 && chain < interval,
          "mean no-tombstone/OPT base " + fmt(base) + ", update_chain " + fmt(chain) + ", temporal_interval " +
              fmt(interval) + "; update_chain below 1 on " + fmt(100.0 * share, 1) + "% of seeds"};
}

// 6. Sweep ordering over 500 base seeds.
outcome sweep_ordering() {
  scratch_dir dir("sweep");
  generate_config g;
  g.dist = distribution::base;
  g.n_seeds = 500;
  g.out_dir = dir.path / "suite";
  sweep_config c;
  c.manifest_path = generate_suite(g);
  c.out_dir = dir.path / "out";
  c.methods = {"opt", "gvt", "estimated_gvt", "density_only"};
  c.jobs = 4;
  c.resamples = 1000;
  c.sigma = 0.5;
  const sweep_outcome o = run_sweep(c);
  std::map<std::pair<double, std::string>, summary_cell> cells;
  for (const auto& s : o.summary) cells[{s.budget, s.method}] = s;
  bool ok = true;
  std::string detail;
  for (double b : sweep_budgets) {
    const auto& opt = cells[{b, "opt"}];
    const auto& gvt = cells[{b, "gvt"}];
    const auto& est = cells[{b, "estimated_gvt"}];
    const auto& den = cells[{b, "density_only"}];
    if (gvt.mean_ratio < 0.95) ok = false;
    if (b <= 8.0) {
      ok = ok && opt.mean_ratio >= gvt.mean_ratio && gvt.mean_ratio > est.mean_ratio && est.mean_ratio > den.mean_ratio;
      ok = ok && den.mean_invalidation_coverage < opt.mean_invalidation_coverage;
    }
    detail += "B=" + format_budget(b) + ": gvt " + fmt(gvt.mean_ratio) + " est " + fmt(est.mean_ratio) + " dens " +
              fmt(den.mean_ratio) + " inv(dens/opt) " + fmt(den.mean_invalidation_coverage) + "/" +
              fmt(opt.mean_invalidation_coverage) + " (n=" + std::to_string(gvt.n) + "); ";
  }
  return {ok, detail};
}

// 7. Union-denominator laws on synthetic export suites plus a constructed case.
outcome union_laws() {
  constexpr int suites = 100;
  int ratio_violations = 0, opt_violations = 0, scored = 0;
  for (int s = 0; s < suites; ++s) {
    generator_params p;
    p.seed = static_cast<std::uint64_t>(s);
    p.dist = static_cast<distribution>(s % 3);
    const package pkg = generate_small(p);
    const auto exports = synthetic_exports(pkg, p.seed);
    for (double b : {4.0, 8.0}) {
      const double opt_p = solve_exact_bnb(compile(pkg), b).opt_value;
      const double opt_all = solve_exact_bnb(compile(build_union_package(pkg, exports)), b).opt_value;
      if (opt_all < opt_p - law_tolerance) ++opt_violations;
      for (const auto& ex : exports)
        for (auto policy : {designated_policy(ex), prune_policy::upper}) {
          const union_score u = union_ratio(ex, pkg, b, policy);
          if (u.union_report.denominator < opt_p - law_tolerance) ++opt_violations;
          if (u.union_report.ratio && *u.union_report.ratio > 1.0 + ratio_slack) ++ratio_violations;
          ++scored;
        }
    }
  }

  // Exported memory covering a unit no package candidate reaches.
  package pkg;
  pkg.package_id = "constructed";
  pkg.evidence_units = {{"r1", "", unit_class::fact, 1.0}, {"r2", "", unit_class::fact, 1.0}};
  candidate a;
  a.id = "a";
  a.group_id = 1;
  a.text = "a";
  a.explicit_cost = 1.0;
  a.coverage["r1"] = 1.0;
  pkg.candidates = {a};
  rebuild_groups(pkg);
  canonicalize(pkg);
  exported_store ex{"constructed", {}};
  for (const char* r : {"r1", "r2"}) {
    exported_memory m;
    m.memory_id = std::string("m_") + r;
    m.text = "memory about " + std::string(r);
    m.word_cost = m.byte_overhead_cost = 1.0;
    m.coverage[r] = 1.0;
    ex.memories.push_back(m);
  }
  const union_score c = union_ratio(ex, pkg, 2.0, prune_policy::recency);
  const bool constructed = c.package_report.ratio && *c.package_report.ratio > 1.0 && c.union_report.ratio &&
                           *c.union_report.ratio <= 1.0;
  return {ratio_violations == 0 && opt_violations == 0 && constructed,
          std::to_string(scored) + " export scores, " + std::to_string(ratio_violations) + " union ratios > 1, " +
              std::to_string(opt_violations) + " OPT_P+ < OPT_P; constructed package ratio " +
              fmt(c.package_report.ratio.value_or(-1)) + " vs union ratio " + fmt(c.union_report.ratio.value_or(-1))};
}

// 8. k = 2 never lowers OPT; ratios stay in [0, 1]; demo ranking is stable.
outcome sensitivity_laws() {
  constexpr int n = 100;
  int k_violations = 0, range_violations = 0;
  auto in_range = [](const std::optional<double>& r) { return !r || (*r >= 0.0 && *r <= 1.0 + ratio_slack); };
  for (int s = 0; s < n; ++s) {
    generator_params p;
    p.seed = static_cast<std::uint64_t>(s);
    p.dist = static_cast<distribution>(s % 3);
    const package pkg = generate_small(p);
    const sensitivity_report r = sensitivity_audit(pkg, s % 2 ? 8.0 : 30.0, {}, 0.5, p.seed);
    if (r.opt_k2_word < r.opt_k1_word - law_tolerance || r.opt_k2_byte < r.opt_k1_byte - law_tolerance) ++k_violations;
    for (const auto& m : r.writer_methods)
      if (!in_range(m.word_ratio) || !in_range(m.byte_ratio)) ++range_violations;
  }
  const demo_suite d = make_demo_suite();
  const sensitivity_report demo = sensitivity_audit(d.pkg, demo_budget, d.exports);
  for (const auto& m : demo.export_methods)
    if (!in_range(m.word_ratio) || !in_range(m.byte_ratio)) ++range_violations;
  const bool stable = demo.export_rank_correlation && *demo.export_rank_correlation == 1.0;
  std::string ranking;
  for (const auto& m : demo.export_methods)
    ranking += m.method + " " + fmt(m.word_ratio.value_or(0)) + "/" + fmt(m.byte_ratio.value_or(0)) + " ";
  return {k_violations == 0 && range_violations == 0 && stable,
          std::to_string(k_violations) + " k violations, " + std::to_string(range_violations) +
              " out-of-range ratios; demo word/byte: " + ranking + "spearman " +
              (demo.export_rank_correlation ? fmt(*demo.export_rank_correlation) : std::string("null"))};
}

// 9. Two runs of generate, sweep, certify and export scoring are byte-identical.
void run_pipeline(const fs::path& root) {
  for (auto d : {distribution::base, distribution::update_chain, distribution::temporal_interval}) {
    generate_config g;
    g.dist = d;
    g.n_seeds = 20;
    g.base_seed = 100;
    g.with_exports = true;
    g.out_dir = root / std::string(to_string(d));
    sweep_config c;
    c.manifest_path = generate_suite(g);
    c.out_dir = root / ("sweep-" + std::string(to_string(d)));
    c.jobs = 3;
    c.resamples = 500;
    run_sweep(c);
  }
  write_file(root / "certification.csv", certification_csv(certify_suite(50, 9, 2)));
  const demo_suite demo = make_demo_suite();
  const auto scoring = score_exports(demo.pkg, demo.exports, {8.0, demo_budget},
                                     {prune_policy::recency, prune_policy::salience, prune_policy::upper},
                                     {cost_rule::word(), cost_rule::byte_overhead()});
  write_file(root / "export_scores.csv", export_scores_csv(scoring));
  write_file(root / "export_rankings.json", export_rankings_json(scoring));
  write_file(root / "sensitivity.json", sensitivity_json({sensitivity_audit(demo.pkg, demo_budget, demo.exports)}));
}

outcome determinism() {
  scratch_dir a("det-a"), b("det-b");
  run_pipeline(a.path);
  run_pipeline(b.path);
  std::size_t files = 0, differing = 0;
  for (const auto& e : fs::recursive_directory_iterator(a.path)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), a.path);
    ++files;
    if (!fs::exists(b.path / rel) || read_file(e.path()) != read_file(b.path / rel)) ++differing;
  }
  std::size_t files_b = 0;
  for (const auto& e : fs::recursive_directory_iterator(b.path)) files_b += e.is_regular_file() ? 1 : 0;
  return {differing == 0 && files == files_b && files > 0,
          std::to_string(files) + " files compared, " + std::to_string(differing) + " differ"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<outcome()>>> criteria{
      {"1 solver certification", certification},
      {"2 adversarial density instance", adversarial_density},
      {"3 grid GVT quarter guarantee", gvt_guarantee},
      {"4 normalized monotone submodular", set_function_laws},
      {"5 validity frontier", validity_frontier},
      {"6 budget sweep ordering", sweep_ordering},
      {"7 union denominator laws", union_laws},
      {"8 sensitivity laws", sensitivity_laws},
      {"9 determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
