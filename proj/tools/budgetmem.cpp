// budgetmem: generate package suites, run budget sweeps, certify the exact
// solver, score exported memory stores, and run sensitivity audits.
//
// Exit codes: 0 success, 1 usage, 2 certification failure, 3 data error.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "budgetmem/harness.hpp"

namespace bm = budgetmem;

namespace {

enum exit_code { ok = 0, usage = 1, certification = 2, data = 3 };

bm::cost_rule parse_rule(const std::string& name) {
  const auto k = bm::cost_rule_from_name(name);
  if (!k) throw bm::parameter_error("unknown cost rule '" + name + "'");
  return *k == bm::cost_rule_kind::word ? bm::cost_rule::word() : bm::cost_rule::byte_overhead();
}

bm::distribution parse_distribution(const std::string& name) {
  const auto d = bm::distribution_from_name(name);
  if (!d) throw bm::parameter_error("unknown distribution '" + name + "'");
  return *d;
}

bm::prune_policy parse_policy(const std::string& name) {
  const auto p = bm::prune_policy_from_name(name);
  if (!p) throw bm::parameter_error("unknown pruning policy '" + name + "'");
  return *p;
}

const std::vector<std::string> rule_names{"word", "byte-overhead", "byte_overhead"};
const std::vector<std::string> distribution_names{"base", "update_chain", "update-chain", "temporal_interval",
                                                  "temporal-interval"};

struct generate_opts {
  std::string distribution = "base";
  int n = 0;
  std::uint64_t seed = 0;
  std::vector<double> budgets{bm::sweep_budgets.begin(), bm::sweep_budgets.end()};
  std::vector<std::string> params;
  bool exports = false;
  bool demo = false;
  std::string out;
};

struct sweep_opts {
  std::string manifest;
  std::vector<double> budgets;
  std::vector<std::string> methods;
  std::string rule = "word";
  int k = 1;
  std::string out;
  int jobs = 1;
  int resamples = 1000;
  std::uint64_t seed = 0;
  double sigma = 0.5;
  bool no_cache = false;
  double bound_scale = 1.0;
};

struct certify_opts {
  int n = 1200;
  std::uint64_t seed = 0;
  int k = 1;
  std::string out;
  double bound_scale = 1.0;
};

struct score_opts {
  std::vector<std::string> exports;
  std::string package;
  std::vector<double> budgets;
  std::vector<std::string> policies{"recency", "salience", "upper"};
  std::vector<std::string> rules{"word"};
  int k = 1;
  std::string out;
};

struct sensitivity_opts {
  std::vector<std::string> packages;
  std::string manifest;
  std::vector<std::string> exports;
  std::vector<double> budgets;
  double sigma = 0.5;
  std::uint64_t seed = 0;
  std::string out;
};

int run_generate(const generate_opts& o) {
  if (o.demo) {
    const bm::demo_suite d = bm::make_demo_suite();
    const bm::fs::path dir(o.out);
    bm::write_file(dir / (d.pkg.package_id + ".json"), bm::serialize_package(d.pkg));
    for (const auto& ex : d.exports) bm::write_file(dir / "exports" / (ex.system + ".json"), bm::serialize_export(ex));
    std::cout << "demo suite written to " << dir.string() << "\n";
    return ok;
  }
  bm::generate_config cfg;
  cfg.dist = parse_distribution(o.distribution);
  cfg.n_seeds = o.n;
  cfg.base_seed = o.seed;
  cfg.budgets = o.budgets;
  for (const auto& p : o.params) bm::apply_override(cfg.params, p);
  cfg.out_dir = o.out;
  cfg.with_exports = o.exports;
  std::cout << bm::generate_suite(cfg).string() << "\n";
  return ok;
}

int run_sweep(const sweep_opts& o) {
  bm::sweep_config cfg;
  cfg.manifest_path = o.manifest;
  cfg.budgets = o.budgets;
  if (!o.methods.empty()) cfg.methods = o.methods;
  cfg.rule = parse_rule(o.rule);
  cfg.k = o.k;
  cfg.out_dir = o.out;
  cfg.jobs = o.jobs;
  cfg.resamples = o.resamples;
  cfg.bootstrap_seed = o.seed;
  cfg.sigma = o.sigma;
  cfg.use_cache = !o.no_cache;
  cfg.solver.bound_scale = o.bound_scale;
  const auto result = bm::run_sweep(cfg);
  std::printf("%zu rows -> %s\n", result.rows.size(), result.results_csv.string().c_str());
  for (const auto& c : result.summary)
    std::printf("%-18s B=%-5s %-17s mean ratio %s  [%s, %s]  n=%zu\n", c.distribution.c_str(),
                bm::format_budget(c.budget).c_str(), c.method.c_str(), bm::format_decimal(c.mean_ratio).c_str(),
                bm::format_decimal(c.ci.first).c_str(), bm::format_decimal(c.ci.second).c_str(), c.n);
  return ok;
}

int run_certify(const certify_opts& o) {
  bm::bnb_options opts;
  opts.bound_scale = o.bound_scale;
  const auto rows = bm::certify_suite(o.n, o.seed, o.k, opts);
  const bm::fs::path path = bm::fs::path(o.out) / "certification.csv";
  bm::write_file(path, bm::certification_csv(rows));
  std::size_t equal = 0;
  double max_diff = 0.0;
  for (const auto& r : rows) {
    equal += r.equal;
    max_diff = std::max(max_diff, r.max_diff);
  }
  std::printf("%zu/%zu rows equal, max diff %s -> %s\n", equal, rows.size(), bm::format_decimal(max_diff).c_str(),
              path.string().c_str());
  if (equal == rows.size()) return ok;
  for (const auto& r : rows)
    if (!r.equal)
      std::fprintf(stderr, "unequal: %s budget=%s bnb=%s audit=%s\n", r.package_id.c_str(),
                   bm::format_budget(r.budget).c_str(), bm::format_decimal(r.bnb_value).c_str(),
                   bm::format_decimal(r.audit_value).c_str());
  return certification;
}

int run_score_export(const score_opts& o) {
  const bm::package pkg = bm::parse_package(bm::read_file(o.package));
  std::vector<bm::exported_store> exports;
  for (const auto& path : o.exports) {
    try {
      exports.push_back(bm::parse_export(bm::read_file(path)));
    } catch (const bm::parse_error& e) {
      throw bm::error(std::string(e.what()) + " (in " + path + ")");
    }
  }
  std::vector<bm::prune_policy> policies;
  for (const auto& p : o.policies) policies.push_back(parse_policy(p));
  std::vector<bm::cost_rule> rules;
  for (const auto& r : o.rules) rules.push_back(parse_rule(r));
  const auto scored = bm::score_exports(pkg, exports, o.budgets, policies, rules, o.k);
  const bm::fs::path dir(o.out);
  bm::write_file(dir / "export_scores.csv", bm::export_scores_csv(scored));
  bm::write_file(dir / "export_rankings.json", bm::export_rankings_json(scored));
  std::printf("%zu rows -> %s\n", scored.rows.size(), (dir / "export_scores.csv").string().c_str());
  for (const auto& s : scored.skipped) std::printf("note: %s\n", s.c_str());
  for (const auto& r : scored.rankings)
    std::printf("B=%s %s denominator: rank correlation across cost rules %s\n", bm::format_budget(r.budget).c_str(),
                std::string(bm::to_string(r.kind)).c_str(),
                bm::format_optional(r.rank_correlation, "undefined").c_str());
  return ok;
}

int run_sensitivity(const sensitivity_opts& o) {
  std::vector<bm::package> packages;
  std::vector<bm::exported_store> exports;
  std::vector<double> budgets = o.budgets;
  for (const auto& p : o.packages) packages.push_back(bm::parse_package(bm::read_file(p)));
  if (!o.manifest.empty()) {
    const bm::fs::path mpath(o.manifest);
    const auto m = bm::parse_manifest(bm::read_file(mpath));
    std::vector<std::string> seen;
    for (const auto& e : m.entries) {
      if (std::find(seen.begin(), seen.end(), e.package) != seen.end()) continue;
      seen.push_back(e.package);
      packages.push_back(bm::parse_package(bm::read_file(mpath.parent_path() / e.package)));
    }
  }
  for (const auto& p : o.exports) exports.push_back(bm::parse_export(bm::read_file(p)));
  if (packages.empty()) {
    // No inputs: run the built-in demo export suite.
    bm::demo_suite d = bm::make_demo_suite();
    packages.push_back(std::move(d.pkg));
    if (exports.empty()) exports = std::move(d.exports);
    if (budgets.empty()) budgets.push_back(bm::demo_budget);
  }
  if (budgets.empty()) budgets.assign(bm::sweep_budgets.begin(), bm::sweep_budgets.end());

  std::vector<bm::sensitivity_report> reports;
  for (const auto& pkg : packages)
    for (double b : budgets) reports.push_back(bm::sensitivity_audit(pkg, b, exports, o.sigma, o.seed));
  const bm::fs::path path = bm::fs::path(o.out) / "sensitivity.json";
  bm::write_file(path, bm::sensitivity_json(reports));
  for (const auto& r : reports)
    std::printf("%s B=%s OPT k1/k2 word %s/%s byte %s/%s; export rank correlation %s\n", r.package_id.c_str(),
                bm::format_budget(r.budget).c_str(), bm::format_decimal(r.opt_k1_word).c_str(),
                bm::format_decimal(r.opt_k2_word).c_str(), bm::format_decimal(r.opt_k1_byte).c_str(),
                bm::format_decimal(r.opt_k2_byte).c_str(),
                bm::format_optional(r.export_rank_correlation, "undefined").c_str());
  std::printf("-> %s\n", path.string().c_str());
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified evaluation of budgeted memory-store selection"};
  app.require_subcommand(1);
  auto positive = CLI::PositiveNumber;

  generate_opts gen;
  auto* g = app.add_subcommand("generate", "Write a seeded package suite and its manifest");
  g->add_option("--distribution", gen.distribution, "base | update_chain | temporal_interval")
      ->check(CLI::IsMember(distribution_names));
  g->add_option("-n,--n,--n-seeds", gen.n, "Number of packages");
  g->add_option("--seed", gen.seed, "First seed; package i uses seed + i");
  g->add_option("--budgets", gen.budgets, "Budgets recorded in the manifest")->delimiter(',')->check(positive);
  g->add_option("--param", gen.params, "Generator override, key=value (repeatable)");
  g->add_flag("--exports", gen.exports, "Also write synthetic exported stores per package");
  g->add_flag("--demo", gen.demo, "Write the demo export suite instead of a seeded suite");
  g->add_option("--out", gen.out, "Output directory")->required();

  sweep_opts sw;
  auto* s = app.add_subcommand("sweep", "Score writers and ablations against certified OPT");
  s->add_option("--manifest", sw.manifest, "Suite manifest")->required();
  s->add_option("--budgets", sw.budgets, "Override the manifest budgets")->delimiter(',')->check(positive);
  s->add_option("--methods", sw.methods, "Comma-separated methods")
      ->delimiter(',')
      ->check(CLI::IsMember(bm::registered_methods()));
  s->add_option("--cost-rule", sw.rule, "word | byte-overhead")->check(CLI::IsMember(rule_names));
  s->add_option("--k", sw.k, "Per-group capacity")->check(CLI::IsMember({1, 2}));
  s->add_option("--out", sw.out, "Output directory")->required();
  s->add_option("--jobs", sw.jobs, "Worker threads")->check(CLI::PositiveNumber);
  s->add_option("--resamples", sw.resamples, "Bootstrap resamples")->check(CLI::PositiveNumber);
  s->add_option("--seed", sw.seed, "Bootstrap seed");
  s->add_option("--sigma", sw.sigma, "Log-normal noise for estimated_gvt")->check(CLI::NonNegativeNumber);
  s->add_flag("--no-cache", sw.no_cache, "Recompute every cell");
  s->add_option("--fault-bound-scale", sw.bound_scale)->group("");

  certify_opts ce;
  auto* c = app.add_subcommand("certify", "Cross-check branch-and-bound against exhaustive enumeration");
  c->add_option("-n,--n", ce.n, "Audit instances")->check(CLI::PositiveNumber);
  c->add_option("--seed", ce.seed, "Audit suite seed");
  c->add_option("--k", ce.k, "Per-group capacity")->check(CLI::IsMember({1, 2}));
  c->add_option("--out", ce.out, "Output directory")->required();
  c->add_option("--fault-bound-scale", ce.bound_scale)->group("");

  score_opts sc;
  auto* x = app.add_subcommand("score-export", "Score exported stores under package and union denominators");
  x->add_option("--export", sc.exports, "Exported store file (repeatable)")->required();
  x->add_option("--package", sc.package, "Package file")->required();
  x->add_option("--budgets", sc.budgets, "Budgets")->delimiter(',')->check(positive)->required();
  x->add_option("--policies", sc.policies, "recency,salience,upper")->delimiter(',');
  x->add_option("--cost-rule", sc.rules, "Cost rules, comma-separated")
      ->delimiter(',')
      ->check(CLI::IsMember(rule_names));
  x->add_option("--k", sc.k, "Per-group capacity")->check(CLI::IsMember({1, 2}));
  x->add_option("--out", sc.out, "Output directory")->required();

  sensitivity_opts se;
  auto* a = app.add_subcommand("sensitivity", "OPT and rankings under k in {1,2} and both cost rules");
  a->add_option("--package", se.packages, "Package file (repeatable); default: demo suite");
  a->add_option("--manifest", se.manifest, "Audit every package in a manifest");
  a->add_option("--export", se.exports, "Exported store file (repeatable)");
  a->add_option("--budgets", se.budgets, "Budgets")->delimiter(',')->check(positive);
  a->add_option("--sigma", se.sigma, "Log-normal noise for estimated_gvt")->check(CLI::NonNegativeNumber);
  a->add_option("--seed", se.seed, "Noise seed");
  a->add_option("--out", se.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ok : usage;
  }

  try {
    if (*g) return run_generate(gen);
    if (*s) return run_sweep(sw);
    if (*c) return run_certify(ce);
    if (*x) return run_score_export(sc);
    if (*a) return run_sensitivity(se);
  } catch (const bm::certification_error& e) {
    std::cerr << "certification failure: " << e.what() << "\n";
    return certification;
  } catch (const bm::parameter_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return usage;
  } catch (const bm::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return data;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return data;
  }
  return usage;
}
