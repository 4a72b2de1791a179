#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <vector>

#include "budgetmem/generator.hpp"
#include "budgetmem/scoring.hpp"
#include "budgetmem/solvers.hpp"
#include "budgetmem/writers.hpp"

namespace budgetmem {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error(path.string(), "cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw io_error(path.string(), "read failed");
  return buf.str();
}

// Writes through a temporary file so an interrupted run never leaves a torn file.
inline void write_file(const fs::path& path, std::string_view bytes) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw io_error(path.parent_path().string(), "cannot create directory (" + ec.message() + ")");
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error(tmp.string(), "cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw io_error(tmp.string(), "write failed");
  }
  fs::rename(tmp, path, ec);
  if (ec) throw io_error(path.string(), "cannot move into place (" + ec.message() + ")");
}

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Shortest "%g"-style budget label, e.g. 2 -> "2", 2.5 -> "2.5".
inline std::string format_budget(double b) {
  std::string s = format_decimal(b);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string format_optional(const std::optional<double>& v, std::string_view null_text) {
  return v ? format_decimal(*v) : std::string(null_text);
}

// ---------------------------------------------------------------------------
// Suite manifest

struct manifest_entry {
  std::string package;  // relative to the manifest directory
  double budget = 0.0;
  distribution dist = distribution::base;
  std::uint64_t seed = 0;

  friend bool operator==(const manifest_entry&, const manifest_entry&) = default;
};

struct manifest {
  std::vector<manifest_entry> entries;
};

inline std::string serialize_manifest(const manifest& m) {
  std::string out = "{\n  \"entries\": [";
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    const auto& e = m.entries[i];
    out += i == 0 ? "\n" : ",\n";
    out += "    {\"package\": " + json_string(e.package) + ", \"budget\": " + format_decimal(e.budget) +
           ", \"distribution\": " + json_string(to_string(e.dist)) + ", \"seed\": " + std::to_string(e.seed) + "}";
  }
  out += m.entries.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

inline manifest parse_manifest(std::string_view bytes) {
  const auto doc = detail::parse_json(bytes);
  detail::get_object(doc, "$");
  const auto& entries = detail::get_array(detail::require(doc, "entries", "$"), "$.entries");
  manifest m;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string path = "$.entries[" + std::to_string(i) + "]";
    const auto& e = detail::get_object(entries[i], path);
    manifest_entry me;
    me.package = detail::get_string(detail::require(e, "package", path), path + ".package");
    me.budget = detail::get_number(detail::require(e, "budget", path), path + ".budget");
    if (!(me.budget > 0.0)) throw parse_error(path + ".budget", "budget must be positive");
    const std::string dist = detail::get_string(detail::require(e, "distribution", path), path + ".distribution");
    const auto d = distribution_from_name(dist);
    if (!d) throw parse_error(path + ".distribution", "unknown distribution '" + dist + "'");
    me.dist = *d;
    const long long seed = detail::get_integer(detail::require(e, "seed", path), path + ".seed");
    if (seed < 0) throw parse_error(path + ".seed", "seed must be nonnegative");
    me.seed = static_cast<std::uint64_t>(seed);
    m.entries.push_back(std::move(me));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Generator overrides ("key=value" on the command line)

inline void apply_override(generator_params& p, std::string_view key, double value) {
  static const std::map<std::string, int generator_params::*, std::less<>> ints{
      {"min_experiences", &generator_params::min_experiences},
      {"max_experiences", &generator_params::max_experiences},
      {"entity_count", &generator_params::entity_count},
      {"max_candidates_per_group", &generator_params::max_candidates_per_group},
      {"chain_count", &generator_params::chain_count},
  };
  static const std::map<std::string, double generator_params::*, std::less<>> reals{
      {"update_probability", &generator_params::update_probability},
      {"deletion_share", &generator_params::deletion_share},
      {"p_atomic_fact", &generator_params::p_atomic_fact},
      {"p_entity_summary", &generator_params::p_entity_summary},
      {"p_temporal_event", &generator_params::p_temporal_event},
      {"p_tombstone", &generator_params::p_tombstone},
      {"p_compound_update", &generator_params::p_compound_update},
      {"p_temporal_unit", &generator_params::p_temporal_unit},
      {"p_provenance_unit", &generator_params::p_provenance_unit},
  };
  if (auto it = ints.find(key); it != ints.end()) {
    if (value != static_cast<double>(static_cast<int>(value)))
      throw parameter_error(std::string(key) + " must be an integer");
    p.*(it->second) = static_cast<int>(value);
  } else if (auto jt = reals.find(key); jt != reals.end()) {
    p.*(jt->second) = value;
  } else {
    throw parameter_error("unknown generator parameter '" + std::string(key) + "'");
  }
}

inline void apply_override(generator_params& p, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw parameter_error("override must look like key=value");
  const std::string value(assignment.substr(eq + 1));
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || *end != '\0') throw parameter_error("override value '" + value + "' is not a number");
  apply_override(p, assignment.substr(0, eq), v);
}

// ---------------------------------------------------------------------------
// cmd_generate

inline constexpr std::array<double, 4> sweep_budgets{2, 4, 8, 16};

struct generate_config {
  distribution dist = distribution::base;
  int n_seeds = 0;
  std::uint64_t base_seed = 0;
  generator_params params;  // seed and distribution are overwritten per package
  std::vector<double> budgets{sweep_budgets.begin(), sweep_budgets.end()};
  fs::path out_dir;
  bool with_exports = false;
};

inline fs::path generate_suite(const generate_config& cfg) {
  if (cfg.n_seeds <= 0) throw parameter_error("n_seeds must be positive");
  if (cfg.budgets.empty()) throw parameter_error("at least one budget is required");
  for (double b : cfg.budgets)
    if (!(b > 0.0)) throw parameter_error("budgets must be positive");
  manifest m;
  for (int i = 0; i < cfg.n_seeds; ++i) {
    generator_params p = cfg.params;
    p.seed = cfg.base_seed + static_cast<std::uint64_t>(i);
    p.dist = cfg.dist;
    const package pkg = generate_package(p);
    const std::string file = pkg.package_id + ".json";
    write_file(cfg.out_dir / file, serialize_package(pkg));
    if (cfg.with_exports)
      for (const auto& ex : synthetic_exports(pkg, p.seed))
        write_file(cfg.out_dir / "exports" / pkg.package_id / (ex.system + ".json"), serialize_export(ex));
    for (double b : cfg.budgets) m.entries.push_back({file, b, cfg.dist, p.seed});
  }
  const fs::path path = cfg.out_dir / "manifest.json";
  write_file(path, serialize_manifest(m));
  return path;
}

// ---------------------------------------------------------------------------
// cmd_sweep

inline const std::vector<std::string>& registered_methods() {
  static const std::vector<std::string> names{"opt",          "gvt",         "estimated_gvt",    "density_only",
                                              "recency_raw",  "no_tombstone_opt", "fact_only_opt", "summary_only_opt"};
  return names;
}

inline bool is_registered_method(std::string_view m) {
  const auto& r = registered_methods();
  return std::find(r.begin(), r.end(), m) != r.end();
}

struct sweep_config {
  fs::path manifest_path;
  std::vector<double> budgets;  // empty: use the manifest's budgets
  std::vector<std::string> methods = registered_methods();
  cost_rule rule;
  int k = 1;
  fs::path out_dir;
  int resamples = 1000;
  double ci_level = 0.95;
  std::uint64_t bootstrap_seed = 0;
  int jobs = 1;
  double sigma = 0.5;
  bnb_options solver;
  bool use_cache = true;

  void validate() const {
    for (double b : budgets)
      if (!(b > 0.0)) throw parameter_error("budgets must be positive");
    if (methods.empty()) throw parameter_error("at least one method is required");
    for (const auto& m : methods)
      if (!is_registered_method(m)) throw parameter_error("unknown method '" + m + "'");
    if (k < 1) throw parameter_error("k must be positive");
    if (resamples < 1) throw parameter_error("resamples must be positive");
    if (jobs < 1) throw parameter_error("jobs must be positive");
    if (!(sigma >= 0.0)) throw parameter_error("sigma must be nonnegative");
  }
};

// One (seed, budget, method) cell. Reals are already on the 6-decimal grid.
struct sweep_row {
  std::string distribution;
  std::uint64_t seed = 0;
  std::string package_id;
  double budget = 0.0;
  std::string method;
  cost_rule_kind rule = cost_rule_kind::word;
  int k = 1;
  double value = 0.0;
  double opt = 0.0;
  std::optional<double> ratio;
  double invalidation_coverage = 0.0;
  std::string denominator_solver;
  bool certified = false;

  friend bool operator==(const sweep_row&, const sweep_row&) = default;
};

inline constexpr std::string_view sweep_csv_header =
    "distribution,seed,package_id,budget,method,cost_rule,k,value,opt,ratio,invalidation_coverage,"
    "denominator_solver,certified";

inline std::string csv_line(const sweep_row& r) {
  return csv_field(r.distribution) + "," + std::to_string(r.seed) + "," + csv_field(r.package_id) + "," +
         format_decimal(r.budget) + "," + r.method + "," + std::string(to_string(r.rule)) + "," +
         std::to_string(r.k) + "," + format_decimal(r.value) + "," + format_decimal(r.opt) + "," +
         format_optional(r.ratio, "") + "," + format_decimal(r.invalidation_coverage) + "," +
         r.denominator_solver + "," + (r.certified ? "true" : "false");
}

namespace detail {

inline std::string cell_json(const sweep_row& r) {
  return "{\"distribution\": " + json_string(r.distribution) + ", \"seed\": " + std::to_string(r.seed) +
         ", \"package_id\": " + json_string(r.package_id) + ", \"budget\": " + format_decimal(r.budget) +
         ", \"method\": " + json_string(r.method) + ", \"cost_rule\": " + json_string(to_string(r.rule)) +
         ", \"k\": " + std::to_string(r.k) + ", \"value\": " + format_decimal(r.value) +
         ", \"opt\": " + format_decimal(r.opt) + ", \"ratio\": " + format_optional(r.ratio, "null") +
         ", \"invalidation_coverage\": " + format_decimal(r.invalidation_coverage) +
         ", \"denominator_solver\": " + json_string(r.denominator_solver) +
         ", \"certified\": " + (r.certified ? "true" : "false") + "}\n";
}

inline sweep_row parse_cell(std::string_view bytes) {
  const auto doc = parse_json(bytes);
  get_object(doc, "$");
  sweep_row r;
  r.distribution = get_string(require(doc, "distribution", "$"), "$.distribution");
  r.seed = static_cast<std::uint64_t>(get_integer(require(doc, "seed", "$"), "$.seed"));
  r.package_id = get_string(require(doc, "package_id", "$"), "$.package_id");
  r.budget = get_number(require(doc, "budget", "$"), "$.budget");
  r.method = get_string(require(doc, "method", "$"), "$.method");
  const auto rule = cost_rule_from_name(get_string(require(doc, "cost_rule", "$"), "$.cost_rule"));
  if (!rule) throw parse_error("$.cost_rule", "unknown cost rule");
  r.rule = *rule;
  r.k = static_cast<int>(get_integer(require(doc, "k", "$"), "$.k"));
  r.value = get_number(require(doc, "value", "$"), "$.value");
  r.opt = get_number(require(doc, "opt", "$"), "$.opt");
  const auto& ratio = require(doc, "ratio", "$");
  if (!ratio.is_null()) r.ratio = get_number(ratio, "$.ratio");
  r.invalidation_coverage = get_number(require(doc, "invalidation_coverage", "$"), "$.invalidation_coverage");
  r.denominator_solver = get_string(require(doc, "denominator_solver", "$"), "$.denominator_solver");
  const auto& cert = require(doc, "certified", "$");
  if (!cert.is_boolean()) throw parse_error("$.certified", "expected a boolean");
  r.certified = cert.get<bool>();
  return r;
}

inline std::string cell_key(std::string_view package_bytes, double budget, const std::string& method,
                            const sweep_config& cfg) {
  std::uint64_t h = fnv1a64(package_bytes);
  const std::string params = "v1|" + format_decimal(budget) + "|" + method + "|" + std::string(to_string(cfg.rule.kind)) +
                             "|" + std::to_string(cfg.k) + "|" + format_decimal(cfg.sigma) + "|" +
                             format_decimal(cfg.solver.bound_scale);
  h = fnv1a64(params, h);
  return hex64(h);
}

struct sweep_job {
  const manifest_entry* entry;
  const std::string* bytes;
  double budget;
};

inline writer_result run_writer(const instance& inst, double budget, const std::string& method, double sigma,
                                std::uint64_t seed) {
  if (method == "gvt") return gvt_best_over_grid(inst, budget);
  if (method == "estimated_gvt") return estimated_gvt_write(inst, budget, default_grid(inst, budget), sigma, seed);
  if (method == "density_only") return density_only_write(inst, budget);
  if (method == "recency_raw") return recency_raw_write(inst, budget);
  throw parameter_error("unknown writer '" + method + "'");
}

inline std::vector<sweep_row> run_sweep_job(const sweep_job& job, const sweep_config& cfg, const fs::path& cell_dir) {
  std::vector<sweep_row> rows;
  std::optional<instance> inst;
  std::optional<solve_result> opt;
  for (const auto& method : cfg.methods) {
    const fs::path cell = cell_dir / (cell_key(*job.bytes, job.budget, method, cfg) + ".json");
    if (cfg.use_cache && fs::exists(cell)) {
      rows.push_back(parse_cell(read_file(cell)));
      continue;
    }
    if (!inst) {
      inst = compile(parse_package(*job.bytes), cfg.rule);
      opt = solve_exact_bnb(*inst, job.budget, cfg.k, cfg.solver);
      if (!opt->exact)
        throw certification_error("denominator for " + inst->package_id + " at budget " + format_budget(job.budget) +
                                  " is not certified");
    }
    std::vector<std::size_t> selected;
    if (method == "opt") selected = opt->selected;
    else if (method == "no_tombstone_opt") selected = restricted_exact(*inst, job.budget, kind_restriction::no_tombstone(), cfg.k).selected;
    else if (method == "fact_only_opt") selected = restricted_exact(*inst, job.budget, kind_restriction::only(candidate_kind::atomic_fact), cfg.k).selected;
    else if (method == "summary_only_opt") selected = restricted_exact(*inst, job.budget, kind_restriction::only(candidate_kind::entity_summary), cfg.k).selected;
    else selected = run_writer(*inst, job.budget, method, cfg.sigma, job.entry->seed).selected;

    const ratio_report rep = package_ratio(*inst, selected, job.budget, cfg.k, method, opt, cfg.rule.kind);
    sweep_row r;
    r.distribution = std::string(to_string(job.entry->dist));
    r.seed = job.entry->seed;
    r.package_id = inst->package_id;
    r.budget = quantize(job.budget);
    r.method = method;
    r.rule = cfg.rule.kind;
    r.k = cfg.k;
    r.value = quantize(rep.value);
    r.opt = quantize(rep.denominator);
    if (rep.ratio) r.ratio = quantize(*rep.ratio);
    r.invalidation_coverage = quantize(rep.invalidation_coverage);
    r.denominator_solver = rep.denominator_solver;
    r.certified = rep.certified;
    if (cfg.use_cache) write_file(cell, cell_json(r));
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace detail

struct summary_cell {
  std::string distribution;
  double budget = 0.0;
  std::string method;
  std::size_t n = 0;
  std::size_t excluded_null = 0;
  double mean_ratio = 0.0;
  std::pair<double, double> ci{0.0, 0.0};
  double mean_value = 0.0;
  double mean_invalidation_coverage = 0.0;
};

struct sweep_outcome {
  std::vector<sweep_row> rows;
  std::vector<summary_cell> summary;
  fs::path results_csv, summary_json, plot_csv;
};

// Per (distribution, budget, method) means; OPT = 0 rows are excluded from the
// ratio mean and counted.
inline std::vector<summary_cell> summarize(const std::vector<sweep_row>& rows, const std::vector<std::string>& methods,
                                           int resamples, double level, std::uint64_t seed) {
  struct acc {
    std::vector<double> ratios, values, inval;
    std::size_t nulls = 0;
  };
  auto method_rank = [&](const std::string& m) {
    return static_cast<std::size_t>(std::find(methods.begin(), methods.end(), m) - methods.begin());
  };
  std::map<std::tuple<std::string, double, std::size_t>, acc> groups;
  for (const auto& r : rows) {
    auto& a = groups[{r.distribution, r.budget, method_rank(r.method)}];
    if (r.ratio) a.ratios.push_back(*r.ratio);
    else ++a.nulls;
    a.values.push_back(r.value);
    a.inval.push_back(r.invalidation_coverage);
  }
  std::vector<summary_cell> out;
  std::uint64_t index = 0;
  for (const auto& [key, a] : groups) {
    summary_cell c;
    c.distribution = std::get<0>(key);
    c.budget = std::get<1>(key);
    c.method = methods[std::get<2>(key)];
    c.n = a.ratios.size();
    c.excluded_null = a.nulls;
    c.mean_value = quantize(mean(a.values));
    c.mean_invalidation_coverage = quantize(mean(a.inval));
    if (!a.ratios.empty()) {
      c.mean_ratio = quantize(mean(a.ratios));
      const auto [lo, hi] = bootstrap_ci(a.ratios, level, resamples, rng::derive(seed, index));
      c.ci = {quantize(lo), quantize(hi)};
    }
    ++index;
    out.push_back(std::move(c));
  }
  return out;
}

inline std::string summary_json(const std::vector<summary_cell>& cells, const sweep_config& cfg) {
  std::string out = "{\n  \"cost_rule\": " + json_string(to_string(cfg.rule.kind)) + ",\n  \"k\": " +
                    std::to_string(cfg.k) + ",\n  \"ci_level\": " + format_decimal(cfg.ci_level) +
                    ",\n  \"resamples\": " + std::to_string(cfg.resamples) + ",\n  \"cells\": [";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    out += i == 0 ? "\n" : ",\n";
    out += "    {\"distribution\": " + json_string(c.distribution) + ", \"budget\": " + format_decimal(c.budget) +
           ", \"method\": " + json_string(c.method) + ", \"n\": " + std::to_string(c.n) +
           ", \"excluded_null\": " + std::to_string(c.excluded_null) +
           ", \"mean_ratio\": " + (c.n ? format_decimal(c.mean_ratio) : "null") +
           ", \"ci_low\": " + (c.n ? format_decimal(c.ci.first) : "null") +
           ", \"ci_high\": " + (c.n ? format_decimal(c.ci.second) : "null") +
           ", \"mean_value\": " + format_decimal(c.mean_value) +
           ", \"mean_invalidation_coverage\": " + format_decimal(c.mean_invalidation_coverage) + "}";
  }
  out += cells.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

inline std::string plot_csv(const std::vector<summary_cell>& cells) {
  std::string out = "distribution,budget,method,mean_ratio,ci_low,ci_high,n,excluded_null,mean_invalidation_coverage\n";
  for (const auto& c : cells)
    out += c.distribution + "," + format_budget(c.budget) + "," + c.method + "," +
           (c.n ? format_decimal(c.mean_ratio) : "") + "," + (c.n ? format_decimal(c.ci.first) : "") + "," +
           (c.n ? format_decimal(c.ci.second) : "") + "," + std::to_string(c.n) + "," +
           std::to_string(c.excluded_null) + "," + format_decimal(c.mean_invalidation_coverage) + "\n";
  return out;
}

inline std::string results_csv(const std::vector<sweep_row>& rows) {
  std::string out = std::string(sweep_csv_header) + "\n";
  for (const auto& r : rows) out += csv_line(r) + "\n";
  return out;
}

// Evaluates every (package, budget, method) cell. Jobs run on `cfg.jobs`
// threads; rows are collected in manifest order and written once at the end.
inline sweep_outcome run_sweep(const sweep_config& cfg) {
  cfg.validate();
  const manifest m = parse_manifest(read_file(cfg.manifest_path));
  const fs::path base = cfg.manifest_path.parent_path();

  std::map<std::string, std::string> bytes;
  std::vector<detail::sweep_job> jobs;
  std::vector<std::string> seen;
  for (const auto& e : m.entries) {
    if (!bytes.contains(e.package)) bytes.emplace(e.package, read_file(base / e.package));
    if (cfg.budgets.empty()) {
      jobs.push_back({&e, &bytes.at(e.package), e.budget});
    } else if (std::find(seen.begin(), seen.end(), e.package) == seen.end()) {
      seen.push_back(e.package);
      for (double b : cfg.budgets) jobs.push_back({&e, &bytes.at(e.package), b});
    }
  }

  const fs::path cell_dir = cfg.out_dir / "cells";
  std::vector<std::vector<sweep_row>> results(jobs.size());
  std::vector<std::exception_ptr> failures(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        results[i] = detail::run_sweep_job(jobs[i], cfg, cell_dir);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const int threads = std::min<int>(cfg.jobs, static_cast<int>(std::max<std::size_t>(jobs.size(), 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  sweep_outcome out;
  for (auto& r : results)
    for (auto& row : r) {
      if (!row.certified) throw certification_error("uncertified denominator in cell for " + row.package_id);
      out.rows.push_back(std::move(row));
    }
  out.summary = summarize(out.rows, cfg.methods, cfg.resamples, cfg.ci_level, cfg.bootstrap_seed);
  out.results_csv = cfg.out_dir / "results.csv";
  out.summary_json = cfg.out_dir / "summary.json";
  out.plot_csv = cfg.out_dir / "plot_data.csv";
  write_file(out.results_csv, results_csv(out.rows));
  write_file(out.summary_json, summary_json(out.summary, cfg));
  write_file(out.plot_csv, plot_csv(out.summary));
  return out;
}

// ---------------------------------------------------------------------------
// cmd_certify

inline std::vector<certification_row> certify_suite(int n, std::uint64_t seed, int k = 1, bnb_options opts = {}) {
  if (n <= 0) throw parameter_error("n must be positive");
  std::vector<certification_row> rows;
  rows.reserve(static_cast<std::size_t>(n));
  for (const auto& a : generate_audit_suite(n, seed)) rows.push_back(certify(compile(a.pkg), a.budget, k, opts));
  return rows;
}

inline std::string certification_csv(const std::vector<certification_row>& rows) {
  std::string out = "package_id,budget,k,bnb_value,audit_value,equal,max_diff,nodes_explored\n";
  for (const auto& r : rows)
    out += csv_field(r.package_id) + "," + format_decimal(r.budget) + "," + std::to_string(r.k) + "," +
           format_decimal(r.bnb_value) + "," + format_decimal(r.audit_value) + "," + (r.equal ? "true" : "false") +
           "," + format_decimal(r.max_diff) + "," + std::to_string(r.nodes_explored) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// cmd_score_export

struct export_score_row {
  std::string system;
  std::string package_id;
  prune_policy policy = prune_policy::recency;
  ratio_report report;
  std::size_t kept = 0;
};

struct export_ranking {
  double budget = 0.0;
  denominator_kind kind = denominator_kind::package;
  std::vector<method_ratio> methods;
  std::optional<double> rank_correlation;
};

struct export_scoring {
  std::vector<export_score_row> rows;
  std::vector<export_ranking> rankings;  // only when both cost rules were scored
  std::vector<std::string> skipped;
};

inline export_scoring score_exports(const package& pkg, const std::vector<exported_store>& exports,
                                    const std::vector<double>& budgets, const std::vector<prune_policy>& policies,
                                    const std::vector<cost_rule>& rules, int k = 1) {
  if (budgets.empty() || policies.empty() || rules.empty())
    throw parameter_error("budgets, policies, and cost rules must be nonempty");
  export_scoring out;
  for (const auto& ex : exports)
    for (double b : budgets)
      for (auto policy : policies) {
        const bool scored = std::all_of(ex.memories.begin(), ex.memories.end(),
                                        [](const exported_memory& m) { return m.salience.has_value(); });
        if (policy == prune_policy::salience && !scored) {
          const std::string note = ex.system + ": salience pruning skipped, memories carry no salience";
          if (std::find(out.skipped.begin(), out.skipped.end(), note) == out.skipped.end()) out.skipped.push_back(note);
          continue;
        }
        for (const auto& rule : rules) {
          const union_score s = union_ratio(ex, pkg, b, policy, rule, k);
          for (const auto* rep : {&s.package_report, &s.union_report})
            out.rows.push_back({ex.system, pkg.package_id, policy, *rep, s.kept.size()});
        }
      }

  const bool both = rules.size() >= 2 && std::any_of(rules.begin(), rules.end(), [](const cost_rule& r) {
                      return r.kind == cost_rule_kind::word;
                    }) && std::any_of(rules.begin(), rules.end(), [](const cost_rule& r) {
                      return r.kind == cost_rule_kind::byte_overhead;
                    });
  if (both)
    for (double b : budgets)
      for (auto kind : {denominator_kind::package, denominator_kind::union_package}) {
        export_ranking rk{b, kind, {}, std::nullopt};
        std::map<std::string, method_ratio> by_method;
        std::vector<std::string> order;
        for (const auto& r : out.rows) {
          if (r.report.budget != b || r.report.kind != kind || r.report.analysis_only) continue;
          auto [it, fresh] = by_method.try_emplace(r.report.method, method_ratio{r.report.method, {}, {}});
          if (fresh) order.push_back(r.report.method);
          (r.report.rule == cost_rule_kind::word ? it->second.word_ratio : it->second.byte_ratio) = r.report.ratio;
        }
        for (const auto& m : order) rk.methods.push_back(by_method.at(m));
        rk.rank_correlation = rank_correlation(rk.methods);
        out.rankings.push_back(std::move(rk));
      }
  return out;
}

inline std::string export_scores_csv(const export_scoring& s) {
  std::string out =
      "system,package_id,budget,policy,cost_rule,k,denominator_kind,value,denominator,ratio,invalidation_coverage,"
      "kept,denominator_solver,certified,analysis_only\n";
  for (const auto& r : s.rows) {
    const auto& p = r.report;
    out += csv_field(r.system) + "," + csv_field(r.package_id) + "," + format_decimal(p.budget) + "," +
           std::string(to_string(r.policy)) + "," + std::string(to_string(p.rule)) + "," + std::to_string(p.k) +
           "," + std::string(to_string(p.kind)) + "," + format_decimal(p.value) + "," +
           format_decimal(p.denominator) + "," + format_optional(p.ratio, "") + "," +
           format_decimal(p.invalidation_coverage) + "," + std::to_string(r.kept) + "," + p.denominator_solver +
           "," + (p.certified ? "true" : "false") + "," + (p.analysis_only ? "true" : "false") + "\n";
  }
  return out;
}

namespace detail {

inline std::string method_ratios_json(const std::vector<method_ratio>& rows, const std::string& indent) {
  std::string out = "[";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out += i == 0 ? "\n" : ",\n";
    out += indent + "  {\"method\": " + json_string(rows[i].method) +
           ", \"word\": " + format_optional(rows[i].word_ratio, "null") +
           ", \"byte_overhead\": " + format_optional(rows[i].byte_ratio, "null") + "}";
  }
  return out + (rows.empty() ? "]" : "\n" + indent + "]");
}

}  // namespace detail

inline std::string export_rankings_json(const export_scoring& s) {
  std::string out = "{\n  \"rankings\": [";
  for (std::size_t i = 0; i < s.rankings.size(); ++i) {
    const auto& r = s.rankings[i];
    out += i == 0 ? "\n" : ",\n";
    out += "    {\"budget\": " + format_decimal(r.budget) + ", \"denominator_kind\": " +
           json_string(to_string(r.kind)) + ", \"rank_correlation\": " + format_optional(r.rank_correlation, "null") +
           ",\n     \"methods\": " + detail::method_ratios_json(r.methods, "     ") + "}";
  }
  out += s.rankings.empty() ? "],\n" : "\n  ],\n";
  out += "  \"skipped\": [";
  for (std::size_t i = 0; i < s.skipped.size(); ++i) out += (i ? ", " : "") + json_string(s.skipped[i]);
  return out + "]\n}\n";
}

// ---------------------------------------------------------------------------
// Sensitivity

inline std::string sensitivity_json(const std::vector<sensitivity_report>& reports) {
  std::string out = "{\n  \"reports\": [";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    out += i == 0 ? "\n" : ",\n";
    out += "    {\"package_id\": " + json_string(r.package_id) + ", \"budget\": " + format_decimal(r.budget) +
           ",\n     \"opt\": {\"k1_word\": " + format_decimal(r.opt_k1_word) + ", \"k2_word\": " +
           format_decimal(r.opt_k2_word) + ", \"k1_byte_overhead\": " + format_decimal(r.opt_k1_byte) +
           ", \"k2_byte_overhead\": " + format_decimal(r.opt_k2_byte) + "},\n     \"k2_over_k1\": {\"word\": " +
           format_optional(r.k2_over_k1_word, "null") + ", \"byte_overhead\": " +
           format_optional(r.k2_over_k1_byte, "null") + "},\n     \"byte_over_word\": {\"k1\": " +
           format_optional(r.byte_over_word_k1, "null") + ", \"k2\": " + format_optional(r.byte_over_word_k2, "null") +
           "},\n     \"writer_methods\": " + detail::method_ratios_json(r.writer_methods, "     ") +
           ",\n     \"writer_rank_correlation\": " + format_optional(r.writer_rank_correlation, "null") +
           ",\n     \"export_methods\": " + detail::method_ratios_json(r.export_methods, "     ") +
           ",\n     \"export_rank_correlation\": " + format_optional(r.export_rank_correlation, "null") + "}";
  }
  out += reports.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

}  // namespace budgetmem
