#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "budgetmem/exports.hpp"
#include "budgetmem/package.hpp"
#include "budgetmem/rng.hpp"
#include "budgetmem/serialize.hpp"

namespace budgetmem {

enum class distribution { base, update_chain, temporal_interval };

inline std::string_view to_string(distribution d) {
  switch (d) {
    case distribution::base: return "base";
    case distribution::update_chain: return "update_chain";
    case distribution::temporal_interval: return "temporal_interval";
  }
  return "?";
}

inline std::optional<distribution> distribution_from_name(std::string_view name) {
  if (name == "base") return distribution::base;
  if (name == "update_chain" || name == "update-chain") return distribution::update_chain;
  if (name == "temporal_interval" || name == "temporal-interval") return distribution::temporal_interval;
  return std::nullopt;
}

struct word_range {
  int min = 1;
  int max = 1;
};

struct real_range {
  double min = 0.0;
  double max = 0.0;
};

// Every knob of the synthetic event-graph generator. Costs are word counts of
// the templated candidate text, so both cost rules apply to generated packages.
struct generator_params {
  std::uint64_t seed = 0;
  distribution dist = distribution::base;
  int min_experiences = 8;
  int max_experiences = 16;
  int entity_count = 4;
  double update_probability = 0.35;
  double deletion_share = 0.15;  // fraction of updates that delete instead of supersede
  int max_candidates_per_group = 5;

  double p_atomic_fact = 0.9;
  double p_entity_summary = 0.5;
  double p_temporal_event = 0.25;
  double p_tombstone = 0.9;
  double p_compound_update = 0.8;
  double p_temporal_unit = 0.6;
  double p_provenance_unit = 0.5;

  word_range raw_cost{5, 8};
  word_range fact_cost{1, 2};
  word_range summary_cost{3, 4};
  word_range temporal_cost{2, 3};
  word_range tombstone_cost{2, 3};
  word_range compound_cost{3, 4};

  real_range current_fact_weight{0.6, 1.0};
  real_range stale_fact_weight{0.15, 0.35};
  real_range temporal_weight{0.1, 0.3};
  real_range boundary_weight{0.4, 0.7};
  real_range provenance_weight{0.05, 0.15};
  real_range invalidation_weight{0.7, 1.1};
  real_range abstention_weight{0.5, 0.9};

  real_range raw_strength{0.6, 1.0};
  real_range summary_strength{0.4, 0.8};
  real_range compound_fact_strength{0.6, 1.0};
  double temporal_event_fact_strength = 0.5;

  // update_chain: each tracked attribute is superseded this many times.
  word_range chain_supersessions{2, 4};
  int chain_count = 3;
  // temporal_interval: number of interval-valid attributes.
  word_range interval_count{2, 3};

  void validate() const {
    auto prob = [](double p, const char* name) {
      if (!(p >= 0.0 && p <= 1.0)) throw parameter_error(std::string(name) + " must lie in [0, 1]");
    };
    prob(update_probability, "update_probability");
    prob(deletion_share, "deletion_share");
    prob(p_atomic_fact, "p_atomic_fact");
    prob(p_entity_summary, "p_entity_summary");
    prob(p_temporal_event, "p_temporal_event");
    prob(p_tombstone, "p_tombstone");
    prob(p_compound_update, "p_compound_update");
    prob(p_temporal_unit, "p_temporal_unit");
    prob(p_provenance_unit, "p_provenance_unit");
    if (min_experiences < 1 || max_experiences < min_experiences)
      throw parameter_error("need 1 <= min_experiences <= max_experiences");
    if (entity_count < 1) throw parameter_error("entity_count must be positive");
    if (max_candidates_per_group < 2) throw parameter_error("max_candidates_per_group must be at least 2");
    for (const auto* r : {&raw_cost, &fact_cost, &summary_cost, &temporal_cost, &tombstone_cost, &compound_cost})
      if (r->min < 1 || r->max < r->min) throw parameter_error("cost ranges must be positive and ordered");
    for (const auto* r : {&current_fact_weight, &stale_fact_weight, &temporal_weight, &boundary_weight,
                          &provenance_weight, &invalidation_weight, &abstention_weight})
      if (r->min < 0.0 || r->max < r->min) throw parameter_error("weight ranges must be nonnegative and ordered");
    for (const auto* r : {&raw_strength, &summary_strength, &compound_fact_strength})
      if (r->min < 0.0 || r->max > 1.0 || r->max < r->min) throw parameter_error("coverage strengths must lie in [0, 1]");
  }
};

namespace detail {

inline constexpr std::array<const char*, 6> attribute_names{"city", "diet", "employer", "pet", "phone", "team"};

enum class event_type { statement, update, deletion, interval_start, interval_end };

struct event {
  event_type type = event_type::statement;
  int entity = 0;
  int attribute = 0;
  int value = 0;
  int supersedes = -1;  // experience index of the statement this one invalidates
  bool current = true;  // still true at the end of the stream
};

inline std::string pad2(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d", i);
  return buf;
}

// Templated text with exactly `words` whitespace-delimited tokens.
inline std::string templated_text(std::vector<std::string> tokens, int words) {
  static constexpr std::array<const char*, 6> filler{"noted", "during", "the", "session", "with", "user"};
  std::size_t f = 0;
  while (tokens.size() < static_cast<std::size_t>(words)) tokens.emplace_back(filler[f++ % filler.size()]);
  tokens.resize(static_cast<std::size_t>(words));
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) out += (i ? " " : "") + tokens[i];
  return out;
}

}  // namespace detail

// Filler text with exactly `words` tokens, led by `label`.
inline std::string templated_text_for(const std::string& label, int words) {
  return detail::templated_text({label}, words);
}

namespace detail {

inline int draw(rng& gen, word_range r) { return static_cast<int>(gen.uniform_int(r.min, r.max)); }
inline double draw(rng& gen, real_range r) { return quantize(gen.uniform(r.min, r.max)); }

struct slot_state {
  int last_experience = -1;  // experience that set the current value, -1 if unset
};

class event_graph_builder {
 public:
  event_graph_builder(const generator_params& p, rng& gen) : p_(p), gen_(gen) {}

  std::vector<event> build(int experiences) {
    const int attrs = static_cast<int>(attribute_names.size());
    slots_.assign(static_cast<std::size_t>(p_.entity_count * attrs), {});
    events_.assign(static_cast<std::size_t>(experiences), {});
    std::vector<bool> reserved(static_cast<std::size_t>(experiences), false);

    if (p_.dist == distribution::update_chain) plan_chains(experiences, reserved);
    if (p_.dist == distribution::temporal_interval) plan_intervals(experiences, reserved);

    for (int i = 0; i < experiences; ++i) {
      if (reserved[static_cast<std::size_t>(i)]) {
        apply(i);
        continue;
      }
      const double update_p = p_.dist == distribution::base ? p_.update_probability : p_.update_probability / 3.0;
      auto active = active_slots(i);
      if (!active.empty() && gen_.bernoulli(update_p)) {
        const int slot = active[gen_.index(active.size())];
        event& e = events_[static_cast<std::size_t>(i)];
        e.type = gen_.bernoulli(p_.deletion_share) ? event_type::deletion : event_type::update;
        e.entity = slot / attrs;
        e.attribute = slot % attrs;
        e.value = next_value_++;
      } else {
        auto free = free_slots(i);
        const int slot = free.empty() ? static_cast<int>(gen_.index(slots_.size())) : free[gen_.index(free.size())];
        event& e = events_[static_cast<std::size_t>(i)];
        e.type = event_type::statement;
        e.entity = slot / attrs;
        e.attribute = slot % attrs;
        e.value = next_value_++;
      }
      apply(i);
    }
    return events_;
  }

 private:
  int slot_of(const event& e) const { return e.entity * static_cast<int>(attribute_names.size()) + e.attribute; }

  // Slots with a current value that are not reserved for a planned chain.
  std::vector<int> active_slots(int) const {
    std::vector<int> out;
    for (std::size_t s = 0; s < slots_.size(); ++s)
      if (slots_[s].last_experience >= 0 && !planned_.contains(static_cast<int>(s))) out.push_back(static_cast<int>(s));
    return out;
  }

  std::vector<int> free_slots(int) const {
    std::vector<int> out;
    for (std::size_t s = 0; s < slots_.size(); ++s)
      if (slots_[s].last_experience < 0 && !planned_.contains(static_cast<int>(s))) out.push_back(static_cast<int>(s));
    return out;
  }

  // Fills in `supersedes` and retires the superseded statement.
  void apply(int i) {
    event& e = events_[static_cast<std::size_t>(i)];
    slot_state& slot = slots_[static_cast<std::size_t>(slot_of(e))];
    const bool invalidates = e.type == event_type::update || e.type == event_type::deletion ||
                             e.type == event_type::interval_end ||
                             (e.type == event_type::statement && slot.last_experience >= 0);
    if (invalidates && slot.last_experience >= 0) {
      e.supersedes = slot.last_experience;
      events_[static_cast<std::size_t>(slot.last_experience)].current = false;
      if (e.type == event_type::statement) e.type = event_type::update;
    } else if (e.type == event_type::update || e.type == event_type::deletion) {
      e.type = event_type::statement;  // nothing to invalidate
    }
    const bool ends = e.type == event_type::deletion || e.type == event_type::interval_end;
    slot.last_experience = ends ? -1 : i;
    if (ends) e.current = false;
  }

  std::vector<int> pick_positions(int experiences, std::vector<bool>& reserved, int count) {
    std::vector<int> open;
    for (int i = 0; i < experiences; ++i)
      if (!reserved[static_cast<std::size_t>(i)]) open.push_back(i);
    std::vector<int> chosen;
    for (int c = 0; c < count && !open.empty(); ++c) {
      const std::size_t j = gen_.index(open.size());
      chosen.push_back(open[j]);
      open.erase(open.begin() + static_cast<std::ptrdiff_t>(j));
    }
    std::sort(chosen.begin(), chosen.end());
    for (int i : chosen) reserved[static_cast<std::size_t>(i)] = true;
    return chosen;
  }

  int pick_unplanned_slot() {
    std::vector<int> out;
    for (std::size_t s = 0; s < slots_.size(); ++s)
      if (!planned_.contains(static_cast<int>(s))) out.push_back(static_cast<int>(s));
    const int slot = out[gen_.index(out.size())];
    planned_.insert(slot);
    return slot;
  }

  // Each chain: one statement then 2-4 supersessions of the same attribute.
  void plan_chains(int experiences, std::vector<bool>& reserved) {
    const int attrs = static_cast<int>(attribute_names.size());
    int used = 0;
    for (int c = 0; c < p_.chain_count; ++c) {
      int length = 1 + draw(gen_, p_.chain_supersessions);
      length = std::min(length, experiences - used);
      if (length < 3) break;
      used += length;
      const int slot = pick_unplanned_slot();
      const auto positions = pick_positions(experiences, reserved, length);
      for (std::size_t j = 0; j < positions.size(); ++j) {
        event& e = events_[static_cast<std::size_t>(positions[j])];
        e.type = j == 0 ? event_type::statement : event_type::update;
        e.entity = slot / attrs;
        e.attribute = slot % attrs;
        e.value = next_value_++;
      }
    }
  }

  // Each interval attribute opens at one experience and usually closes later.
  void plan_intervals(int experiences, std::vector<bool>& reserved) {
    const int attrs = static_cast<int>(attribute_names.size());
    const int count = draw(gen_, p_.interval_count);
    for (int c = 0; c < count; ++c) {
      const bool closes = gen_.bernoulli(0.75);
      const int need = closes ? 2 : 1;
      const auto positions = pick_positions(experiences, reserved, need);
      if (positions.empty()) break;
      const int slot = pick_unplanned_slot();
      for (std::size_t j = 0; j < positions.size(); ++j) {
        event& e = events_[static_cast<std::size_t>(positions[j])];
        e.type = j == 0 ? event_type::interval_start : event_type::interval_end;
        e.entity = slot / attrs;
        e.attribute = slot % attrs;
        e.value = next_value_++;
      }
    }
  }

  const generator_params& p_;
  rng& gen_;
  std::vector<slot_state> slots_;
  std::vector<event> events_;
  std::set<int> planned_;
  int next_value_ = 0;
};

}  // namespace detail

// Synthetic package from a hidden event graph: entities with attribute
// timelines, an ordered experience stream, and 2-5 candidate representations
// per experience. Pure function of `params`.
inline package generate_package(const generator_params& params) {
  params.validate();
  using detail::draw;
  using detail::event_type;

  rng gen(params.seed);
  const int experiences = static_cast<int>(gen.uniform_int(params.min_experiences, params.max_experiences));
  if (experiences <= 0) throw parameter_error("package needs at least one experience");
  const auto events = detail::event_graph_builder(params, gen).build(experiences);

  package pkg;
  pkg.package_id = std::string(to_string(params.dist)) + "-" + std::to_string(params.seed);
  pkg.metadata = {"event_graph", params.seed, std::string(to_string(params.dist))};

  std::vector<std::optional<std::string>> fact_unit(events.size());
  std::vector<int> last_about_entity(static_cast<std::size_t>(params.entity_count), -1);

  for (int i = 0; i < experiences; ++i) {
    const auto& e = events[static_cast<std::size_t>(i)];
    const std::string prefix = "e" + detail::pad2(i);
    const std::string subject = "ent" + std::to_string(e.entity) + "." + detail::attribute_names[static_cast<std::size_t>(e.attribute)];
    const std::string value = "v" + std::to_string(e.value);
    const bool removes = e.type == event_type::deletion || e.type == event_type::interval_end;
    const bool invalidates = e.supersedes >= 0;
    const bool interval = e.type == event_type::interval_start || e.type == event_type::interval_end;

    auto add_unit = [&](const std::string& suffix, unit_class klass, real_range w, std::string description) {
      pkg.evidence_units.push_back({prefix + "." + suffix, std::move(description), klass, draw(gen, w)});
      return prefix + "." + suffix;
    };

    std::optional<std::string> fact, time, prov, inval, abstain;
    if (!removes) {
      const unit_class klass = e.attribute == 1 ? unit_class::preference : unit_class::fact;
      fact = add_unit("fact", klass, e.current ? params.current_fact_weight : params.stale_fact_weight,
                      subject + " = " + value);
      fact_unit[static_cast<std::size_t>(i)] = fact;
    }
    if (interval)
      time = add_unit("time", unit_class::temporal, params.boundary_weight,
                      subject + (removes ? " interval ends at t" : " interval starts at t") + std::to_string(i));
    else if (gen.bernoulli(params.p_temporal_unit))
      time = add_unit("time", unit_class::temporal, params.temporal_weight, subject + " stated at t" + std::to_string(i));
    if (gen.bernoulli(params.p_provenance_unit))
      prov = add_unit("prov", unit_class::provenance, params.provenance_weight, "source turn " + std::to_string(i));
    if (invalidates)
      inval = add_unit("inval", unit_class::invalidation, params.invalidation_weight,
                       subject + " value from t" + std::to_string(e.supersedes) + " is no longer current");
    if (e.type == event_type::deletion)
      abstain = add_unit("abstain", unit_class::abstention, params.abstention_weight,
                         "abstain on " + subject + " after t" + std::to_string(i));

    std::vector<candidate> cands;
    auto make = [&](const std::string& suffix, candidate_kind kind, word_range cost, std::vector<std::string> tokens) {
      candidate c;
      c.id = prefix + "." + suffix;
      c.group_id = i;
      c.kind = kind;
      c.text = detail::templated_text(std::move(tokens), draw(gen, cost));
      return c;
    };

    {
      candidate raw = make("raw", candidate_kind::raw_span, params.raw_cost,
                           {"user:", subject, removes ? "removed" : "is", value, "at", "turn", std::to_string(i)});
      if (fact) raw.coverage[*fact] = draw(gen, params.raw_strength);
      if (time) raw.coverage[*time] = draw(gen, params.raw_strength);
      if (prov) raw.coverage[*prov] = 1.0;
      cands.push_back(std::move(raw));
    }
    if (fact && gen.bernoulli(params.p_atomic_fact)) {
      candidate c = make("fact", candidate_kind::atomic_fact, params.fact_cost, {subject + "=" + value, "now"});
      c.coverage[*fact] = 1.0;
      cands.push_back(std::move(c));
    }
    const double p_event = params.dist == distribution::temporal_interval ? 0.8 : params.p_temporal_event;
    if (time && gen.bernoulli(p_event)) {
      candidate c = make("event", candidate_kind::temporal_event, params.temporal_cost, {subject, "@t" + std::to_string(i), value});
      c.coverage[*time] = 1.0;
      if (fact) c.coverage[*fact] = params.temporal_event_fact_strength;
      cands.push_back(std::move(c));
    }
    if (invalidates && gen.bernoulli(params.p_tombstone)) {
      candidate c = make("tomb", candidate_kind::tombstone, params.tombstone_cost,
                         {"tombstone:", subject, "t" + std::to_string(e.supersedes), "obsolete"});
      c.coverage[*inval] = 1.0;
      if (abstain) c.coverage[*abstain] = 1.0;
      cands.push_back(std::move(c));
    }
    if (invalidates && fact && gen.bernoulli(params.p_compound_update)) {
      candidate c = make("update", candidate_kind::compound_update, params.compound_cost,
                         {subject, "now", value, "supersedes", "t" + std::to_string(e.supersedes)});
      c.coverage[*inval] = 1.0;
      c.coverage[*fact] = draw(gen, params.compound_fact_strength);
      cands.push_back(std::move(c));
    }
    if (fact && gen.bernoulli(params.p_entity_summary)) {
      candidate c = make("summary", candidate_kind::entity_summary, params.summary_cost,
                         {"ent" + std::to_string(e.entity), "profile:", subject, value});
      c.coverage[*fact] = draw(gen, params.summary_strength);
      if (time) c.coverage[*time] = draw(gen, params.summary_strength);
      const int prior = last_about_entity[static_cast<std::size_t>(e.entity)];
      if (prior >= 0 && fact_unit[static_cast<std::size_t>(prior)])
        c.coverage[*fact_unit[static_cast<std::size_t>(prior)]] = draw(gen, params.summary_strength);
      cands.push_back(std::move(c));
    }
    last_about_entity[static_cast<std::size_t>(e.entity)] = i;

    // Keep the raw span plus the highest-priority optional representations.
    if (cands.size() > static_cast<std::size_t>(params.max_candidates_per_group))
      cands.resize(static_cast<std::size_t>(params.max_candidates_per_group));
    if (cands.size() < 2) {
      if (inval) {
        candidate c = make("tomb", candidate_kind::tombstone, params.tombstone_cost, {"tombstone:", subject, "obsolete"});
        c.coverage[*inval] = 1.0;
        if (abstain) c.coverage[*abstain] = 1.0;
        cands.push_back(std::move(c));
      } else if (fact) {
        candidate c = make("fact", candidate_kind::atomic_fact, params.fact_cost, {subject + "=" + value, "now"});
        c.coverage[*fact] = 1.0;
        cands.push_back(std::move(c));
      } else {
        candidate c = make("event", candidate_kind::temporal_event, params.temporal_cost, {subject, "@t" + std::to_string(i)});
        if (time) c.coverage[*time] = 1.0;
        if (prov) c.coverage[*prov] = 0.5;
        cands.push_back(std::move(c));
      }
    }
    for (auto& c : cands) pkg.candidates.push_back(std::move(c));
  }

  rebuild_groups(pkg);
  canonicalize(pkg);
  return pkg;
}

inline package generate_small(const generator_params& params) {
  generator_params p = params;
  p.dist = distribution::base;
  return generate_package(p);
}

inline package generate_stress(const generator_params& params) { return generate_package(params); }

// One experience, two candidates: a (cost delta, value 2 delta) and b (cost 1,
// value 1), with delta = min(eta/2, 1/4). Max density takes a; OPT at B = 2 is b.
inline package adversarial_density_instance(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw parameter_error("eta must lie in (0, 1]");
  const double delta = quantize(std::min(eta / 2.0, 0.25));
  package pkg;
  pkg.package_id = "adversarial-density-" + format_decimal(eta);
  pkg.metadata = {"adversarial_density", 0, "adversarial"};
  pkg.evidence_units.push_back({"r", "single evidence unit", unit_class::fact, 1.0});
  candidate a;
  a.id = "a";
  a.kind = candidate_kind::atomic_fact;
  a.text = "a";
  a.explicit_cost = delta;
  a.coverage["r"] = quantize(2.0 * delta);
  candidate b;
  b.id = "b";
  b.kind = candidate_kind::raw_span;
  b.text = "b";
  b.explicit_cost = 1.0;
  b.coverage["r"] = 1.0;
  pkg.candidates = {a, b};
  rebuild_groups(pkg);
  canonicalize(pkg);
  return pkg;
}

inline constexpr double adversarial_budget = 2.0;

// Fractional budget -> absolute budget, against the total-scale
// parameterization where {0.01, 0.02, 0.05, 0.10, 0.20} -> {1, 2, 4, 8, 16}.
inline double absolute_budget(double fraction, double total_scale = 80.0) {
  return static_cast<double>(std::max<long>(1, std::lround(fraction * total_scale)));
}

struct audit_instance {
  package pkg;
  double budget = 0.0;
};

inline constexpr std::array<double, 6> audit_budgets{1, 2, 4, 6, 8, 16};

// Small instances (<= 10 groups, <= 4 candidates per group) drawn across the
// three distributions, each with a budget from audit_budgets. Every instance
// is within the enumeration cap.
inline std::vector<audit_instance> generate_audit_suite(int n, std::uint64_t seed) {
  if (n < 1) throw parameter_error("audit suite size must be at least 1");
  std::vector<audit_instance> out;
  out.reserve(static_cast<std::size_t>(n));
  rng gen(seed);
  for (int i = 0; i < n; ++i) {
    generator_params p;
    p.seed = rng::derive(seed, static_cast<std::uint64_t>(i));
    p.dist = static_cast<distribution>(gen.index(3));
    p.min_experiences = 3;
    p.max_experiences = 7;
    p.max_candidates_per_group = 4;
    p.chain_supersessions = {2, 3};
    p.chain_count = 1;
    audit_instance a{generate_package(p), audit_budgets[gen.index(audit_budgets.size())]};
    a.pkg.package_id = "audit-" + std::to_string(seed) + "-" + std::to_string(i);
    out.push_back(std::move(a));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic exported stores

namespace detail {

// Experience index encoded in generated unit ids ("e07.fact" -> 7).
inline long long experience_of(const std::string& unit_id) {
  long long v = 0;
  std::size_t i = 1;
  if (unit_id.empty() || unit_id[0] != 'e') return 0;
  while (i < unit_id.size() && unit_id[i] >= '0' && unit_id[i] <= '9') v = v * 10 + (unit_id[i++] - '0');
  return v;
}

inline exported_memory make_memory(std::string id, std::string text, long long timestamp,
                                   std::optional<double> salience) {
  exported_memory m;
  m.memory_id = std::move(id);
  m.text = std::move(text);
  m.timestamp = timestamp;
  m.salience = salience;
  m.word_cost = text_cost(m.text, cost_rule::word());
  m.byte_overhead_cost = text_cost(m.text, cost_rule::byte_overhead());
  return m;
}

}  // namespace detail

inline constexpr double demo_budget = 30.0;
inline constexpr std::uint64_t demo_seed = 7;

// Four synthetic systems with deliberately different write behaviour:
//   alpha - compact one-unit memories at full coverage, salience tracks weight
//   beta  - wordier half-coverage memories, salience unrelated to weight
//   gamma - a few rich notes far above any tested budget under both cost rules,
//           no salience scores
//   delta - merged digests that each fully cover several current facts, i.e.
//           coverage no single package candidate offers
inline std::vector<exported_store> synthetic_exports(const package& pkg, std::uint64_t seed) {
  rng gen(rng::derive(seed, 0x5e7));
  std::vector<const evidence_unit*> facts, validity, all;
  for (const auto& u : pkg.evidence_units) {
    all.push_back(&u);
    if (u.klass == unit_class::fact || u.klass == unit_class::preference) facts.push_back(&u);
    if (is_validity_class(u.klass)) validity.push_back(&u);
  }

  exported_store alpha{"alpha", {}}, beta{"beta", {}}, gamma{"gamma", {}}, delta{"delta", {}};
  int n = 0;
  for (const auto* u : all) {
    if (u->klass == unit_class::provenance || !gen.bernoulli(0.7)) continue;
    auto m = detail::make_memory("a" + detail::pad2(n++), templated_text_for(u->id, 3),
                                 detail::experience_of(u->id), quantize(u->weight + gen.uniform(0.0, 0.05)));
    m.coverage[u->id] = 1.0;
    alpha.memories.push_back(std::move(m));
  }
  n = 0;
  for (const auto* u : all) {
    if (!gen.bernoulli(0.6)) continue;
    auto m = detail::make_memory("b" + detail::pad2(n++), templated_text_for(u->id, 6),
                                 detail::experience_of(u->id), quantize(gen.uniform()));
    m.coverage[u->id] = 0.5;
    beta.memories.push_back(std::move(m));
  }
  for (int note = 0; note < 3 && !all.empty(); ++note) {
    auto m = detail::make_memory("g" + detail::pad2(note), templated_text_for("note" + std::to_string(note), 500),
                                 static_cast<long long>(note), std::nullopt);
    for (std::size_t j = static_cast<std::size_t>(note); j < all.size(); j += 3) m.coverage[all[j]->id] = 1.0;
    gamma.memories.push_back(std::move(m));
  }
  for (std::size_t j = 0; j + 2 < facts.size(); j += 3) {
    auto m = detail::make_memory("d" + detail::pad2(static_cast<int>(j / 3)), templated_text_for(facts[j]->id, 4),
                                 detail::experience_of(facts[j + 2]->id), quantize(gen.uniform(0.5, 1.0)));
    for (std::size_t t = j; t < j + 3; ++t) m.coverage[facts[t]->id] = 1.0;
    delta.memories.push_back(std::move(m));
  }
  return {alpha, beta, gamma, delta};
}

// Package plus the three systems ranked in the cost-rule sensitivity demo.
struct demo_suite {
  package pkg;
  std::vector<exported_store> exports;
};

inline demo_suite make_demo_suite(std::uint64_t seed = demo_seed) {
  generator_params params;
  params.seed = seed;
  demo_suite d{generate_small(params), {}};
  auto all = synthetic_exports(d.pkg, seed);
  d.exports.assign(all.begin(), all.begin() + 3);
  return d;
}

}  // namespace budgetmem
