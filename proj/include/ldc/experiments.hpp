#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ldc/density.hpp"
#include "ldc/divergence.hpp"
#include "ldc/error.hpp"
#include "ldc/posterior.hpp"
#include "ldc/projection.hpp"
#include "ldc/rng.hpp"

namespace ldc {

enum class Claim { LST, Corollary, EquiConcentration };

inline const char* claim_name(Claim c) noexcept {
  switch (c) {
    case Claim::LST: return "LST";
    case Claim::Corollary: return "Corollary";
    case Claim::EquiConcentration: return "EquiConcentration";
  }
  return "?";
}

/// A pass/fail rule evaluated on one statistic at one checkpoint across
/// replicates.
struct AcceptanceRule {
  enum class Kind {
    Proximity,   // |value - target| <= tolerance in >= min_fraction of replicates
    AtMost,      // value <= threshold in >= min_fraction
    AtLeast,     // value >= threshold in >= min_fraction
    MeanWithin,  // cross-replicate mean in [lo, hi]
  };
  Kind kind = Kind::Proximity;
  std::string statistic;
  std::uint64_t checkpoint = 0;
  double tolerance = 0.0;
  double threshold = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double min_fraction = 0.95;
  /// Overrides the theoretical target for Proximity rules.
  std::optional<double> target;
};

inline const char* rule_kind_name(AcceptanceRule::Kind k) noexcept {
  switch (k) {
    case AcceptanceRule::Kind::Proximity: return "proximity";
    case AcceptanceRule::Kind::AtMost: return "at_most";
    case AcceptanceRule::Kind::AtLeast: return "at_least";
    case AcceptanceRule::Kind::MeanWithin: return "mean_within";
  }
  return "?";
}

struct Scenario {
  std::string name{};
  Claim claim = Claim::LST;
  Density true_source;
  std::shared_ptr<const ModelSet> model_set{};
  double epsilon = 0.5;
  std::vector<std::uint64_t> n_schedule{};
  std::size_t replicates = 1;
  std::uint64_t seed = 0;
  /// Explicit subset N for LST runs; empty means the eps-bad set.
  std::optional<IndexSet> subset{};
  TieOptions ties{};
  double rel_tol = kSweepRelTol;
  std::vector<AcceptanceRule> acceptance{};
};

struct TraceRecord {
  std::size_t replicate = 0;
  std::uint64_t n = 0;
  std::string statistic;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

enum class StatisticKind { Rate, Mass };

/// One quantity tracked along each trajectory.
struct TrackedStatistic {
  std::string label;
  StatisticKind kind = StatisticKind::Mass;
  IndexSet members;
  double target = 0.0;
};

/// Everything a run needs that is computed once per scenario: the
/// projection report, eps-partition, and the statistics to record.
struct ScenarioPlan {
  ProjectionReport report;
  IndexSet bad_set;
  IndexSet good_set;
  std::vector<IndexSet> blocks;
  std::vector<TrackedStatistic> statistics;
};

namespace detail {

inline void validate_common(const Scenario& sc) {
  if (!sc.model_set) throw InvalidInput("scenario has no model set");
  if (!(sc.epsilon > 0.0)) throw InvalidInput("epsilon must be positive");
  if (sc.replicates < 1) throw InvalidInput("replicates must be at least 1");
  if (sc.n_schedule.empty()) throw InvalidInput("n_schedule must not be empty");
  for (std::size_t i = 1; i < sc.n_schedule.size(); ++i)
    if (sc.n_schedule[i] <= sc.n_schedule[i - 1]) throw InvalidInput("n_schedule must be strictly increasing");
  if (sc.subset)
    for (std::size_t i : *sc.subset)
      if (i >= sc.model_set->size()) throw InvalidInput("subset index " + std::to_string(i) + " out of range");
}

inline double block_target_prior_share(const ModelSet& m, const IndexSet& block) {
  double s = 0.0;
  for (std::size_t i : block) s += m.prior()[i];
  return s;
}

}  // namespace detail

/// Validates a scenario against its claim and resolves its subsets and
/// theoretical targets. Throws DegenerateScenario when the claim has
/// nothing to test.
inline ScenarioPlan prepare(const Scenario& sc) {
  detail::validate_common(sc);
  ScenarioPlan plan;
  plan.report = l_projection(sc.true_source, *sc.model_set, sc.ties, sc.rel_tol);
  plan.bad_set = epsilon_bad_set(plan.report, sc.epsilon);
  plan.good_set = epsilon_good_set(plan.report, sc.epsilon);

  switch (sc.claim) {
    case Claim::LST: {
      if (sc.n_schedule.front() == 0) throw InvalidInput("LST checkpoints must be at least 1");
      IndexSet n_set = sc.subset ? *sc.subset : plan.bad_set;
      std::sort(n_set.begin(), n_set.end());
      n_set.erase(std::unique(n_set.begin(), n_set.end()), n_set.end());
      if (n_set.empty()) throw DegenerateScenario("LST subset is empty");
      double best = kInf;
      for (std::size_t i : n_set) best = std::min(best, plan.report.gaps[i]);
      if (!std::isfinite(best)) throw DegenerateScenario("LST target is infinite: no model in the subset covers the true source");
      plan.statistics.push_back({"rate", StatisticKind::Rate, n_set, -best});
      break;
    }
    case Claim::Corollary: {
      if (plan.bad_set.empty())
        throw DegenerateScenario("eps-bad set is empty at epsilon " + detail::format_number(sc.epsilon) +
                                 ": nothing to test");
      plan.statistics.push_back({"mass:bad", StatisticKind::Mass, plan.bad_set, 0.0});
      plan.statistics.push_back({"mass:good", StatisticKind::Mass, plan.good_set, 1.0});
      break;
    }
    case Claim::EquiConcentration: {
      if (plan.report.k() < 2)
        throw DegenerateScenario("equi-concentration needs at least two L-projections, found " +
                                 std::to_string(plan.report.k()));
      plan.blocks = projection_partition(plan.report, *sc.model_set, sc.epsilon, sc.rel_tol);
      const double share = 1.0 / static_cast<double>(plan.report.k());
      for (std::size_t b = 0; b < plan.blocks.size(); ++b)
        plan.statistics.push_back({"mass:block" + std::to_string(b + 1), StatisticKind::Mass, plan.blocks[b], share});
      plan.statistics.push_back({"mass:bad", StatisticKind::Mass, plan.bad_set, 0.0});
      break;
    }
  }
  return plan;
}

/// One trajectory: a single streaming pass over the replicate's draws with
/// statistics recorded at every checkpoint.
inline std::vector<TraceRecord> run_replicate(const Scenario& sc, const ScenarioPlan& plan, std::size_t replicate) {
  const CounterRng rng(sc.seed, replicate);
  auto state = PosteriorState::init(sc.model_set);
  std::vector<TraceRecord> out;
  out.reserve(sc.n_schedule.size() * plan.statistics.size());
  std::vector<double> buf(4096);
  std::uint64_t pos = 0;
  for (std::uint64_t checkpoint : sc.n_schedule) {
    while (pos < checkpoint) {
      const std::size_t len = static_cast<std::size_t>(std::min<std::uint64_t>(buf.size(), checkpoint - pos));
      std::span<double> chunk(buf.data(), len);
      sample_into(sc.true_source, rng, pos, chunk);
      state.absorb(chunk);
      pos += len;
    }
    for (const auto& st : plan.statistics) {
      const auto b = sandwich_bounds(state, st.members);
      TraceRecord rec{replicate, checkpoint, st.label, 0.0, 0.0, 0.0};
      if (st.kind == StatisticKind::Rate) {
        const double n = static_cast<double>(checkpoint);
        rec.value = rate_statistic(state, st.members);
        rec.lower = b.log_lower / n;
        rec.upper = b.log_upper / n;
      } else {
        rec.value = st.members.empty() ? 0.0 : subset_mass(state, st.members);
        rec.lower = b.lower;
        rec.upper = b.upper;
      }
      out.push_back(std::move(rec));
    }
  }
  return out;
}

/// Runs every replicate on up to `jobs` threads. Records are ordered by
/// replicate, then checkpoint, then statistic, independent of `jobs`.
inline std::vector<TraceRecord> run_plan(const Scenario& sc, const ScenarioPlan& plan, unsigned jobs = 1) {
  std::vector<std::vector<TraceRecord>> per_rep(sc.replicates);
  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(sc.replicates)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t r; (r = next.fetch_add(1)) < sc.replicates;) {
      try {
        per_rep[r] = run_replicate(sc, plan, r);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<TraceRecord> out;
  for (auto& v : per_rep) std::move(v.begin(), v.end(), std::back_inserter(out));
  return out;
}

inline std::vector<TraceRecord> run_lst(const Scenario& sc, unsigned jobs = 1) {
  if (sc.claim != Claim::LST) throw InvalidInput("scenario claim is not LST");
  return run_plan(sc, prepare(sc), jobs);
}

inline std::vector<TraceRecord> run_corollary(const Scenario& sc, unsigned jobs = 1) {
  if (sc.claim != Claim::Corollary) throw InvalidInput("scenario claim is not Corollary");
  return run_plan(sc, prepare(sc), jobs);
}

inline std::vector<TraceRecord> run_equiconcentration(const Scenario& sc, unsigned jobs = 1) {
  if (sc.claim != Claim::EquiConcentration) throw InvalidInput("scenario claim is not EquiConcentration");
  return run_plan(sc, prepare(sc), jobs);
}

// ---------------------------------------------------------------------------
// Summaries

struct SummaryRow {
  std::uint64_t n = 0;
  std::string statistic;
  std::size_t count = 0;
  double mean = 0.0;
  double sd = 0.0;
  double min = 0.0;
  double max = 0.0;
  double target = 0.0;
};

struct RuleOutcome {
  AcceptanceRule rule;
  /// Fraction of replicates satisfying the rule, or the mean for MeanWithin.
  double observed = 0.0;
  bool passed = false;
  std::string description;
};

struct Histogram {
  std::uint64_t n = 0;
  std::string statistic;
  std::vector<std::size_t> counts;  // equal-width bins over [0, 1]
};

/// How the cross-replicate distribution of one block mass looks at the
/// final checkpoint. Reported, never asserted.
struct ConcentrationDiagnostic {
  std::string statistic;
  double equal_share = 0.0;     // 1/k
  double prior_share = 0.0;     // prior mass of the block
  double mean = 0.0;
  double variance = 0.0;
  double fraction_near_share = 0.0;
  double fraction_near_extremes = 0.0;
  std::string verdict;  // "concentrates_at_share", "splits_to_extremes", "diffuse"
};

struct SummaryReport {
  std::vector<SummaryRow> rows;
  std::vector<RuleOutcome> outcomes;
  std::vector<Histogram> histograms;
  std::vector<ConcentrationDiagnostic> diagnostics;

  bool all_passed() const noexcept {
    return std::all_of(outcomes.begin(), outcomes.end(), [](const RuleOutcome& o) { return o.passed; });
  }
};

inline constexpr std::size_t kHistogramBins = 20;
inline constexpr double kNearTolerance = 0.05;

namespace detail {

inline std::vector<double> values_at(const std::vector<TraceRecord>& recs, std::uint64_t n, const std::string& stat) {
  std::vector<double> out;
  for (const auto& r : recs)
    if (r.n == n && r.statistic == stat) out.push_back(r.value);
  return out;
}

inline std::pair<double, double> mean_sd(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2 || !std::isfinite(mean)) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

}  // namespace detail

/// Deterministic aggregation of trace records: per checkpoint and statistic
/// moments, acceptance rule outcomes and, for equi-concentration runs, mass
/// histograms and the concentration diagnostic.
inline SummaryReport summarize(const std::vector<TraceRecord>& records, const Scenario& sc, const ScenarioPlan& plan) {
  if (records.empty()) throw InvalidInput("cannot summarize an empty record set");
  SummaryReport rep;
  for (std::uint64_t n : sc.n_schedule) {
    for (const auto& st : plan.statistics) {
      auto vals = detail::values_at(records, n, st.label);
      if (vals.empty()) continue;
      auto [mean, sd] = detail::mean_sd(vals);
      SummaryRow row{n, st.label, vals.size(), mean, sd, *std::min_element(vals.begin(), vals.end()),
                     *std::max_element(vals.begin(), vals.end()), st.target};
      rep.rows.push_back(std::move(row));

      if (sc.claim == Claim::EquiConcentration && st.kind == StatisticKind::Mass) {
        Histogram h{n, st.label, std::vector<std::size_t>(kHistogramBins, 0)};
        for (double v : vals) {
          auto bin = static_cast<std::size_t>(std::clamp(v, 0.0, 1.0) * kHistogramBins);
          ++h.counts[std::min(bin, kHistogramBins - 1)];
        }
        rep.histograms.push_back(std::move(h));
      }
    }
  }

  if (sc.claim == Claim::EquiConcentration) {
    const std::uint64_t last = sc.n_schedule.back();
    for (std::size_t b = 0; b < plan.blocks.size(); ++b) {
      const auto& st = plan.statistics[b];
      auto vals = detail::values_at(records, last, st.label);
      if (vals.empty()) continue;
      ConcentrationDiagnostic d;
      d.statistic = st.label;
      d.equal_share = st.target;
      d.prior_share = detail::block_target_prior_share(*sc.model_set, plan.blocks[b]);
      auto [mean, sd] = detail::mean_sd(vals);
      d.mean = mean;
      d.variance = sd * sd;
      std::size_t near = 0, extreme = 0;
      for (double v : vals) {
        if (std::abs(v - d.equal_share) <= kNearTolerance) ++near;
        if (v <= kNearTolerance || v >= 1.0 - kNearTolerance) ++extreme;
      }
      d.fraction_near_share = static_cast<double>(near) / static_cast<double>(vals.size());
      d.fraction_near_extremes = static_cast<double>(extreme) / static_cast<double>(vals.size());
      d.verdict = d.fraction_near_share >= 0.5     ? "concentrates_at_share"
                  : d.fraction_near_extremes >= 0.5 ? "splits_to_extremes"
                                                    : "diffuse";
      rep.diagnostics.push_back(std::move(d));
    }
  }

  for (const auto& rule : sc.acceptance) {
    RuleOutcome o;
    o.rule = rule;
    auto vals = detail::values_at(records, rule.checkpoint, rule.statistic);
    const std::string where = rule.statistic + " at n=" + std::to_string(rule.checkpoint);
    if (vals.empty()) {
      o.description = std::string(rule_kind_name(rule.kind)) + " " + where + ": no records";
      rep.outcomes.push_back(std::move(o));
      continue;
    }
    std::size_t hits = 0;
    double target = 0.0;
    for (const auto& st : plan.statistics)
      if (st.label == rule.statistic) target = st.target;
    if (rule.target) target = *rule.target;
    switch (rule.kind) {
      case AcceptanceRule::Kind::Proximity:
        for (double v : vals) hits += std::abs(v - target) <= rule.tolerance;
        break;
      case AcceptanceRule::Kind::AtMost:
        for (double v : vals) hits += v <= rule.threshold;
        break;
      case AcceptanceRule::Kind::AtLeast:
        for (double v : vals) hits += v >= rule.threshold;
        break;
      case AcceptanceRule::Kind::MeanWithin:
        break;
    }
    if (rule.kind == AcceptanceRule::Kind::MeanWithin) {
      o.observed = detail::mean_sd(vals).first;
      o.passed = o.observed >= rule.lo && o.observed <= rule.hi;
      o.description = "mean_within " + where + ": mean " + detail::format_number(o.observed) + " in [" +
                      detail::format_number(rule.lo) + ", " + detail::format_number(rule.hi) + "]";
    } else {
      o.observed = static_cast<double>(hits) / static_cast<double>(vals.size());
      o.passed = o.observed >= rule.min_fraction;
      std::string cond;
      if (rule.kind == AcceptanceRule::Kind::Proximity)
        cond = "|value - " + detail::format_number(target) + "| <= " + detail::format_number(rule.tolerance);
      else if (rule.kind == AcceptanceRule::Kind::AtMost)
        cond = "value <= " + detail::format_number(rule.threshold);
      else
        cond = "value >= " + detail::format_number(rule.threshold);
      o.description = std::string(rule_kind_name(rule.kind)) + " " + where + ": " + cond + " in " +
                      std::to_string(hits) + "/" + std::to_string(vals.size()) + " replicates (need " +
                      detail::format_number(rule.min_fraction) + ")";
    }
    rep.outcomes.push_back(std::move(o));
  }
  return rep;
}

inline SummaryReport summarize(const std::vector<TraceRecord>& records, const Scenario& sc) {
  if (records.empty()) throw InvalidInput("cannot summarize an empty record set");
  return summarize(records, sc, prepare(sc));
}

}  // namespace ldc
