#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ldc/divergence.hpp"
#include "ldc/error.hpp"
#include "ldc/experiments.hpp"
#include "ldc/projection.hpp"
#include "ldc/report_io.hpp"
#include "ldc/scenario_io.hpp"

namespace ldc::cli {

inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int {
  kPass = 0,
  kInputError = 2,
  kDegenerate = 3,
  kAcceptanceFailure = 4,
};

namespace detail {

inline std::string join(const IndexSet& idx) {
  std::string s = "{";
  for (std::size_t i = 0; i < idx.size(); ++i) s += (i ? "," : "") + std::to_string(idx[i]);
  return s + "}";
}

inline nlohmann::json index_json(const IndexSet& idx) {
  auto a = nlohmann::json::array();
  for (std::size_t i : idx) a.push_back(i);
  return a;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput(path.string() + ": cannot open for writing");
  out << content;
  out.close();
  if (!out) throw InvalidInput(path.string() + ": write failed");
}

inline void print_projection(std::ostream& out, const ProjectionReport& rep, const ModelSet& m) {
  out << "min_value: " << to_csv_number(rep.min_value) << '\n';
  out << "k: " << rep.k() << '\n';
  out << "projections: " << join(rep.projection_indices) << '\n';
  out << "tie_mode: " << (rep.tie_mode == TieMode::Structural ? "structural" : "numeric") << '\n';
  out << "model,density,prior,l_value,gap,is_projection\n";
  for (std::size_t i = 0; i < m.size(); ++i)
    out << i << ',' << '"' << m[i].describe() << "\"," << to_csv_number(m.prior()[i]) << ',' << to_csv_number(rep.l_values[i])
        << ',' << to_csv_number(rep.gaps[i]) << ',' << (rep.is_projection(i) ? 1 : 0) << '\n';
}

inline nlohmann::json metadata_json(const ScenarioFile& file, const ScenarioPlan& plan, const SummaryReport& summary,
                                    std::optional<std::uint64_t> seed_override, std::optional<double> tol_override) {
  const Scenario& sc = file.scenario;
  nlohmann::json md;
  md["tool"] = "ldc";
  md["tool_version"] = kToolVersion;
  md["schema_version"] = kScenarioSchemaVersion;
  md["scenario_hash"] = file.hash;
  md["scenario_name"] = sc.name;
  md["claim"] = claim_name(sc.claim);
  md["seed"] = sc.seed;
  md["seed_overridden"] = seed_override.has_value();
  md["rel_tol"] = sc.rel_tol;
  md["rel_tol_overridden"] = tol_override.has_value();
  md["replicates"] = sc.replicates;
  md["n_schedule"] = sc.n_schedule;
  md["epsilon"] = sc.epsilon;
  md["true_source"] = sc.true_source.describe();
  md["truncation_size"] = file.truncation_size;
  md["indexed_family"] = file.indexed_family;
  md["prior_renormalized"] = file.prior_renormalized;
  md["tie_mode"] = plan.report.tie_mode == TieMode::Structural ? "structural" : "numeric";
  md["tie_tolerance"] = plan.report.tie_tolerance;
  md["partition_rule"] = "nearest projection by I(projection||model), ties to lower index";
  md["projection"] = {{"min_value", to_csv_number(plan.report.min_value)},
                      {"indices", index_json(plan.report.projection_indices)},
                      {"k", plan.report.k()}};
  md["bad_set"] = index_json(plan.bad_set);
  auto blocks = nlohmann::json::array();
  for (const auto& b : plan.blocks) blocks.push_back(index_json(b));
  md["blocks"] = blocks;
  auto stats = nlohmann::json::array();
  for (const auto& st : plan.statistics)
    stats.push_back({{"label", st.label}, {"members", index_json(st.members)}, {"target", to_csv_number(st.target)}});
  md["statistics"] = stats;
  auto diags = nlohmann::json::array();
  for (const auto& d : summary.diagnostics)
    diags.push_back({{"statistic", d.statistic},
                     {"equal_share", d.equal_share},
                     {"prior_share", d.prior_share},
                     {"mean", to_csv_number(d.mean)},
                     {"variance", to_csv_number(d.variance)},
                     {"fraction_near_share", d.fraction_near_share},
                     {"fraction_near_extremes", d.fraction_near_extremes},
                     {"verdict", d.verdict}});
  md["equi_concentration_diagnostics"] = diags;
  auto rules = nlohmann::json::array();
  for (const auto& o : summary.outcomes)
    rules.push_back({{"rule", o.description}, {"observed", to_csv_number(o.observed)}, {"passed", o.passed}});
  md["acceptance"] = rules;
  return md;
}

}  // namespace detail

/// Entry point shared by the `ldc` executable and the CLI tests. Returns
/// the process exit code; errors are reported on `err` as a single line
/// beginning with "error:<kind>:".
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Posterior L-divergence consistency laboratory", "ldc"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::string kind = "L", q_spec, p_spec;
  std::optional<double> tol;
  auto* div = app.add_subcommand("divergence", "Evaluate L(q||p), I(p||q) or h(p) for two density specs");
  div->add_option("--kind", kind, "L, I or entropy")->check(CLI::IsMember({"L", "I", "entropy"}));
  div->add_option("--q", q_spec, "model density q, e.g. gaussian:1,1");
  div->add_option("--p", p_spec, "reference density p, e.g. gaussian:0,1")->required();
  div->add_option("--tol", tol, "quadrature relative tolerance");

  std::string scenario_path, csv_path;
  auto* proj = app.add_subcommand("project", "Compute the L-projection(s) of a scenario's true source");
  proj->add_option("scenario", scenario_path, "scenario JSON file")->required();
  proj->add_option("--csv", csv_path, "also write the per-model table to this CSV file");
  proj->add_option("--tol", tol, "quadrature relative tolerance");

  std::string out_dir = "out";
  unsigned jobs = 1;
  std::optional<std::uint64_t> seed;
  auto* runcmd = app.add_subcommand("run", "Run a scenario and write trace, summary and metadata files");
  runcmd->add_option("scenario", scenario_path, "scenario JSON file")->required();
  runcmd->add_option("--out", out_dir, "output directory (created if missing)");
  runcmd->add_option("--jobs", jobs, "worker threads for replicates")->check(CLI::PositiveNumber);
  runcmd->add_option("--seed", seed, "override the scenario seed");
  runcmd->add_option("--tol", tol, "quadrature relative tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error:input: " << e.what() << '\n';
    return kInputError;
  }

  try {
    if (tol && !(*tol > 0.0 && *tol <= 1e-2)) throw InvalidInput("--tol must lie in (0, 1e-2]");

    if (div->parsed()) {
      const double rel = tol.value_or(kAcceptanceRelTol);
      const Density p = parse_density_spec(p_spec);
      DivergenceValue v;
      if (kind == "entropy") {
        v = differential_entropy(p, rel);
      } else {
        if (q_spec.empty()) throw InvalidInput("--q is required for --kind " + kind);
        const Density q = parse_density_spec(q_spec);
        v = kind == "L" ? l_divergence(q, p, rel) : i_divergence(p, q, rel);
      }
      out << "kind: " << kind_name(v.kind) << '\n';
      out << "value: " << to_csv_number(v.value) << '\n';
      out << "numerical_error: " << to_csv_number(v.numerical_error) << '\n';
      return kPass;
    }

    ScenarioFile file = load_scenario(scenario_path);
    if (tol) file.scenario.rel_tol = *tol;
    if (seed) file.scenario.seed = *seed;
    const Scenario& sc = file.scenario;

    if (proj->parsed()) {
      const auto rep = l_projection(sc.true_source, *sc.model_set, sc.ties, sc.rel_tol);
      detail::print_projection(out, rep, *sc.model_set);
      if (!csv_path.empty()) {
        std::ostringstream os;
        write_projection_csv(os, rep);
        detail::write_file(csv_path, os.str());
      }
      return kPass;
    }

    // run
    const ScenarioPlan plan = prepare(sc);
    const auto records = run_plan(sc, plan, jobs);
    const auto summary = summarize(records, sc, plan);

    std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw InvalidInput(out_dir + ": cannot create output directory (" + ec.message() + ")");

    std::ostringstream trace, summ, hist;
    write_trace_csv(trace, records);
    write_summary_csv(summ, summary);
    detail::write_file(dir / file.trace_path, trace.str());
    detail::write_file(dir / file.summary_path, summ.str());
    if (!summary.histograms.empty()) {
      write_histogram_csv(hist, summary);
      detail::write_file(dir / file.histogram_path, hist.str());
    }
    detail::write_file(dir / file.metadata_path, detail::metadata_json(file, plan, summary, seed, tol).dump(2) + "\n");

    out << "scenario: " << (sc.name.empty() ? scenario_path : sc.name) << " (" << claim_name(sc.claim) << ")\n";
    for (const auto& d : summary.diagnostics)
      out << "diagnostic " << d.statistic << ": mean " << to_csv_number(d.mean) << ", verdict " << d.verdict << '\n';
    for (const auto& o : summary.outcomes) out << (o.passed ? "PASS " : "FAIL ") << o.description << '\n';
    return summary.all_passed() ? kPass : kAcceptanceFailure;
  } catch (const InvalidInput& e) {
    err << "error:input: " << e.what() << '\n';
    return kInputError;
  } catch (const DegenerateScenario& e) {
    err << "error:degenerate: " << e.what() << '\n';
    return kDegenerate;
  } catch (const NonConvergence& e) {
    err << "error:numeric: " << e.what() << '\n';
    return kDegenerate;
  }
}

}  // namespace ldc::cli
