#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ldc/density.hpp"
#include "ldc/error.hpp"
#include "ldc/experiments.hpp"

namespace ldc {

inline constexpr int kScenarioSchemaVersion = 1;

/// A parsed scenario file: the scenario itself plus output paths and the
/// bookkeeping that goes into run metadata.
struct ScenarioFile {
  Scenario scenario;
  std::string trace_path = "trace.csv";
  std::string summary_path = "summary.csv";
  std::string histogram_path = "histogram.csv";
  std::string metadata_path = "metadata.json";
  std::string hash{};             // FNV-1a 64 of the canonical JSON text
  std::size_t truncation_size = 0;
  bool indexed_family = false;
  bool prior_renormalized = false;
};

namespace detail {

using nlohmann::json;

[[noreturn]] inline void field_error(const std::string& path, const std::string& msg) {
  throw InvalidInput(path + ": " + msg);
}

inline void reject_unknown_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) field_error(path, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) field_error(path + "." + key, "unknown key");
  }
}

inline const json& require_key(const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) field_error(path + "." + key, "missing required key");
  return *it;
}

inline double as_real(const json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return kNegInf;
  }
  field_error(path, "expected a number");
}

inline std::uint64_t as_count(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  field_error(path, "expected a nonnegative integer");
}

inline std::vector<double> as_real_list(const json& v, const std::string& path) {
  if (!v.is_array()) field_error(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_real(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline IndexSet as_index_set(const json& v, const std::string& path) {
  if (!v.is_array()) field_error(path, "expected an array of indices");
  IndexSet out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_count(v[i], path + "[" + std::to_string(i) + "]"));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline Density make_base_density(const std::string& family, const std::vector<double>& p, const std::string& path) {
  auto need = [&](std::size_t k) {
    if (p.size() != k)
      field_error(path, family + " takes " + std::to_string(k) + " parameter(s), got " + std::to_string(p.size()));
  };
  try {
    if (family == "gaussian" || family == "normal") {
      need(2);
      return Density::gaussian(p[0], p[1]);
    }
    if (family == "exponential" || family == "exp") {
      need(1);
      return Density::exponential(p[0]);
    }
    if (family == "laplace") {
      need(2);
      return Density::laplace(p[0], p[1]);
    }
    if (family == "uniform") {
      need(2);
      return Density::uniform(p[0], p[1]);
    }
  } catch (const InvalidInput& e) {
    field_error(path, e.what());
  }
  field_error(path, "unknown density family '" + family + "'");
}

inline Density parse_density_json(const json& v, const std::string& path) {
  if (!v.is_object()) field_error(path, "expected a density object");
  const auto& fam = require_key(v, path, "family");
  if (!fam.is_string()) field_error(path + ".family", "expected a string");
  const std::string family = fam.get<std::string>();

  Density d = [&] {
    if (family == "mixture") {
      reject_unknown_keys(v, path, {"family", "weights", "components", "support"});
      auto weights = as_real_list(require_key(v, path, "weights"), path + ".weights");
      const auto& comps = require_key(v, path, "components");
      if (!comps.is_array()) field_error(path + ".components", "expected an array of densities");
      std::vector<Density> parts;
      for (std::size_t i = 0; i < comps.size(); ++i) {
        const std::string cp = path + ".components[" + std::to_string(i) + "]";
        parts.push_back(parse_density_json(comps[i], cp));
        if (parts.back().family() == Family::Mixture) field_error(cp, "nested mixtures are not supported");
      }
      try {
        return Density::mixture(std::move(weights), std::move(parts));
      } catch (const InvalidInput& e) {
        field_error(path, e.what());
      }
    }
    reject_unknown_keys(v, path, {"family", "params", "support"});
    return make_base_density(family, as_real_list(require_key(v, path, "params"), path + ".params"), path);
  }();

  if (auto it = v.find("support"); it != v.end()) {
    auto s = as_real_list(*it, path + ".support");
    if (s.size() != 2) field_error(path + ".support", "expected [lo, hi]");
    if (!(Interval{s[0], s[1]} == d.support()))
      field_error(path + ".support", "declared support does not match the family's support [" +
                                         format_number(d.support().lo) + ", " + format_number(d.support().hi) + "]");
  }
  return d;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

inline std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) line += text[i] == '\n';
  return line;
}

inline AcceptanceRule parse_rule(const json& v, const std::string& path) {
  reject_unknown_keys(v, path,
                      {"statistic", "checkpoint", "rule", "tolerance", "threshold", "lo", "hi", "min_fraction", "target"});
  AcceptanceRule r;
  const auto& stat = require_key(v, path, "statistic");
  if (!stat.is_string()) field_error(path + ".statistic", "expected a string");
  r.statistic = stat.get<std::string>();
  r.checkpoint = as_count(require_key(v, path, "checkpoint"), path + ".checkpoint");
  const auto& kind = require_key(v, path, "rule");
  const std::string k = kind.is_string() ? kind.get<std::string>() : "";
  auto num = [&](const char* key) { return as_real(require_key(v, path, key), path + "." + key); };
  if (k == "proximity") {
    r.kind = AcceptanceRule::Kind::Proximity;
    r.tolerance = num("tolerance");
    if (v.contains("target")) r.target = num("target");
  } else if (k == "at_most") {
    r.kind = AcceptanceRule::Kind::AtMost;
    r.threshold = num("threshold");
  } else if (k == "at_least") {
    r.kind = AcceptanceRule::Kind::AtLeast;
    r.threshold = num("threshold");
  } else if (k == "mean_within") {
    r.kind = AcceptanceRule::Kind::MeanWithin;
    r.lo = num("lo");
    r.hi = num("hi");
  } else {
    field_error(path + ".rule", "expected one of proximity, at_most, at_least, mean_within");
  }
  if (v.contains("min_fraction")) {
    r.min_fraction = num("min_fraction");
    if (!(r.min_fraction >= 0.0 && r.min_fraction <= 1.0)) field_error(path + ".min_fraction", "must lie in [0, 1]");
  }
  return r;
}

}  // namespace detail

/// Parses a scenario document. Every error is an InvalidInput whose message
/// starts with the JSON path (or line number, for syntax errors) at fault.
inline ScenarioFile parse_scenario(const std::string& text) {
  using detail::field_error;
  using detail::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput("line " + std::to_string(detail::line_of_offset(text, e.byte)) + ": " + e.what());
  }
  const std::string root = "$";
  detail::reject_unknown_keys(doc, root,
                              {"schema_version", "name", "claim", "true_source", "models", "indexed_family", "prior",
                               "epsilon", "n_schedule", "replicates", "seed", "subset", "ties", "rel_tol",
                               "acceptance", "output"});

  const auto version = detail::as_count(detail::require_key(doc, root, "schema_version"), "$.schema_version");
  if (version != kScenarioSchemaVersion)
    field_error("$.schema_version", "unsupported version " + std::to_string(version) + " (expected " +
                                        std::to_string(kScenarioSchemaVersion) + ")");

  ScenarioFile file{Scenario{.true_source = detail::parse_density_json(detail::require_key(doc, root, "true_source"),
                                                                       "$.true_source")}};
  file.hash = detail::hex64(detail::fnv1a64(doc.dump()));
  Scenario& sc = file.scenario;

  if (auto it = doc.find("name"); it != doc.end()) {
    if (!it->is_string()) field_error("$.name", "expected a string");
    sc.name = it->get<std::string>();
  }

  const auto& claim = detail::require_key(doc, root, "claim");
  const std::string c = claim.is_string() ? claim.get<std::string>() : "";
  if (c == "LST") sc.claim = Claim::LST;
  else if (c == "Corollary") sc.claim = Claim::Corollary;
  else if (c == "EquiConcentration") sc.claim = Claim::EquiConcentration;
  else field_error("$.claim", "expected one of LST, Corollary, EquiConcentration");

  // models: explicit list or an indexed family cut at a declared truncation
  std::vector<Density> models;
  const bool has_list = doc.contains("models"), has_family = doc.contains("indexed_family");
  if (has_list == has_family) field_error("$", "exactly one of 'models' or 'indexed_family' is required");
  if (has_list) {
    const auto& arr = doc["models"];
    if (!arr.is_array() || arr.empty()) field_error("$.models", "expected a non-empty array of densities");
    for (std::size_t i = 0; i < arr.size(); ++i)
      models.push_back(detail::parse_density_json(arr[i], "$.models[" + std::to_string(i) + "]"));
  } else {
    const auto& fam = doc["indexed_family"];
    const std::string p = "$.indexed_family";
    detail::reject_unknown_keys(fam, p, {"family", "params", "vary", "start", "step", "truncation"});
    const auto& f = detail::require_key(fam, p, "family");
    if (!f.is_string() || f.get<std::string>() == "mixture") field_error(p + ".family", "expected a base family name");
    auto params = detail::as_real_list(detail::require_key(fam, p, "params"), p + ".params");
    const auto vary = detail::as_count(detail::require_key(fam, p, "vary"), p + ".vary");
    if (vary >= params.size()) field_error(p + ".vary", "parameter index out of range");
    const double start = detail::as_real(detail::require_key(fam, p, "start"), p + ".start");
    const double step = detail::as_real(detail::require_key(fam, p, "step"), p + ".step");
    const auto trunc = detail::as_count(detail::require_key(fam, p, "truncation"), p + ".truncation");
    if (trunc < 1) field_error(p + ".truncation", "must be at least 1");
    for (std::uint64_t i = 0; i < trunc; ++i) {
      params[vary] = start + static_cast<double>(i) * step;
      models.push_back(detail::make_base_density(f.get<std::string>(), params, p));
    }
    file.indexed_family = true;
  }
  file.truncation_size = models.size();

  std::vector<double> weights(models.size(), 1.0);
  bool explicit_prior = false;
  if (auto it = doc.find("prior"); it != doc.end()) {
    if (it->is_array()) {
      weights = detail::as_real_list(*it, "$.prior");
      if (weights.size() != models.size()) field_error("$.prior", "length differs from the model count");
      explicit_prior = true;
    } else {
      detail::reject_unknown_keys(*it, "$.prior", {"kind", "ratio"});
      const auto& kind = detail::require_key(*it, "$.prior", "kind");
      const std::string k = kind.is_string() ? kind.get<std::string>() : "";
      if (k == "geometric") {
        const double ratio = detail::as_real(detail::require_key(*it, "$.prior", "ratio"), "$.prior.ratio");
        if (!(ratio > 0.0 && ratio < 1.0)) field_error("$.prior.ratio", "must lie in (0, 1)");
        for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = std::pow(ratio, static_cast<double>(i));
      } else if (k != "uniform") {
        field_error("$.prior.kind", "expected 'uniform' or 'geometric'");
      }
    }
  }
  for (std::size_t i = 0; i < weights.size(); ++i)
    if (!(weights[i] > 0.0))
      field_error("$.prior[" + std::to_string(i) + "]", "prior mass must be strictly positive");
  double total = 0.0;
  for (double w : weights) total += w;
  file.prior_renormalized = !explicit_prior || std::abs(total - 1.0) > 1e-12;
  sc.model_set = std::make_shared<const ModelSet>(ModelSet::from_weights(std::move(models), std::move(weights)));

  sc.epsilon = detail::as_real(detail::require_key(doc, root, "epsilon"), "$.epsilon");
  if (!(sc.epsilon > 0.0)) field_error("$.epsilon", "must be positive");

  const auto& sched = detail::require_key(doc, root, "n_schedule");
  if (!sched.is_array() || sched.empty()) field_error("$.n_schedule", "expected a non-empty array of counts");
  for (std::size_t i = 0; i < sched.size(); ++i) {
    sc.n_schedule.push_back(detail::as_count(sched[i], "$.n_schedule[" + std::to_string(i) + "]"));
    if (i > 0 && sc.n_schedule[i] <= sc.n_schedule[i - 1])
      field_error("$.n_schedule[" + std::to_string(i) + "]", "schedule must be strictly increasing");
  }

  sc.replicates = detail::as_count(detail::require_key(doc, root, "replicates"), "$.replicates");
  if (sc.replicates < 1) field_error("$.replicates", "must be at least 1");
  sc.seed = detail::as_count(detail::require_key(doc, root, "seed"), "$.seed");

  if (auto it = doc.find("subset"); it != doc.end()) {
    if (it->is_string()) {
      if (it->get<std::string>() != "auto") field_error("$.subset", "expected \"auto\" or an index array");
    } else {
      sc.subset = detail::as_index_set(*it, "$.subset");
      for (std::size_t i : *sc.subset)
        if (i >= sc.model_set->size()) field_error("$.subset", "index " + std::to_string(i) + " out of range");
    }
  }

  if (auto it = doc.find("ties"); it != doc.end()) {
    detail::reject_unknown_keys(*it, "$.ties", {"tolerance", "structural"});
    if (it->contains("tolerance")) {
      sc.ties.tie_tolerance = detail::as_real((*it)["tolerance"], "$.ties.tolerance");
      if (!(sc.ties.tie_tolerance >= 0.0)) field_error("$.ties.tolerance", "must be nonnegative");
    }
    if (it->contains("structural")) {
      sc.ties.structural_ties = detail::as_index_set((*it)["structural"], "$.ties.structural");
      for (std::size_t i : sc.ties.structural_ties)
        if (i >= sc.model_set->size())
          field_error("$.ties.structural", "index " + std::to_string(i) + " out of range");
    }
  }

  if (auto it = doc.find("rel_tol"); it != doc.end()) {
    sc.rel_tol = detail::as_real(*it, "$.rel_tol");
    if (!(sc.rel_tol > 0.0 && sc.rel_tol <= 1e-2)) field_error("$.rel_tol", "must lie in (0, 1e-2]");
  }

  if (auto it = doc.find("acceptance"); it != doc.end()) {
    if (!it->is_array()) field_error("$.acceptance", "expected an array of rules");
    for (std::size_t i = 0; i < it->size(); ++i)
      sc.acceptance.push_back(detail::parse_rule((*it)[i], "$.acceptance[" + std::to_string(i) + "]"));
  }

  if (auto it = doc.find("output"); it != doc.end()) {
    detail::reject_unknown_keys(*it, "$.output", {"trace", "summary", "histogram", "metadata"});
    auto path_of = [&](const char* key, std::string& dst) {
      if (!it->contains(key)) return;
      const auto& v = (*it)[key];
      if (!v.is_string() || v.get<std::string>().empty())
        field_error(std::string("$.output.") + key, "expected a non-empty path");
      dst = v.get<std::string>();
    };
    path_of("trace", file.trace_path);
    path_of("summary", file.summary_path);
    path_of("histogram", file.histogram_path);
    path_of("metadata", file.metadata_path);
  }
  return file;
}

inline ScenarioFile load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput(path + ": cannot open scenario file");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_scenario(ss.str());
  } catch (const InvalidInput& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

/// One-off density syntax `family:p1,p2`, e.g. "gaussian:0,1",
/// "exponential:2", "uniform:0,1", or a mixture of base specs
/// "mixture:0.3*gaussian:-1,1|0.7*laplace:2,0.5".
inline Density parse_density_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw InvalidInput("density spec '" + spec + "' lacks 'family:' prefix");
  const std::string family = spec.substr(0, colon);
  const std::string rest = spec.substr(colon + 1);

  auto parse_number = [&](const std::string& tok) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tok.size()) throw InvalidInput("density spec '" + spec + "': bad number '" + tok + "'");
    return v;
  };

  if (family == "mixture") {
    std::vector<double> weights;
    std::vector<Density> parts;
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, '|')) {
      const auto star = item.find('*');
      if (star == std::string::npos) throw InvalidInput("mixture component '" + item + "' needs 'weight*family:...'");
      weights.push_back(parse_number(item.substr(0, star)));
      parts.push_back(parse_density_spec(item.substr(star + 1)));
      if (parts.back().family() == Family::Mixture) throw InvalidInput("nested mixtures are not supported");
    }
    return Density::mixture(std::move(weights), std::move(parts));
  }

  std::vector<double> params;
  std::stringstream ss(rest);
  std::string tok;
  while (std::getline(ss, tok, ',')) params.push_back(parse_number(tok));
  return detail::make_base_density(family, params, "density spec '" + spec + "'");
}

}  // namespace ldc
