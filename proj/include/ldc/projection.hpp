#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "ldc/density.hpp"
#include "ldc/divergence.hpp"
#include "ldc/error.hpp"

namespace ldc {

/// Sorted, duplicate-free model indices.
using IndexSet = std::vector<std::size_t>;

/// Finite truncation of the countable model set, each member carrying a
/// strictly positive prior mass; masses sum to one.
class ModelSet {
 public:
  ModelSet(std::vector<Density> models, std::vector<double> prior)
      : models_(std::move(models)), prior_(std::move(prior)) {
    if (models_.empty()) throw InvalidInput("model set must not be empty");
    if (prior_.size() != models_.size()) throw InvalidInput("prior and model list differ in length");
    double total = 0.0;
    for (std::size_t i = 0; i < prior_.size(); ++i) {
      if (!(std::isfinite(prior_[i]) && prior_[i] > 0.0))
        throw InvalidInput("prior mass of model " + std::to_string(i) + " is not strictly positive");
      total += prior_[i];
    }
    if (std::abs(total - 1.0) > 1e-12) throw InvalidInput("prior masses must sum to 1");
  }

  /// Renormalizes arbitrary positive weights, e.g. a geometric prior cut at
  /// the truncation size.
  static ModelSet from_weights(std::vector<Density> models, std::vector<double> weights) {
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!(std::isfinite(weights[i]) && weights[i] > 0.0))
        throw InvalidInput("prior mass of model " + std::to_string(i) + " is not strictly positive");
      total += weights[i];
    }
    for (double& w : weights) w /= total;
    return ModelSet(std::move(models), std::move(weights));
  }

  static ModelSet uniform(std::vector<Density> models) {
    std::vector<double> w(models.size(), 1.0);
    return from_weights(std::move(models), std::move(w));
  }

  std::size_t size() const noexcept { return models_.size(); }
  const std::vector<Density>& models() const noexcept { return models_; }
  const std::vector<double>& prior() const noexcept { return prior_; }
  const Density& operator[](std::size_t i) const { return models_.at(i); }

 private:
  std::vector<Density> models_;
  std::vector<double> prior_;
};

enum class TieMode { Numeric, Structural };

struct TieOptions {
  /// Relative to max(1, |min_value|).
  double tie_tolerance = 1e-9;
  /// Indices declared tied by symmetry. When non-empty these are the
  /// projections (their gaps are set to exactly zero) provided the
  /// computed values agree to `structural_check`.
  IndexSet structural_ties = {};
  double structural_check = 1e-6;
};

struct ProjectionReport {
  double min_value = 0.0;      // L(M^e || r)
  IndexSet projection_indices;
  std::vector<double> l_values;  // L(q_i || r)
  std::vector<double> gaps;      // l_values - min_value, +inf for unsupported models
  double tie_tolerance = 0.0;    // absolute threshold actually applied
  TieMode tie_mode = TieMode::Numeric;

  std::size_t k() const noexcept { return projection_indices.size(); }
  bool is_projection(std::size_t i) const {
    return std::binary_search(projection_indices.begin(), projection_indices.end(), i);
  }
};

/// L-projection(s) of the true source r on the model set: every model whose
/// L(q||r) is within the tie threshold of the minimum.
inline ProjectionReport l_projection(const Density& r, const std::vector<Density>& models, const TieOptions& ties = {},
                                     double rel_tol = kAcceptanceRelTol) {
  if (models.empty()) throw InvalidInput("model set must not be empty");
  ProjectionReport rep;
  rep.l_values.reserve(models.size());
  for (const auto& q : models) rep.l_values.push_back(l_divergence(q, r, rel_tol).value);

  double best = kInf;
  for (double v : rep.l_values) best = std::min(best, v);
  if (!std::isfinite(best))
    throw DegenerateScenario("no projection: every model assigns zero density somewhere the true source has mass");
  rep.min_value = best;
  rep.tie_tolerance = ties.tie_tolerance * std::max(1.0, std::abs(best));

  rep.gaps.resize(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) rep.gaps[i] = rep.l_values[i] - best;

  if (!ties.structural_ties.empty()) {
    rep.tie_mode = TieMode::Structural;
    const double check = ties.structural_check * std::max(1.0, std::abs(best));
    for (std::size_t i : ties.structural_ties) {
      if (i >= models.size()) throw InvalidInput("declared tie index " + std::to_string(i) + " out of range");
      if (!(rep.gaps[i] <= check))
        throw InvalidInput("declared tie at model " + std::to_string(i) + " is not a minimizer (gap " +
                           detail::format_number(rep.gaps[i]) + ")");
    }
    for (std::size_t i : ties.structural_ties) rep.gaps[i] = 0.0;
    rep.projection_indices = ties.structural_ties;
    std::sort(rep.projection_indices.begin(), rep.projection_indices.end());
    rep.projection_indices.erase(std::unique(rep.projection_indices.begin(), rep.projection_indices.end()),
                                 rep.projection_indices.end());
    for (std::size_t i = 0; i < models.size(); ++i)
      if (rep.gaps[i] <= rep.tie_tolerance && !rep.is_projection(i))
        throw InvalidInput("model " + std::to_string(i) + " ties numerically but is not declared tied");
  } else {
    for (std::size_t i = 0; i < models.size(); ++i)
      if (rep.gaps[i] <= rep.tie_tolerance) rep.projection_indices.push_back(i);
  }
  return rep;
}

inline ProjectionReport l_projection(const Density& r, const ModelSet& m, const TieOptions& ties = {},
                                     double rel_tol = kAcceptanceRelTol) {
  return l_projection(r, m.models(), ties, rel_tol);
}

/// N_eps^C: models whose gap exceeds eps. Unsupported models (gap +inf)
/// are always included.
inline IndexSet epsilon_bad_set(const ProjectionReport& rep, double eps) {
  if (!(eps > 0.0)) throw InvalidInput("epsilon must be positive");
  IndexSet out;
  for (std::size_t i = 0; i < rep.gaps.size(); ++i)
    if (rep.gaps[i] > eps) out.push_back(i);
  return out;
}

/// N_eps, the complement of epsilon_bad_set.
inline IndexSet epsilon_good_set(const ProjectionReport& rep, double eps) {
  if (!(eps > 0.0)) throw InvalidInput("epsilon must be positive");
  IndexSet out;
  for (std::size_t i = 0; i < rep.gaps.size(); ++i)
    if (!(rep.gaps[i] > eps)) out.push_back(i);
  return out;
}

/// Splits N_eps into one block per projection. A non-projection model q
/// joins the projection p that minimises I(p||q), i.e. the L-gap of q when
/// p is treated as the reference source; ties go to the lower index.
/// Blocks come out ordered by their projection's index.
inline std::vector<IndexSet> projection_partition(const ProjectionReport& rep, const std::vector<Density>& models,
                                                  double eps, double rel_tol = kSweepRelTol) {
  if (rep.projection_indices.empty()) throw InvalidInput("projection report has no projections");
  if (models.size() != rep.gaps.size()) throw InvalidInput("model list does not match projection report");
  const IndexSet good = epsilon_good_set(rep, eps);

  std::vector<IndexSet> blocks(rep.k());
  for (std::size_t b = 0; b < rep.k(); ++b) blocks[b].push_back(rep.projection_indices[b]);

  for (std::size_t i : good) {
    if (rep.is_projection(i)) continue;
    std::size_t pick = 0;
    double best = kInf;
    for (std::size_t b = 0; b < rep.k(); ++b) {
      const double d = i_divergence(models[rep.projection_indices[b]], models[i], rel_tol).value;
      if (d < best) {
        best = d;
        pick = b;
      }
    }
    blocks[pick].push_back(i);
  }
  for (auto& blk : blocks) std::sort(blk.begin(), blk.end());
  return blocks;
}

inline std::vector<IndexSet> projection_partition(const ProjectionReport& rep, const ModelSet& m, double eps,
                                                  double rel_tol = kSweepRelTol) {
  return projection_partition(rep, m.models(), eps, rel_tol);
}

}  // namespace ldc
