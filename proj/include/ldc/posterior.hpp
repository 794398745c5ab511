#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "ldc/density.hpp"
#include "ldc/error.hpp"
#include "ldc/projection.hpp"

namespace ldc {

/// Exact posterior over a finite model set, kept in log space.
///
/// Stores the running log-likelihood sum of log q_i(x_l) per model rather
/// than the data. A model whose log-likelihood reaches -inf (an observation
/// fell outside its support) stays eliminated.
class PosteriorState {
 public:
  static PosteriorState init(std::shared_ptr<const ModelSet> models) {
    if (!models) throw InvalidInput("posterior needs a model set");
    PosteriorState s;
    const std::size_t k = models->size();
    s.log_prior_.resize(k);
    for (std::size_t i = 0; i < k; ++i) s.log_prior_[i] = std::log(models->prior()[i]);
    s.log_likelihood_.assign(k, 0.0);
    s.models_ = std::move(models);
    s.renormalize();
    return s;
  }

  static PosteriorState init(const ModelSet& models) { return init(std::make_shared<const ModelSet>(models)); }

  /// Consumes observations in order; the result does not depend on how the
  /// stream is split across calls.
  void absorb(std::span<const double> xs) {
    const auto& ms = models_->models();
    for (std::size_t i = 0; i < ms.size(); ++i) {
      double ll = log_likelihood_[i];
      if (ll == kNegInf) continue;
      for (double x : xs) {
        ll += ms[i].log_pdf(x);
        if (ll == kNegInf) break;
      }
      log_likelihood_[i] = ll;
    }
    n_ += xs.size();
    renormalize();
  }

  PosteriorState update(std::span<const double> xs) const {
    PosteriorState next = *this;
    next.absorb(xs);
    return next;
  }

  std::uint64_t n() const noexcept { return n_; }
  std::size_t size() const noexcept { return log_prior_.size(); }
  const ModelSet& models() const noexcept { return *models_; }
  std::span<const double> log_prior() const noexcept { return log_prior_; }
  std::span<const double> log_likelihood() const noexcept { return log_likelihood_; }
  std::span<const double> log_posterior() const noexcept { return log_posterior_; }
  /// log of sum_i prior_i * l_n(q_i)
  double log_normalizer() const noexcept { return log_normalizer_; }
  /// True once every model has been eliminated.
  bool exhausted() const noexcept { return log_normalizer_ == kNegInf; }

  std::vector<double> masses() const {
    std::vector<double> out(log_posterior_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(log_posterior_[i]);
    return out;
  }

 private:
  PosteriorState() = default;

  void renormalize() {
    std::vector<double> joint(size());
    for (std::size_t i = 0; i < size(); ++i) joint[i] = log_prior_[i] + log_likelihood_[i];
    log_normalizer_ = detail::log_sum_exp(joint);
    log_posterior_.resize(size());
    for (std::size_t i = 0; i < size(); ++i)
      log_posterior_[i] = exhausted() ? kNegInf : joint[i] - log_normalizer_;
  }

  std::shared_ptr<const ModelSet> models_;
  std::uint64_t n_ = 0;
  std::vector<double> log_prior_;
  std::vector<double> log_likelihood_;
  std::vector<double> log_posterior_;
  double log_normalizer_ = 0.0;
};

namespace detail {

inline void check_indices(const PosteriorState& s, const IndexSet& idx) {
  for (std::size_t i : idx)
    if (i >= s.size()) throw InvalidInput("model index " + std::to_string(i) + " out of range");
}

}  // namespace detail

/// log pi(N | x^n), without leaving log space.
inline double log_subset_mass(const PosteriorState& s, const IndexSet& idx) {
  detail::check_indices(s, idx);
  std::vector<double> terms;
  terms.reserve(idx.size());
  for (std::size_t i : idx) terms.push_back(s.log_posterior()[i]);
  return detail::log_sum_exp(terms);
}

inline double subset_mass(const PosteriorState& s, const IndexSet& idx) {
  return std::min(1.0, std::exp(log_subset_mass(s, idx)));
}

/// (1/n) log pi(N | x^n); -inf when every member of N is eliminated.
inline double rate_statistic(const PosteriorState& s, const IndexSet& idx) {
  if (s.n() == 0) throw InvalidInput("rate statistic needs at least one observation");
  return log_subset_mass(s, idx) / static_cast<double>(s.n());
}

struct SandwichBounds {
  double lower = 0.0;
  double upper = 1.0;
  double log_lower = kNegInf;
  double log_upper = 0.0;
};

/// Two-sided bound on pi(N | x^n) from per-subset maxima:
///   max_N rho_n / max_M l_n  <=  pi(N | x^n)  <=  max_N l_n / max_M rho_n
/// where l_n(q) is the likelihood and rho_n(q) = prior(q) l_n(q). The upper
/// bound is clamped to 1.
inline SandwichBounds sandwich_bounds(const PosteriorState& s, const IndexSet& idx) {
  detail::check_indices(s, idx);
  const auto lp = s.log_prior();
  const auto ll = s.log_likelihood();
  double max_l_all = kNegInf, max_rho_all = kNegInf;
  for (std::size_t i = 0; i < s.size(); ++i) {
    max_l_all = std::max(max_l_all, ll[i]);
    max_rho_all = std::max(max_rho_all, lp[i] + ll[i]);
  }
  double max_l_sub = kNegInf, max_rho_sub = kNegInf;
  for (std::size_t i : idx) {
    max_l_sub = std::max(max_l_sub, ll[i]);
    max_rho_sub = std::max(max_rho_sub, lp[i] + ll[i]);
  }
  SandwichBounds b;
  if (max_rho_sub == kNegInf || max_l_all == kNegInf) {
    b = {0.0, 0.0, kNegInf, kNegInf};
    return b;
  }
  b.log_lower = std::min(0.0, max_rho_sub - max_l_all);
  b.log_upper = std::min(0.0, max_l_sub - max_rho_all);
  b.lower = std::exp(b.log_lower);
  b.upper = std::exp(b.log_upper);
  return b;
}

}  // namespace ldc
