#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "ldc/density.hpp"
#include "ldc/quadrature.hpp"

namespace ldc {

inline constexpr double kAcceptanceRelTol = 1e-9;
inline constexpr double kSweepRelTol = 1e-7;

enum class DivergenceKind { L, I, Entropy };

inline const char* kind_name(DivergenceKind k) noexcept {
  switch (k) {
    case DivergenceKind::L: return "L";
    case DivergenceKind::I: return "I";
    case DivergenceKind::Entropy: return "entropy";
  }
  return "?";
}

/// A divergence functional value. `value` is +inf exactly when the
/// integrand is not integrable because of a support mismatch; in that case
/// numerical_error is 0.
struct DivergenceValue {
  DivergenceKind kind = DivergenceKind::L;
  double value = 0.0;
  double numerical_error = 0.0;

  bool finite() const noexcept { return std::isfinite(value); }
};

namespace detail {

inline QuadratureOptions options_for(const Density& p, const Density& q, double rel_tol) {
  QuadratureOptions opt;
  opt.rel_tol = rel_tol;
  opt.scale = p.scale();
  opt.breakpoints = p.breakpoints();
  auto qb = q.breakpoints();
  opt.breakpoints.insert(opt.breakpoints.end(), qb.begin(), qb.end());
  return opt;
}

}  // namespace detail

/// L(q||p) = -∫ p log q over the support of p (the cross-entropy of q
/// relative to p).
inline DivergenceValue l_divergence(const Density& q, const Density& p, double rel_tol = kAcceptanceRelTol) {
  if (!p.support().within(q.support())) return {DivergenceKind::L, kInf, 0.0};
  auto r = integrate(
      [&](double x) {
        const double lp = p.log_pdf(x);
        if (lp == kNegInf) return 0.0;
        const double w = std::exp(lp);
        return w == 0.0 ? 0.0 : -w * q.log_pdf(x);
      },
      p.support(), detail::options_for(p, q, rel_tol));
  return {DivergenceKind::L, r.value, r.abs_error_estimate};
}

/// I(p||q) = ∫ p log(p/q), the Kullback-Leibler divergence.
inline DivergenceValue i_divergence(const Density& p, const Density& q, double rel_tol = kAcceptanceRelTol) {
  if (!p.support().within(q.support())) return {DivergenceKind::I, kInf, 0.0};
  auto r = integrate(
      [&](double x) {
        const double lp = p.log_pdf(x);
        if (lp == kNegInf) return 0.0;
        const double w = std::exp(lp);
        return w == 0.0 ? 0.0 : w * (lp - q.log_pdf(x));
      },
      p.support(), detail::options_for(p, q, rel_tol));
  return {DivergenceKind::I, r.value, r.abs_error_estimate};
}

/// h(p) = -∫ p log p.
inline DivergenceValue differential_entropy(const Density& p, double rel_tol = kAcceptanceRelTol) {
  auto r = integrate(
      [&](double x) {
        const double lp = p.log_pdf(x);
        if (lp == kNegInf) return 0.0;
        const double w = std::exp(lp);
        return w == 0.0 ? 0.0 : -w * lp;
      },
      p.support(), detail::options_for(p, p, rel_tol));
  return {DivergenceKind::Entropy, r.value, r.abs_error_estimate};
}

/// |∫ p - 1| using the same integrator as the divergences.
inline double normalization_defect(const Density& p, double rel_tol = kAcceptanceRelTol) {
  auto r = integrate([&](double x) { return p.pdf(x); }, p.support(), detail::options_for(p, p, rel_tol));
  return std::abs(r.value - 1.0);
}

/// Analytic L(q||p) for same-family pairs that have one: Gaussian,
/// Exponential, Laplace, and Uniform (+inf unless p's interval is nested in
/// q's). Empty for every other pairing.
inline std::optional<double> closed_form_l(const Density& q, const Density& p) {
  if (q.family() != p.family()) return std::nullopt;
  const auto qp = q.params();
  const auto pp = p.params();
  switch (q.family()) {
    case Family::Gaussian: {
      const double m = qp[0], s = qp[1], mu = pp[0], sigma = pp[1];
      return 0.5 * std::log(2.0 * std::numbers::pi * s * s) + (sigma * sigma + (mu - m) * (mu - m)) / (2.0 * s * s);
    }
    case Family::Exponential:
      return -std::log(qp[0]) + qp[0] / pp[0];
    case Family::Laplace: {
      const double d = std::abs(pp[0] - qp[0]);
      const double mean_abs = d + pp[1] * std::exp(-d / pp[1]);
      return std::log(2.0 * qp[1]) + mean_abs / qp[1];
    }
    case Family::Uniform:
      if (pp[0] >= qp[0] && pp[1] <= qp[1]) return std::log(qp[1] - qp[0]);
      return kInf;
    case Family::Mixture:
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace ldc
