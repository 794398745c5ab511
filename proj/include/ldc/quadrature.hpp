#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "ldc/density.hpp"
#include "ldc/error.hpp"

namespace ldc {

struct IntegralResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  std::size_t evaluations = 0;
};

struct QuadratureOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-13;
  std::size_t max_panels = 4000;
  /// Length scale of the integrand used by the infinite-range substitution.
  double scale = 1.0;
  /// Interior points to split at before adaptive refinement starts.
  std::vector<double> breakpoints = {};
};

namespace detail {

// 15-point Gauss-Kronrod with embedded 7-point Gauss rule. Nodes are strictly
// interior, so endpoint singularities of the integrand are never evaluated.
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  std::size_t segment;
  double a, b;
  double value, error;
  bool operator<(const Panel& o) const noexcept { return error < o.error; }
};

template <class G>
Panel gauss_kronrod(const G& g, std::size_t segment, double a, double b, std::size_t& evals) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = g(c);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = h * kKronrodNodes[j];
    const double f = g(c - dx) + g(c + dx);
    kronrod += kKronrodWeights[j] * f;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * f;
  }
  evals += 15;
  kronrod *= h;
  gauss *= h;
  return Panel{segment, a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod integration over an interval that may
/// have infinite endpoints.
///
/// The interval is cut at the finite breakpoints into segments. Finite
/// segments are integrated directly. A half-infinite segment [c, inf) uses
/// x = c + s(1+t)/(1-t) on t in (-1, 1); (-inf, c] is its mirror; the
/// whole line (no breakpoints) uses x = s t/(1-t^2). `s` is options.scale.
/// The panel with the largest error estimate is bisected until the summed
/// estimate is at most max(abs_tol, rel_tol |value|).
inline IntegralResult integrate(const std::function<double(double)>& f, Interval domain,
                                const QuadratureOptions& opt = {}) {
  if (!(opt.rel_tol > 0.0 && opt.rel_tol <= 1e-2)) throw InvalidInput("rel_tol must lie in (0, 1e-2]");
  if (!(domain.lo < domain.hi)) {
    if (domain.lo == domain.hi) return {};
    throw InvalidInput("integration interval must satisfy lo <= hi");
  }
  const double s = opt.scale > 0.0 && std::isfinite(opt.scale) ? opt.scale : 1.0;

  std::vector<double> cuts;
  for (double b : opt.breakpoints)
    if (std::isfinite(b) && b > domain.lo && b < domain.hi) cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // Each segment maps t in [ta, tb] to x with a Jacobian.
  enum class Map { Linear, Upper, Lower, Whole };
  struct Segment {
    Map map;
    double anchor;
    double ta, tb;
  };
  std::vector<Segment> segments;
  std::vector<double> knots;
  knots.push_back(domain.lo);
  knots.insert(knots.end(), cuts.begin(), cuts.end());
  knots.push_back(domain.hi);
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double a = knots[i], b = knots[i + 1];
    if (std::isfinite(a) && std::isfinite(b))
      segments.push_back({Map::Linear, 0.0, a, b});
    else if (std::isfinite(a))
      segments.push_back({Map::Upper, a, -1.0, 1.0});
    else if (std::isfinite(b))
      segments.push_back({Map::Lower, b, -1.0, 1.0});
    else
      segments.push_back({Map::Whole, 0.0, -1.0, 1.0});
  }

  bool bad_value = false;
  auto mapped = [&](std::size_t seg, double t) {
    const Segment& sg = segments[seg];
    double x = 0.0, jac = 0.0;
    switch (sg.map) {
      case Map::Linear: x = t; jac = 1.0; break;
      case Map::Upper: x = sg.anchor + s * (1.0 + t) / (1.0 - t); jac = 2.0 * s / ((1.0 - t) * (1.0 - t)); break;
      case Map::Lower: x = sg.anchor - s * (1.0 - t) / (1.0 + t); jac = 2.0 * s / ((1.0 + t) * (1.0 + t)); break;
      case Map::Whole: {
        const double d = 1.0 - t * t;
        x = s * t / d;
        jac = s * (1.0 + t * t) / (d * d);
        break;
      }
    }
    if (!std::isfinite(x) || !std::isfinite(jac)) return 0.0;
    const double v = f(x);
    if (v == 0.0) return 0.0;
    if (!std::isfinite(v)) {
      bad_value = true;
      return 0.0;
    }
    return v * jac;
  };

  IntegralResult out;
  std::priority_queue<detail::Panel> heap;
  double total = 0.0, error = 0.0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    auto g = [&, i](double t) { return mapped(i, t); };
    auto p = detail::gauss_kronrod(g, i, segments[i].ta, segments[i].tb, out.evaluations);
    total += p.value;
    error += p.error;
    heap.push(p);
  }

  std::size_t panels = heap.size();
  auto tolerance = [&] { return std::max(opt.abs_tol, opt.rel_tol * std::abs(total)); };
  while (error > tolerance()) {
    if (panels >= opt.max_panels) {
      throw NonConvergence("quadrature did not converge within " + std::to_string(opt.max_panels) +
                               " panels (estimate " + detail::format_number(total) + ", error " +
                               detail::format_number(error) + ")",
                           total, error);
    }
    const detail::Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    auto g = [&, seg = worst.segment](double t) { return mapped(seg, t); };
    auto left = detail::gauss_kronrod(g, worst.segment, worst.a, mid, out.evaluations);
    auto right = detail::gauss_kronrod(g, worst.segment, mid, worst.b, out.evaluations);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++panels;
  }
  if (bad_value) throw NonConvergence("integrand produced a non-finite value", total, error);

  // Re-sum from the panels to shed drift from the incremental updates.
  total = 0.0;
  error = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  out.value = total;
  out.abs_error_estimate = error;
  return out;
}

}  // namespace ldc
