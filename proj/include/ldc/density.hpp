#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ldc/error.hpp"
#include "ldc/rng.hpp"

namespace ldc {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Closed interval on the extended real line. Infinite endpoints are open
/// in effect since no real number equals them.
struct Interval {
  double lo = kNegInf;
  double hi = kInf;

  bool contains(double x) const noexcept { return x >= lo && x <= hi; }
  bool within(const Interval& outer) const noexcept { return lo >= outer.lo && hi <= outer.hi; }
  bool bounded() const noexcept { return std::isfinite(lo) && std::isfinite(hi); }
  double length() const noexcept { return hi - lo; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

enum class Family { Gaussian, Exponential, Laplace, Uniform, Mixture };

inline const char* family_name(Family f) noexcept {
  switch (f) {
    case Family::Gaussian: return "gaussian";
    case Family::Exponential: return "exponential";
    case Family::Laplace: return "laplace";
    case Family::Uniform: return "uniform";
    case Family::Mixture: return "mixture";
  }
  return "unknown";
}

namespace detail {

inline double log_sum_exp(std::span<const double> xs) noexcept {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - m);
  return m + std::log(acc);
}

// Shortest decimal that round-trips.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace detail

/// A one-dimensional probability density from one of the supported
/// parametric families, or a finite mixture of them.
///
/// Parameters are validated at construction; evaluation never throws.
/// Parameter layout per family:
///   Gaussian    {mean, stdev}
///   Exponential {rate}
///   Laplace     {location, scale}
///   Uniform     {lo, hi}
///   Mixture     component weights (components held separately)
class Density {
 public:
  static Density gaussian(double mean, double stdev) {
    require(std::isfinite(mean), "gaussian mean must be finite");
    require(std::isfinite(stdev) && stdev > 0.0, "gaussian stdev must be positive and finite");
    return Density(Family::Gaussian, {mean, stdev}, Interval{});
  }

  static Density exponential(double rate) {
    require(std::isfinite(rate) && rate > 0.0, "exponential rate must be positive and finite");
    return Density(Family::Exponential, {rate}, Interval{0.0, kInf});
  }

  static Density laplace(double location, double scale) {
    require(std::isfinite(location), "laplace location must be finite");
    require(std::isfinite(scale) && scale > 0.0, "laplace scale must be positive and finite");
    return Density(Family::Laplace, {location, scale}, Interval{});
  }

  static Density uniform(double lo, double hi) {
    require(std::isfinite(lo) && std::isfinite(hi), "uniform bounds must be finite");
    require(lo < hi, "uniform requires lo < hi");
    return Density(Family::Uniform, {lo, hi}, Interval{lo, hi});
  }

  /// Components must come from the base families and their supports must
  /// overlap into a single interval (no interior gaps).
  static Density mixture(std::vector<double> weights, std::vector<Density> components) {
    require(!components.empty(), "mixture needs at least one component");
    require(weights.size() == components.size(), "mixture weights and components differ in length");
    double total = 0.0;
    for (double w : weights) {
      require(std::isfinite(w) && w >= 0.0, "mixture weights must be nonnegative");
      total += w;
    }
    require(std::abs(total - 1.0) <= 1e-12, "mixture weights must sum to 1");
    for (const auto& c : components)
      require(c.family() != Family::Mixture, "mixture components must be base families");

    std::vector<Interval> parts;
    for (std::size_t i = 0; i < components.size(); ++i)
      if (weights[i] > 0.0) parts.push_back(components[i].support());
    std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    Interval hull = parts.front();
    for (const auto& p : parts) {
      require(p.lo <= hull.hi, "mixture component supports leave a gap");
      hull.hi = std::max(hull.hi, p.hi);
    }
    Density d(Family::Mixture, std::move(weights), hull);
    d.components_ = std::move(components);
    return d;
  }

  Family family() const noexcept { return family_; }
  std::span<const double> params() const noexcept { return params_; }
  const Interval& support() const noexcept { return support_; }
  const std::vector<Density>& components() const noexcept { return components_; }

  /// log density; -inf outside the support, never NaN.
  double log_pdf(double x) const noexcept {
    if (std::isnan(x) || !support_.contains(x)) return kNegInf;
    switch (family_) {
      case Family::Gaussian: {
        const double z = (x - params_[0]) / params_[1];
        return -0.5 * std::log(2.0 * std::numbers::pi) - std::log(params_[1]) - 0.5 * z * z;
      }
      case Family::Exponential:
        return std::log(params_[0]) - params_[0] * x;
      case Family::Laplace:
        return -std::log(2.0 * params_[1]) - std::abs(x - params_[0]) / params_[1];
      case Family::Uniform:
        return -std::log(params_[1] - params_[0]);
      case Family::Mixture: {
        // streaming log-sum-exp over components
        double m = kNegInf, acc = 0.0;
        for (std::size_t i = 0; i < components_.size(); ++i) {
          if (params_[i] <= 0.0) continue;
          const double t = std::log(params_[i]) + components_[i].log_pdf(x);
          if (t == kNegInf) continue;
          if (t > m) {
            acc = acc * std::exp(m - t) + 1.0;
            m = t;
          } else {
            acc += std::exp(t - m);
          }
        }
        return m == kNegInf ? kNegInf : m + std::log(acc);
      }
    }
    return kNegInf;
  }

  double pdf(double x) const noexcept { return std::exp(log_pdf(x)); }

  /// One variate; a pure function of the generator and the draw index.
  double draw(const CounterRng& rng, std::uint64_t counter) const noexcept {
    switch (family_) {
      case Family::Gaussian: {
        const double u1 = rng.uniform(counter, 0);
        const double u2 = rng.uniform(counter, 1);
        return params_[0] + params_[1] * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
      }
      case Family::Exponential:
        return -std::log(rng.uniform(counter, 0)) / params_[0];
      case Family::Laplace: {
        const double u = rng.uniform(counter, 0) - 0.5;
        const double mag = -std::log1p(-2.0 * std::abs(u));
        return params_[0] + (u < 0.0 ? -params_[1] : params_[1]) * mag;
      }
      case Family::Uniform: {
        const double x = params_[0] + (params_[1] - params_[0]) * rng.uniform(counter, 0);
        return std::clamp(x, params_[0], params_[1]);
      }
      case Family::Mixture: {
        const double u = rng.uniform(counter, 2);
        double cum = 0.0;
        std::size_t pick = components_.size() - 1;
        for (std::size_t i = 0; i < components_.size(); ++i) {
          cum += params_[i];
          if (u < cum && params_[i] > 0.0) {
            pick = i;
            break;
          }
        }
        while (params_[pick] <= 0.0 && pick > 0) --pick;
        return components_[pick].draw(rng, counter);
      }
    }
    return 0.0;
  }

  double mean() const noexcept {
    switch (family_) {
      case Family::Gaussian:
      case Family::Laplace: return params_[0];
      case Family::Exponential: return 1.0 / params_[0];
      case Family::Uniform: return 0.5 * (params_[0] + params_[1]);
      case Family::Mixture: {
        double m = 0.0;
        for (std::size_t i = 0; i < components_.size(); ++i) m += params_[i] * components_[i].mean();
        return m;
      }
    }
    return 0.0;
  }

  double variance() const noexcept {
    switch (family_) {
      case Family::Gaussian: return params_[1] * params_[1];
      case Family::Exponential: return 1.0 / (params_[0] * params_[0]);
      case Family::Laplace: return 2.0 * params_[1] * params_[1];
      case Family::Uniform: {
        const double w = params_[1] - params_[0];
        return w * w / 12.0;
      }
      case Family::Mixture: {
        double second = 0.0;
        for (std::size_t i = 0; i < components_.size(); ++i) {
          const double mu = components_[i].mean();
          second += params_[i] * (components_[i].variance() + mu * mu);
        }
        const double mu = mean();
        return second - mu * mu;
      }
    }
    return 0.0;
  }

  /// Characteristic length used to scale infinite-range substitutions.
  double scale() const noexcept {
    switch (family_) {
      case Family::Uniform: return params_[1] - params_[0];
      default: return std::sqrt(variance());
    }
  }

  /// Points where the density has kinks, jumps, or most of its mass turns
  /// over. Quadrature splits there so no feature falls inside one panel.
  std::vector<double> breakpoints() const {
    std::vector<double> out;
    switch (family_) {
      case Family::Gaussian:
      case Family::Laplace: {
        const double loc = params_[0], s = params_[1];
        out = {loc - 8.0 * s, loc - 2.0 * s, loc, loc + 2.0 * s, loc + 8.0 * s};
        break;
      }
      case Family::Exponential:
        out = {1.0 / params_[0], 8.0 / params_[0]};
        break;
      case Family::Uniform:
        out = {params_[0], params_[1]};
        break;
      case Family::Mixture:
        for (std::size_t i = 0; i < components_.size(); ++i) {
          if (params_[i] <= 0.0) continue;
          auto b = components_[i].breakpoints();
          out.insert(out.end(), b.begin(), b.end());
        }
        break;
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Mini-syntax rendering, e.g. "gaussian:0,1" or
  /// "mixture:0.5*gaussian:-1,1|0.5*gaussian:1,1".
  std::string describe() const {
    std::string s = family_name(family_);
    s += ':';
    if (family_ == Family::Mixture) {
      for (std::size_t i = 0; i < components_.size(); ++i) {
        if (i) s += '|';
        s += detail::format_number(params_[i]) + '*' + components_[i].describe();
      }
      return s;
    }
    for (std::size_t i = 0; i < params_.size(); ++i) {
      if (i) s += ',';
      s += detail::format_number(params_[i]);
    }
    return s;
  }

  friend bool operator==(const Density& a, const Density& b) {
    return a.family_ == b.family_ && a.params_ == b.params_ && a.components_ == b.components_;
  }

 private:
  Density(Family f, std::vector<double> params, Interval support)
      : family_(f), params_(std::move(params)), support_(support) {}

  static void require(bool ok, const char* msg) {
    if (!ok) throw InvalidInput(msg);
  }

  Family family_;
  std::vector<double> params_;
  Interval support_;
  std::vector<Density> components_;
};

/// An i.i.d. sample X_1..X_n from one density.
struct Sample {
  std::vector<double> values;
  std::string source_id;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// Draws with indices [first, first + out.size()) of the given stream.
/// Consecutive calls with adjacent ranges reproduce one long sample.
inline void sample_into(const Density& d, const CounterRng& rng, std::uint64_t first, std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = d.draw(rng, first + i);
}

inline Sample sample(const Density& d, std::uint64_t seed, std::size_t n, std::uint64_t stream = 0) {
  if (n == 0) throw InvalidInput("sample size must be at least 1");
  Sample s{std::vector<double>(n), d.describe(), seed, stream};
  sample_into(d, CounterRng(seed, stream), 0, s.values);
  return s;
}

}  // namespace ldc
