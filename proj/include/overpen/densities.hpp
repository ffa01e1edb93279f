#pragma once

// Catalog of analytically known target densities on bounded intervals,
// with inverse-cdf sampling and quadrature of integral functionals of f*.

#include "overpen/quadrature.hpp"
#include "overpen/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace overpen {

struct Interval
{
  double lo = 0.0;
  double hi = 1.0;

  double length() const noexcept { return hi - lo; }
  bool contains(double x) const noexcept { return x >= lo && x <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Raised when an integral functional does not stabilize under refinement.
class DivergenceError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class TargetDensity
{
public:
  using RealFn = std::function<double(double)>;

  struct Definition
  {
    std::string id;
    std::string description;
    Interval support;
    RealFn pdf;
    RealFn cdf;
    /// Inverse cdf; bisection on `cdf` is used when empty.
    RealFn quantile;
    /// f*(lo + d) and f*(hi - d) for offsets d >= 0. They let quadrature
    /// resolve edge behavior below the floating-point spacing at the
    /// endpoints. Default to evaluating `pdf` directly.
    RealFn pdf_from_lo;
    RealFn pdf_from_hi;
    /// Positive infimum of f* on the support, when there is one.
    std::optional<double> lower_bound;
  };

  explicit TargetDensity(Definition def);

  const std::string& id() const noexcept { return def_->id; }
  const std::string& description() const noexcept { return def_->description; }
  const Interval& support() const noexcept { return def_->support; }
  std::optional<double> lower_bound() const noexcept { return def_->lower_bound; }

  double pdf(double x) const { return def_->pdf(x); }
  double cdf(double x) const
  {
    if (x <= def_->support.lo)
      return 0.0;
    if (x >= def_->support.hi)
      return 1.0;
    return def_->cdf(x);
  }
  double pdf_from_lo(double d) const
  {
    return def_->pdf_from_lo ? def_->pdf_from_lo(d) : def_->pdf(def_->support.lo + d);
  }
  double pdf_from_hi(double d) const
  {
    return def_->pdf_from_hi ? def_->pdf_from_hi(d) : def_->pdf(def_->support.hi - d);
  }
  double quantile(double u) const;

  /// ∫ f* ln f* dμ, computed once at construction when it converges.
  std::optional<double> cached_entropy() const noexcept { return entropy_; }

private:
  std::shared_ptr<const Definition> def_;
  std::optional<double> entropy_;
};

// ---------------------------------------------------------------------------
// Quadrature of functionals of f*

/// ∫_x^y phi(f*(t)) dt.
///
/// Each half of [x, y] is mapped through t = end ± u², which removes
/// inverse-square-root and logarithmic singularities at the support edges.
template <class Phi>
QuadratureResult integrate_functional(const TargetDensity& density, double x, double y, Phi&& phi,
                                      const QuadratureOptions& opts = {})
{
  if (!(y > x))
    return { 0.0, 0.0, 0, true };
  const Interval& s = density.support();
  const double mid = 0.5 * (x + y);
  const double reach_lo = std::sqrt(mid - x);
  const double reach_hi = std::sqrt(y - mid);

  auto from_left = [&](double u) {
    const double d = u * u;
    const double f = (x == s.lo) ? density.pdf_from_lo(d) : density.pdf(x + d);
    return 2.0 * u * phi(f);
  };
  auto from_right = [&](double u) {
    const double d = u * u;
    const double f = (y == s.hi) ? density.pdf_from_hi(d) : density.pdf(y - d);
    return 2.0 * u * phi(f);
  };

  QuadratureOptions half = opts;
  half.abs_tol = 0.5 * opts.abs_tol;
  half.max_intervals = std::max<std::size_t>(1, opts.max_intervals / 2);
  auto left = integrate(from_left, 0.0, reach_lo, half);
  auto right = integrate(from_right, 0.0, reach_hi, half);
  QuadratureResult out;
  out.value = left.value + right.value;
  out.error = left.error + right.error;
  out.intervals = left.intervals + right.intervals;
  out.converged = left.converged && right.converged && std::isfinite(out.value);
  return out;
}

namespace detail {

inline double xlogx(double f) { return f > 0.0 ? f * std::log(f) : 0.0; }

inline std::optional<double> try_entropy(const TargetDensity& density)
{
  const auto& s = density.support();
  auto r = integrate_functional(density, s.lo, s.hi, xlogx, { 5e-11, 1e-13, 4000 });
  if (!r.converged)
    return std::nullopt;
  return r.value;
}

} // namespace detail

inline TargetDensity::TargetDensity(Definition def)
{
  if (!(std::isfinite(def.support.lo) && std::isfinite(def.support.hi) && def.support.lo < def.support.hi))
    throw std::invalid_argument("density '" + def.id + "': support must be a bounded nonempty interval");
  if (!def.pdf || !def.cdf)
    throw std::invalid_argument("density '" + def.id + "': pdf and cdf are required");
  def_ = std::make_shared<const Definition>(std::move(def));
  entropy_ = detail::try_entropy(*this);
}

inline double TargetDensity::quantile(double u) const
{
  if (def_->quantile)
    return def_->quantile(u);
  double lo = def_->support.lo, hi = def_->support.hi;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < u)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Operations

inline double pdf_at(const TargetDensity& density, double x)
{
  if (!density.support().contains(x))
    throw std::domain_error("pdf_at: x=" + std::to_string(x) + " is outside the support of '" + density.id() + "'");
  return density.pdf(x);
}

/// P(I) for I = [x, y].
inline double cell_probability(const TargetDensity& density, double x, double y)
{
  const auto& s = density.support();
  if (!(x <= y) || !s.contains(x) || !s.contains(y))
    throw std::domain_error("cell_probability: [" + std::to_string(x) + ", " + std::to_string(y) +
                            "] is not a subinterval of the support of '" + density.id() + "'");
  return std::max(0.0, density.cdf(y) - density.cdf(x));
}

/// n i.i.d. draws by inverse cdf on the counter stream keyed by `seed`.
/// Draw i depends only on (seed, i).
inline std::vector<double> draw_samples(const TargetDensity& density, std::uint64_t seed, std::size_t n)
{
  const CounterStream stream(seed);
  const auto& s = density.support();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::clamp(density.quantile(stream.uniform(i)), s.lo, s.hi);
  return out;
}

/// ∫ f* ln f* dμ.
inline double entropy_term(const TargetDensity& density)
{
  if (auto cached = density.cached_entropy())
    return *cached;
  throw DivergenceError("entropy_term: quadrature of f* ln f* did not converge for '" + density.id() + "'");
}

struct MomentConstants
{
  double p = 0.0;
  double J = 0.0; ///< ∫ f*^p ((ln f*)² ∨ 1) dμ
  double Q = 0.0; ///< ∫ ((ln f*)² ∨ 1) / f*^(p-1) dμ
  bool j_finite = false;
  bool q_finite = false;
};

inline MomentConstants moment_constants(const TargetDensity& density, double p)
{
  if (!(p > 1.0))
    throw std::domain_error("moment_constants: p must exceed 1");
  const auto& s = density.support();
  const QuadratureOptions opts{ 1e-12, 1e-7, 2000 };
  auto log_weight = [](double f) {
    const double l = std::log(f);
    return std::max(l * l, 1.0);
  };
  auto j = integrate_functional(
    density, s.lo, s.hi, [&](double f) { return f > 0.0 ? std::pow(f, p) * log_weight(f) : 0.0; }, opts);
  auto q = integrate_functional(
    density, s.lo, s.hi,
    [&](double f) {
      return f > 0.0 ? log_weight(f) / std::pow(f, p - 1.0) : std::numeric_limits<double>::infinity();
    },
    opts);

  MomentConstants mc;
  mc.p = p;
  mc.j_finite = j.converged;
  mc.q_finite = q.converged;
  mc.J = j.converged ? j.value : std::numeric_limits<double>::infinity();
  mc.Q = q.converged ? q.value : std::numeric_limits<double>::infinity();
  return mc;
}

// ---------------------------------------------------------------------------
// Catalog

inline TargetDensity make_uniform()
{
  return TargetDensity({ "uniform",
                         "uniform on [0,1]",
                         { 0.0, 1.0 },
                         [](double) { return 1.0; },
                         [](double x) { return x; },
                         [](double u) { return u; },
                         [](double) { return 1.0; },
                         [](double) { return 1.0; },
                         1.0 });
}

inline TargetDensity make_tilted()
{
  return TargetDensity({ "tilted",
                         "tilted uniform f(x) = 0.5 + x on [0,1]",
                         { 0.0, 1.0 },
                         [](double x) { return 0.5 + x; },
                         [](double x) { return 0.5 * x + 0.5 * x * x; },
                         [](double u) { return -0.5 + std::sqrt(0.25 + 2.0 * u); },
                         [](double d) { return 0.5 + d; },
                         [](double d) { return 1.5 - d; },
                         0.5 });
}

inline TargetDensity make_triangle()
{
  auto edge = [](double d) { return d <= 1.0 ? d : 2.0 - d; };
  return TargetDensity({ "triangle",
                         "isosceles triangle f(x) = 1 - |x| on [-1,1]",
                         { -1.0, 1.0 },
                         [](double x) { return std::max(0.0, 1.0 - std::abs(x)); },
                         [](double x) {
                           return x <= 0.0 ? 0.5 * (1.0 + x) * (1.0 + x) : 1.0 - 0.5 * (1.0 - x) * (1.0 - x);
                         },
                         [](double u) { return u <= 0.5 ? -1.0 + std::sqrt(2.0 * u) : 1.0 - std::sqrt(2.0 * (1.0 - u)); },
                         edge,
                         edge,
                         std::nullopt });
}

inline TargetDensity make_beta22()
{
  auto edge = [](double d) { return 6.0 * d * (1.0 - d); };
  return TargetDensity({ "beta22",
                         "Beta(2,2) f(x) = 6x(1-x) on [0,1]",
                         { 0.0, 1.0 },
                         [](double x) { return 6.0 * x * (1.0 - x); },
                         [](double x) { return x * x * (3.0 - 2.0 * x); },
                         // Trigonometric root of 3x² - 2x³ = u lying in [0,1].
                         [](double u) {
                           return 0.5 + std::cos((std::acos(1.0 - 2.0 * u) - 2.0 * std::numbers::pi) / 3.0);
                         },
                         edge,
                         edge,
                         std::nullopt });
}

/// Folded infinite peak: the law of |X| for X with density 1/(4√|x|) on [-1,1].
inline TargetDensity make_inf_peak()
{
  return TargetDensity({ "inf_peak",
                         "infinite peak f(x) = 1/(2 sqrt(x)) on [0,1]",
                         { 0.0, 1.0 },
                         [](double x) { return 0.5 / std::sqrt(x); },
                         [](double x) { return std::sqrt(x); },
                         [](double u) { return u * u; },
                         [](double d) { return 0.5 / std::sqrt(d); },
                         [](double d) { return 0.5 / std::sqrt(1.0 - d); },
                         0.5 });
}

/// Logarithmic peaks at both ends of [0,1]. No closed-form inverse cdf.
inline TargetDensity make_bilog_peak()
{
  auto xlog = [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; };
  auto edge = [](double d) { return -0.5 * (std::log(d) + std::log1p(-d)); };
  return TargetDensity({ "bilog_peak",
                         "bilogarithmic peak f(x) = -(ln x + ln(1-x))/2 on [0,1]",
                         { 0.0, 1.0 },
                         [](double x) { return -0.5 * (std::log(x) + std::log1p(-x)); },
                         [xlog](double x) { return 0.5 * (2.0 * x - xlog(x) + xlog(1.0 - x)); },
                         {},
                         edge,
                         edge,
                         std::log(2.0) });
}

/// Registered densities, in catalog order.
inline const std::vector<TargetDensity>& density_catalog()
{
  static const std::vector<TargetDensity> catalog = { make_uniform(),  make_triangle(), make_beta22(),
                                                      make_bilog_peak(), make_inf_peak(), make_tilted() };
  return catalog;
}

inline const TargetDensity& find_density(const std::string& id)
{
  for (const auto& d : density_catalog())
    if (d.id() == id)
      return d;
  throw std::invalid_argument("unknown density id '" + id + "'");
}

} // namespace overpen
