#pragma once

// Cellwise quadrature of functionals that mix the target f* with a
// piecewise-constant density f: variance proxies v and w_r, the moment
// P[(f*/f)^r], and K(f*, f) integrated directly.

#include "overpen/densities.hpp"
#include "overpen/histogram.hpp"

#include <cmath>
#include <stdexcept>

namespace overpen {

namespace detail {

template <class Phi>
QuadratureResult integrate_against_histogram(const TargetDensity& target, const HistogramDensity& f, Phi&& phi,
                                             const QuadratureOptions& opts)
{
  if (!(f.model().support() == target.support()))
    throw std::domain_error("histogram support does not match the support of '" + target.id() + "'");
  QuadratureResult total{ 0.0, 0.0, 0, true };
  for (std::size_t i = 0; i < f.model().cells(); ++i) {
    const double h = f.height(i);
    const auto c = f.model().cell(i);
    auto r = integrate_functional(target, c.lo, c.hi, [&](double fs) { return phi(h, fs); }, opts);
    total.value += r.value;
    total.error += r.error;
    total.intervals += r.intervals;
    total.converged = total.converged && r.converged;
  }
  return total;
}

inline void require_positive_heights(const HistogramDensity& f, const char* what)
{
  for (double h : f.heights())
    if (!(h > 0.0))
      throw std::domain_error(std::string(what) + ": histogram has a zero-height cell");
}

inline double log_ratio_sq(double h, double fs)
{
  const double l = std::log(h / fs);
  return l * l;
}

inline constexpr QuadratureOptions proxy_quadrature{ 1e-12, 1e-10, 1000 };

} // namespace detail

struct VarianceProxies
{
  double v = 0.0;   ///< ∫ (f ∨ f*) (ln(f/f*))² dμ
  double w_r = 0.0; ///< ∫ ((f*^(r+1)/f^r) ∨ f*) (ln(f/f*))² dμ
};

inline VarianceProxies variance_proxies(const TargetDensity& target, const HistogramDensity& f, double r)
{
  if (!(r > 0.0))
    throw std::domain_error("variance_proxies: r must be positive");
  detail::require_positive_heights(f, "variance_proxies");
  auto v = detail::integrate_against_histogram(
    target, f,
    [](double h, double fs) { return fs > 0.0 ? std::max(h, fs) * detail::log_ratio_sq(h, fs) : 0.0; },
    detail::proxy_quadrature);
  auto w = detail::integrate_against_histogram(
    target, f,
    [r](double h, double fs) {
      return fs > 0.0 ? std::max(fs * std::pow(fs / h, r), fs) * detail::log_ratio_sq(h, fs) : 0.0;
    },
    detail::proxy_quadrature);
  return { v.converged ? v.value : infinity, w.converged ? w.value : infinity };
}

/// P[(f*/f)^r] = ∫ f*^(r+1) / f^r dμ.
inline double ratio_moment(const TargetDensity& target, const HistogramDensity& f, double r)
{
  detail::require_positive_heights(f, "ratio_moment");
  auto m = detail::integrate_against_histogram(
    target, f, [r](double h, double fs) { return fs > 0.0 ? fs * std::pow(fs / h, r) : 0.0; },
    detail::proxy_quadrature);
  return m.converged ? m.value : infinity;
}

/// K(f*, f) = Σ_I ∫_I f* ln(f*/β_I) dμ, by quadrature on every cell. Avoids the
/// cancellation of entropy minus cross term when K is small.
inline double kl_target_to_histogram_quadrature(const TargetDensity& target, const HistogramDensity& f)
{
  for (std::size_t i = 0; i < f.model().cells(); ++i) {
    if (f.height(i) == 0.0) {
      const auto c = f.model().cell(i);
      if (cell_probability(target, c.lo, c.hi) > 0.0)
        return infinity;
    }
  }
  auto k = detail::integrate_against_histogram(
    target, f, [](double h, double fs) { return (fs > 0.0 && h > 0.0) ? fs * std::log(fs / h) : 0.0; },
    detail::proxy_quadrature);
  return k.converged ? std::max(k.value, 0.0) : infinity;
}

} // namespace overpen
