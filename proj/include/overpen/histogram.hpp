#pragma once

// Histogram models (finite partitions of a bounded interval), maximum
// likelihood fits, KL projections of a known target, and the risk
// quantities that tie them together.
//
// Extended reals: +∞ is represented in-band as
// std::numeric_limits<double>::infinity() (absolute-continuity failures).

#include "overpen/densities.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace overpen {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

class HistogramModel
{
public:
  /// Strictly increasing breakpoints t_0 < t_1 < ... < t_K, K >= 1.
  explicit HistogramModel(std::vector<double> breakpoints) : breaks_(std::move(breakpoints))
  {
    if (breaks_.size() < 2)
      throw std::domain_error("HistogramModel: need at least one cell");
    for (std::size_t i = 0; i + 1 < breaks_.size(); ++i)
      if (!(breaks_[i] < breaks_[i + 1]) || !std::isfinite(breaks_[i]) || !std::isfinite(breaks_[i + 1]))
        throw std::domain_error("HistogramModel: breakpoints must be finite and strictly increasing");
  }

  std::span<const double> breakpoints() const noexcept { return breaks_; }
  std::size_t cells() const noexcept { return breaks_.size() - 1; }
  /// D_m = |Λ_m| - 1.
  int dim() const noexcept { return static_cast<int>(cells()) - 1; }
  Interval support() const noexcept { return { breaks_.front(), breaks_.back() }; }
  double cell_measure(std::size_t i) const { return breaks_[i + 1] - breaks_[i]; }
  Interval cell(std::size_t i) const { return { breaks_[i], breaks_[i + 1] }; }

  /// Index of the cell holding x. Cells are [t_i, t_{i+1}); the last one is closed.
  std::size_t cell_index(double x) const
  {
    if (!(x >= breaks_.front() && x <= breaks_.back()))
      throw std::domain_error("sample value " + format_value(x) + " is outside the model support [" +
                              format_value(breaks_.front()) + ", " + format_value(breaks_.back()) + "]");
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    const auto idx = static_cast<std::size_t>(it - breaks_.begin());
    return std::min(idx == 0 ? 0 : idx - 1, cells() - 1);
  }

  friend bool operator==(const HistogramModel&, const HistogramModel&) = default;

  static std::string format_value(double x)
  {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
  }

private:
  std::vector<double> breaks_;
};

inline HistogramModel build_regular_model(Interval support, std::size_t cells)
{
  if (cells == 0)
    throw std::domain_error("build_regular_model: need at least one cell");
  if (!(support.lo < support.hi))
    throw std::domain_error("build_regular_model: empty support");
  std::vector<double> b(cells + 1);
  const double width = support.length();
  for (std::size_t i = 0; i <= cells; ++i)
    b[i] = support.lo + width * static_cast<double>(i) / static_cast<double>(cells);
  b.back() = support.hi;
  return HistogramModel(std::move(b));
}

class HistogramDensity
{
public:
  HistogramDensity(HistogramModel model, std::vector<double> heights)
    : model_(std::move(model)), heights_(std::move(heights))
  {
    if (heights_.size() != model_.cells())
      throw std::domain_error("HistogramDensity: one height per cell required");
    double mass = 0.0;
    for (std::size_t i = 0; i < heights_.size(); ++i) {
      if (!(heights_[i] >= 0.0) || !std::isfinite(heights_[i]))
        throw std::domain_error("HistogramDensity: heights must be finite and non-negative");
      mass += heights_[i] * model_.cell_measure(i);
    }
    if (std::abs(mass - 1.0) > 1e-12)
      throw std::domain_error("HistogramDensity: heights integrate to " + HistogramModel::format_value(mass));
  }

  const HistogramModel& model() const noexcept { return model_; }
  std::span<const double> heights() const noexcept { return heights_; }
  double height(std::size_t i) const { return heights_[i]; }
  double operator()(double x) const { return heights_[model_.cell_index(x)]; }

private:
  HistogramModel model_;
  std::vector<double> heights_;
};

// ---------------------------------------------------------------------------
// Cell statistics

inline std::vector<std::size_t> cell_counts(const HistogramModel& model, std::span<const double> samples)
{
  if (samples.empty())
    throw std::domain_error("empty sample");
  std::vector<std::size_t> counts(model.cells(), 0);
  for (double x : samples)
    ++counts[model.cell_index(x)];
  return counts;
}

/// P(I) for every cell of `model`.
inline std::vector<double> cell_probabilities(const HistogramModel& model, const TargetDensity& target)
{
  if (!(model.support() == target.support()))
    throw std::domain_error("model support does not match the support of '" + target.id() + "'");
  std::vector<double> probs(model.cells());
  double prev = 0.0;
  for (std::size_t i = 0; i < model.cells(); ++i) {
    const double next = (i + 1 == model.cells()) ? 1.0 : target.cdf(model.breakpoints()[i + 1]);
    probs[i] = std::max(0.0, next - prev);
    prev = next;
  }
  return probs;
}

// ---------------------------------------------------------------------------
// Fits

/// Frequencies histogram: heights P_n(I)/μ(I).
inline HistogramDensity fit_mle(const HistogramModel& model, std::span<const double> samples)
{
  const auto counts = cell_counts(model, samples);
  const double n = static_cast<double>(samples.size());
  std::vector<double> h(model.cells());
  for (std::size_t i = 0; i < h.size(); ++i)
    h[i] = static_cast<double>(counts[i]) / (n * model.cell_measure(i));
  return HistogramDensity(model, std::move(h));
}

/// KL projection of the target onto the model: heights P(I)/μ(I).
inline HistogramDensity project_target(const HistogramModel& model, const TargetDensity& target)
{
  const auto probs = cell_probabilities(model, target);
  std::vector<double> h(model.cells());
  for (std::size_t i = 0; i < h.size(); ++i)
    h[i] = probs[i] / model.cell_measure(i);
  return HistogramDensity(model, std::move(h));
}

// ---------------------------------------------------------------------------
// Risks

/// P_n γ(f) = -(1/n) Σ ln f(ξ_i); +∞ when a sample hits a zero-height cell.
inline double empirical_risk(const HistogramDensity& hist, std::span<const double> samples)
{
  if (samples.empty())
    throw std::domain_error("empirical_risk: empty sample");
  const auto counts = cell_counts(hist.model(), samples);
  double sum = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0)
      continue;
    if (hist.height(i) == 0.0)
      return infinity;
    sum += static_cast<double>(counts[i]) * std::log(hist.height(i));
  }
  return -sum / static_cast<double>(samples.size());
}

/// Closed form of P_n γ(f̂_m) from cell counts: -Σ P_n(I) ln(P_n(I)/μ(I)), 0 ln 0 = 0.
inline double mle_empirical_risk(const HistogramModel& model, std::span<const std::size_t> counts, std::size_t n)
{
  const double nn = static_cast<double>(n);
  double risk = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0)
      continue;
    const double pn = static_cast<double>(counts[i]) / nn;
    risk -= pn * std::log(pn / model.cell_measure(i));
  }
  return risk;
}

inline double mle_empirical_risk(const HistogramModel& model, std::span<const double> samples)
{
  const auto counts = cell_counts(model, samples);
  return mle_empirical_risk(model, counts, samples.size());
}

/// K(f, g) = Σ μ(I) f_I ln(f_I / g_I).
inline double kl_between(const HistogramDensity& f, const HistogramDensity& g)
{
  if (!(f.model() == g.model()))
    throw std::domain_error("kl_between: histograms live on different partitions");
  double kl = 0.0;
  for (std::size_t i = 0; i < f.model().cells(); ++i) {
    const double fi = f.height(i), gi = g.height(i);
    if (fi == 0.0)
      continue;
    if (gi == 0.0)
      return infinity;
    kl += f.model().cell_measure(i) * fi * std::log(fi / gi);
  }
  return std::max(kl, 0.0);
}

/// K(f*, f) = ∫ f* ln f* - Σ P(I) ln β_I.
inline double kl_target_to_histogram(const TargetDensity& target, const HistogramDensity& hist)
{
  const auto probs = cell_probabilities(hist.model(), target);
  double cross = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] == 0.0)
      continue;
    if (hist.height(i) == 0.0)
      return infinity;
    cross += probs[i] * std::log(hist.height(i));
  }
  return std::max(entropy_term(target) - cross, 0.0);
}

struct RiskReport
{
  double emp_risk = 0.0;    ///< P_n γ(f̂_m)
  double true_excess = 0.0; ///< p₁ = K(f_m, f̂_m), may be +∞
  double emp_excess = 0.0;  ///< p₂ = K(f̂_m, f_m)
  double bias = 0.0;        ///< K(f*, f_m)
  double total_kl = 0.0;    ///< K(f*, f̂_m) = bias + p₁
  double chi_sq = 0.0;      ///< χ²_n(m)
  double sup_ratio = 0.0;   ///< max_I |P_n(I) - P(I)| / P(I)
};

/// Cellwise risk computation from target masses P(I), measures μ(I) and counts.
/// `entropy` is ∫ f* ln f*.
inline RiskReport risk_report(std::span<const double> probs, const HistogramModel& model,
                              std::span<const std::size_t> counts, std::size_t n, double entropy)
{
  const double nn = static_cast<double>(n);
  RiskReport r;
  double projected_cross = 0.0; // Σ P(I) ln(P(I)/μ(I))
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    const double pn = static_cast<double>(counts[i]) / nn;
    const double mu = model.cell_measure(i);
    if (p == 0.0) {
      if (counts[i] > 0)
        throw std::domain_error("degenerate model: cell " + std::to_string(i) +
                                " has zero target mass but holds samples");
      continue;
    }
    projected_cross += p * std::log(p / mu);
    if (pn > 0.0)
      r.emp_risk -= pn * std::log(pn / mu);
    // With u = (P_n - P)/P and Σ P u = 0, p₁ = Σ P (u - ln(1+u)) and
    // p₂ = Σ P ((1+u) ln(1+u) - u): sums of non-negative terms, free of the
    // cancellation in Σ P ln(P/P_n) when P_n ≈ P.
    const double u = (pn - p) / p;
    const double log1pu = std::log1p(u);
    r.emp_excess += p * (pn > 0.0 ? (1.0 + u) * log1pu - u : 1.0);
    if (r.true_excess != infinity)
      r.true_excess = (pn == 0.0) ? infinity : r.true_excess + p * (u - log1pu);
    const double diff = pn - p;
    r.chi_sq += diff * diff / p;
    r.sup_ratio = std::max(r.sup_ratio, std::abs(diff) / p);
  }
  r.bias = std::max(entropy - projected_cross, 0.0);
  r.total_kl = r.bias + r.true_excess;
  return r;
}

inline RiskReport excess_risks(const HistogramModel& model, std::span<const double> samples, const TargetDensity& target)
{
  const auto probs = cell_probabilities(model, target);
  const auto counts = cell_counts(model, samples);
  return risk_report(probs, model, counts, samples.size(), entropy_term(target));
}

} // namespace overpen
