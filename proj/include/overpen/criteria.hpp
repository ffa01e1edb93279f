#pragma once

// Penalties for histogram selection by penalized maximum likelihood:
// AIC, AICc, Birgé–Rozenholc, the over-penalization pen_+ and its
// (θ, Δ) generalization. The data-driven constant of AIC_a lives in
// adaptive.hpp.

#include "overpen/histogram.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace overpen {

enum class CriterionKind
{
  aic,
  aicc,
  br,
  overpen,
  theta_delta,
  adaptive
};

enum class BrVariant
{
  paper,  ///< (ln D)^2.5 / n
  classic ///< D/n + (ln D)^2.5 / n
};

/// Whether pen_+ keeps the leading AIC term: (1 + C ε⁺) D/n versus C ε⁺ D/n.
enum class OverpenBase
{
  one,
  none
};

struct AlphaGrid
{
  std::vector<double> alphas;

  /// {0.05, 0.10, ..., 0.95}.
  static AlphaGrid standard()
  {
    AlphaGrid g;
    for (int i = 1; i <= 19; ++i)
      g.alphas.push_back(0.05 * i);
    return g;
  }
};

struct Criterion
{
  CriterionKind kind = CriterionKind::aic;
  double c = 0.0;     ///< OverPen constant C
  double theta = 1.0; ///< ThetaDelta θ
  double delta = 0.0; ///< ThetaDelta Δ
  BrVariant br_variant = BrVariant::paper;
  OverpenBase base = OverpenBase::one;
  AlphaGrid grid = AlphaGrid::standard();

  static Criterion aic() { return {}; }
  static Criterion aicc() { return { CriterionKind::aicc }; }
  static Criterion br(BrVariant v = BrVariant::paper)
  {
    Criterion c{ CriterionKind::br };
    c.br_variant = v;
    return c;
  }
  static Criterion overpen(double constant, OverpenBase base = OverpenBase::one)
  {
    Criterion c{ CriterionKind::overpen };
    c.c = constant;
    c.base = base;
    return c;
  }
  static Criterion aic1(OverpenBase base = OverpenBase::one) { return overpen(1.0, base); }
  static Criterion theta_delta(double theta, double delta)
  {
    Criterion c{ CriterionKind::theta_delta };
    c.theta = theta;
    c.delta = delta;
    return c;
  }
  static Criterion adaptive(AlphaGrid grid = AlphaGrid::standard(), OverpenBase base = OverpenBase::one)
  {
    Criterion c{ CriterionKind::adaptive };
    c.grid = std::move(grid);
    c.base = base;
    return c;
  }
};

namespace detail {

inline std::string format_g(double x)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline double parse_real(std::string_view text, std::string_view what)
{
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value))
    throw std::invalid_argument("bad " + std::string(what) + " '" + std::string(text) + "'");
  return value;
}

} // namespace detail

/// Canonical label used in outputs. OverPen with C = 1 is reported as "aic1".
inline std::string criterion_label(const Criterion& c)
{
  switch (c.kind) {
    case CriterionKind::aic:
      return "aic";
    case CriterionKind::aicc:
      return "aicc";
    case CriterionKind::br:
      return c.br_variant == BrVariant::paper ? "br" : "br_classic";
    case CriterionKind::overpen:
      return c.c == 1.0 ? "aic1" : "overpen:" + detail::format_g(c.c);
    case CriterionKind::theta_delta:
      return "thetadelta:" + detail::format_g(c.theta) + "," + detail::format_g(c.delta);
    case CriterionKind::adaptive:
      return "adaptive";
  }
  return "?";
}

/// Parses `aic | aicc | br | aic1 | overpen:C | thetadelta:T,D | adaptive`.
inline Criterion parse_criterion(std::string_view text)
{
  if (text == "aic")
    return Criterion::aic();
  if (text == "aicc")
    return Criterion::aicc();
  if (text == "br")
    return Criterion::br();
  if (text == "br_classic")
    return Criterion::br(BrVariant::classic);
  if (text == "aic1")
    return Criterion::aic1();
  if (text == "adaptive")
    return Criterion::adaptive();
  if (text.starts_with("overpen:")) {
    const double c = detail::parse_real(text.substr(8), "overpen constant");
    if (c < 0.0)
      throw std::invalid_argument("overpen constant must be non-negative");
    return Criterion::overpen(c);
  }
  if (text.starts_with("thetadelta:")) {
    auto rest = text.substr(11);
    auto comma = rest.find(',');
    if (comma == std::string_view::npos)
      throw std::invalid_argument("thetadelta expects 'thetadelta:T,D'");
    const double theta = detail::parse_real(rest.substr(0, comma), "theta");
    const double delta = detail::parse_real(rest.substr(comma + 1), "delta");
    if (theta < 0.0 || delta < 0.0)
      throw std::invalid_argument("thetadelta parameters must be non-negative");
    return Criterion::theta_delta(theta, delta);
  }
  throw std::invalid_argument("unknown criterion '" + std::string(text) + "'");
}

struct EpsilonTerms
{
  double plus = 0.0;  ///< max{√(D ln(n+1)/n), √(ln(n+1)/D), ln(n+1)/D}
  double minus = 0.0; ///< max{√(D ln(n+1)/n), √(ln(n+1)/D)}
};

inline EpsilonTerms epsilon_terms(int dim, std::size_t n)
{
  if (dim < 1)
    throw std::domain_error("epsilon_terms: D must be at least 1");
  if (n < 1)
    throw std::domain_error("epsilon_terms: n must be at least 1");
  const double d = dim;
  const double nn = static_cast<double>(n);
  const double l = std::log(nn + 1.0);
  const double a = std::sqrt(d * l / nn);
  const double b = std::sqrt(l / d);
  const double c = l / d;
  return { std::max({ a, b, c }), std::max(a, b) };
}

/// pen(m) for a model of dimension `dim` and sample size n. An empty result
/// marks the model infeasible (AICc with D >= n - 1). Adaptive criteria must
/// be resolved to OverPen(Ĉ) first.
inline std::optional<double> penalty(const Criterion& c, int dim, std::size_t n)
{
  if (dim < 0 || n < 1)
    throw std::domain_error("penalty: need D >= 0 and n >= 1");
  const double d = dim;
  const double nn = static_cast<double>(n);
  switch (c.kind) {
    case CriterionKind::aic:
      return d / nn;
    case CriterionKind::aicc:
      if (dim + 1 >= static_cast<long long>(n))
        return std::nullopt;
      return d / (nn - d - 1.0);
    case CriterionKind::br: {
      const double log_term = dim >= 2 ? std::pow(std::log(d), 2.5) / nn : 0.0;
      return c.br_variant == BrVariant::paper ? log_term : d / nn + log_term;
    }
    case CriterionKind::overpen:
    case CriterionKind::theta_delta: {
      if (dim == 0)
        return 0.0;
      const double lead = c.kind == CriterionKind::overpen ? (c.base == OverpenBase::one ? 1.0 : 0.0) : c.theta;
      const double scale = c.kind == CriterionKind::overpen ? c.c : c.delta;
      return (lead + scale * epsilon_terms(dim, n).plus) * d / nn;
    }
    case CriterionKind::adaptive:
      throw std::logic_error("penalty: adaptive criterion has no constant until adaptive_constant runs");
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Collections

/// Per-model MLE empirical risks on one sample. Models keep their input order.
struct CollectionFit
{
  std::size_t n = 0;
  std::vector<int> dims;
  std::vector<double> emp_risks;
};

inline CollectionFit fit_collection(std::span<const HistogramModel> models, std::span<const double> samples)
{
  if (samples.empty())
    throw std::domain_error("fit_collection: empty sample");
  CollectionFit fit;
  fit.n = samples.size();
  fit.dims.reserve(models.size());
  fit.emp_risks.reserve(models.size());
  for (const auto& m : models) {
    fit.dims.push_back(m.dim());
    fit.emp_risks.push_back(mle_empirical_risk(m, samples));
  }
  return fit;
}

/// crit(m) = P_n γ(f̂_m) + pen(m) for every model; empty entries are infeasible.
inline std::vector<std::optional<double>> penalized_values(const CollectionFit& fit, const Criterion& c)
{
  std::vector<std::optional<double>> out(fit.dims.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    if (auto pen = penalty(c, fit.dims[i], fit.n))
      out[i] = fit.emp_risks[i] + *pen;
  return out;
}

/// Index minimizing the feasible values; ties go to the smallest dimension,
/// then the smallest index.
inline std::optional<std::size_t> argmin_feasible(std::span<const int> dims,
                                                  std::span<const std::optional<double>> values)
{
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values[i])
      continue;
    if (!best || *values[i] < *values[*best] || (*values[i] == *values[*best] && dims[i] < dims[*best]))
      best = i;
  }
  return best;
}

/// crit for a single model on a sample.
inline std::optional<double> criterion_value(const Criterion& c, const HistogramModel& model,
                                             std::span<const double> samples)
{
  auto pen = penalty(c, model.dim(), samples.size());
  if (!pen)
    return std::nullopt;
  return mle_empirical_risk(model, samples) + *pen;
}

} // namespace overpen
