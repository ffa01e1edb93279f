#pragma once

// Model selection over a collection of histogram models: penalized argmin,
// the equivalent iterative pseudo-test scheme, and the oracle model when the
// target is known.

#include "overpen/adaptive.hpp"
#include "overpen/criteria.hpp"
#include "overpen/histogram.hpp"

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace overpen {

struct SelectionResult
{
  std::string criterion;
  std::size_t n = 0;
  std::size_t selected = 0;
  int selected_dim = 0;
  std::vector<std::optional<double>> crit_values;
  std::vector<std::size_t> excluded;
  /// Ĉ when the criterion was adaptive, the OverPen constant otherwise (0 if unused).
  double constant = 0.0;
};

struct OracleResult
{
  std::size_t oracle = 0;
  std::vector<double> kl_values;
};

/// Regular partitions of `support` with K = 1..K_max cells, by increasing dimension.
/// K_max defaults to max(2, ⌊n / ln(n+1)⌋).
inline std::vector<HistogramModel> regular_model_grid(Interval support, std::size_t n,
                                                      std::optional<std::size_t> max_cells = std::nullopt)
{
  std::size_t k_max = max_cells.value_or(std::max<std::size_t>(
    2, static_cast<std::size_t>(std::floor(static_cast<double>(n) / std::log(static_cast<double>(n) + 1.0)))));
  if (k_max < 1)
    throw std::domain_error("regular_model_grid: need at least one cell");
  std::vector<HistogramModel> models;
  models.reserve(k_max);
  for (std::size_t k = 1; k <= k_max; ++k)
    models.push_back(build_regular_model(support, k));
  return models;
}

namespace detail {

inline SelectionResult make_result(const CollectionFit& fit, std::vector<std::optional<double>> values, std::size_t chosen)
{
  SelectionResult r;
  r.n = fit.n;
  r.selected = chosen;
  r.selected_dim = fit.dims[chosen];
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!values[i])
      r.excluded.push_back(i);
  r.crit_values = std::move(values);
  return r;
}

} // namespace detail

/// Argmin over precomputed criterion values.
inline SelectionResult select_argmin(const CollectionFit& fit, std::vector<std::optional<double>> values)
{
  if (values.size() != fit.dims.size())
    throw std::invalid_argument("select_argmin: one criterion value per model required");
  const auto best = argmin_feasible(fit.dims, values);
  if (!best)
    throw std::domain_error("select_argmin: every model is infeasible");
  return detail::make_result(fit, std::move(values), *best);
}

/// Iterative pseudo-tests T(m, m') = 1{crit(m) <= crit(m')}: the current
/// candidate is replaced by the first later model it does not beat.
/// Exactly (number of feasible models - 1) tests are run.
inline SelectionResult select_by_pseudo_tests(const CollectionFit& fit, std::vector<std::optional<double>> values)
{
  if (values.size() != fit.dims.size())
    throw std::invalid_argument("select_by_pseudo_tests: one criterion value per model required");
  std::optional<std::size_t> candidate;
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (!values[j])
      continue;
    if (!candidate || !(*values[*candidate] <= *values[j]))
      candidate = j;
  }
  if (!candidate)
    throw std::domain_error("select_by_pseudo_tests: every model is infeasible");
  return detail::make_result(fit, std::move(values), *candidate);
}

/// Resolves the criterion (runs the adaptive constant when needed) and
/// returns the criterion values on `fit`.
inline std::vector<std::optional<double>> resolve_values(const CollectionFit& fit, const Criterion& criterion,
                                                         double* constant = nullptr,
                                                         AdaptiveTrace* trace = nullptr)
{
  if (criterion.kind != CriterionKind::adaptive) {
    if (constant)
      *constant = criterion.kind == CriterionKind::overpen ? criterion.c : 0.0;
    return penalized_values(fit, criterion);
  }
  auto t = adaptive_constant(fit, criterion.grid, criterion.base);
  if (constant)
    *constant = t.c_hat;
  auto values = penalized_values(fit, Criterion::overpen(t.c_hat, criterion.base));
  if (trace)
    *trace = std::move(t);
  return values;
}

inline SelectionResult select_argmin(const CollectionFit& fit, const Criterion& criterion,
                                     AdaptiveTrace* trace = nullptr)
{
  double constant = 0.0;
  auto r = select_argmin(fit, resolve_values(fit, criterion, &constant, trace));
  r.criterion = criterion_label(criterion);
  r.constant = constant;
  return r;
}

inline SelectionResult select_argmin(std::span<const HistogramModel> models, std::span<const double> samples,
                                     const Criterion& criterion, AdaptiveTrace* trace = nullptr)
{
  if (models.empty())
    throw std::domain_error("select_argmin: empty model collection");
  return select_argmin(fit_collection(models, samples), criterion, trace);
}

inline SelectionResult select_by_pseudo_tests(std::span<const HistogramModel> models, std::span<const double> samples,
                                              const Criterion& criterion)
{
  if (models.empty())
    throw std::domain_error("select_by_pseudo_tests: empty model collection");
  const auto fit = fit_collection(models, samples);
  double constant = 0.0;
  auto r = select_by_pseudo_tests(fit, resolve_values(fit, criterion, &constant));
  r.criterion = criterion_label(criterion);
  r.constant = constant;
  return r;
}

/// K(f*, f̂_m) = bias + p₁ for every model, with the argmin tie-break.
inline OracleResult oracle_model(std::span<const HistogramModel> models, std::span<const double> samples,
                                 const TargetDensity& target)
{
  if (models.empty())
    throw std::domain_error("oracle_model: empty model collection");
  const double entropy = entropy_term(target);
  OracleResult out;
  std::vector<int> dims;
  std::vector<std::optional<double>> values;
  for (const auto& m : models) {
    const auto report = risk_report(cell_probabilities(m, target), m, cell_counts(m, samples), samples.size(), entropy);
    out.kl_values.push_back(report.total_kl);
    dims.push_back(m.dim());
    values.emplace_back(report.total_kl);
  }
  out.oracle = *argmin_feasible(dims, values);
  return out;
}

} // namespace overpen
