#pragma once

// Data-driven over-penalization constant Ĉ (the AIC_a procedure).
//
// For each proportion α the ⌈α|M|⌉ largest models give a line y = D/n + â
// through the points (D_m, -P_n γ(f̂_m)); normalized residuals Ĉ_m yield a
// candidate Ĉ_α. Selecting with OverPen(Ĉ_α) along the grid, Ĉ is the
// median of Ĉ_α over the longest run of α picking the same model.

#include "overpen/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

namespace overpen {

struct AdaptiveTrace
{
  /// Line fit for the largest α of the grid.
  double intercept_hat = 0.0;
  std::vector<double> deltas;   ///< Δ_m, NaN outside M_α
  std::vector<double> c_hat_m;  ///< |Ĉ_m|, NaN outside M_α or at D = 0
  std::vector<double> alpha_grid;
  std::vector<double> intercept_per_alpha;
  std::vector<double> c_hat_alpha;
  std::vector<std::size_t> selected_per_alpha;
  std::vector<int> selected_dim_per_alpha;
  std::size_t plateau_begin = 0; ///< first index of the plateau in alpha_grid
  std::size_t plateau_end = 0;   ///< one past the last index
  double c_hat = 0.0;
};

/// Median with the midpoint convention for even sizes. Empty input gives 0.
inline double median_of(std::vector<double> values)
{
  if (values.empty())
    return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t k = values.size();
  return k % 2 == 1 ? values[k / 2] : 0.5 * (values[k / 2 - 1] + values[k / 2]);
}

inline AdaptiveTrace adaptive_constant(const CollectionFit& fit, const AlphaGrid& grid,
                                       OverpenBase base = OverpenBase::one)
{
  const std::size_t count = fit.dims.size();
  const std::set<int> distinct(fit.dims.begin(), fit.dims.end());
  if (distinct.size() == 1 && count > 0)
    throw std::domain_error("adaptive_constant: degenerate collection, every model has the same dimension");
  if (distinct.size() < 3)
    throw std::domain_error("adaptive_constant: needs at least three models of distinct dimensions");
  if (grid.alphas.size() < 2)
    throw std::domain_error("adaptive_constant: proportion grid needs at least two values");
  for (std::size_t i = 0; i < grid.alphas.size(); ++i) {
    const double a = grid.alphas[i];
    if (!(a > 0.0 && a <= 1.0) || (i > 0 && !(a > grid.alphas[i - 1])))
      throw std::domain_error("adaptive_constant: proportions must increase strictly within (0, 1]");
  }

  const double n = static_cast<double>(fit.n);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  // Models by decreasing dimension; equal dimensions keep index order.
  std::vector<std::size_t> by_dim(count);
  std::iota(by_dim.begin(), by_dim.end(), std::size_t{ 0 });
  std::stable_sort(by_dim.begin(), by_dim.end(), [&](std::size_t a, std::size_t b) { return fit.dims[a] > fit.dims[b]; });

  AdaptiveTrace trace;
  trace.alpha_grid = grid.alphas;

  for (double alpha : grid.alphas) {
    const auto take = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(count) - 1e-9)), 1, count);

    double intercept = 0.0;
    for (std::size_t k = 0; k < take; ++k) {
      const auto m = by_dim[k];
      intercept += -fit.emp_risks[m] - fit.dims[m] / n;
    }
    intercept /= static_cast<double>(take);

    std::vector<double> deltas(count, nan), c_m(count, nan), ratios;
    for (std::size_t k = 0; k < take; ++k) {
      const auto m = by_dim[k];
      const double d = fit.dims[m];
      deltas[m] = std::abs(-fit.emp_risks[m] - (d / n + intercept));
      if (fit.dims[m] >= 1) {
        c_m[m] = std::abs(deltas[m] / (std::max(std::sqrt(d / n), std::sqrt(1.0 / d)) * d / 2.0));
        ratios.push_back(c_m[m]);
      }
    }
    const double c_alpha = median_of(std::move(ratios));

    auto values = penalized_values(fit, Criterion::overpen(c_alpha, base));
    const auto chosen = argmin_feasible(fit.dims, values);
    if (!chosen)
      throw std::domain_error("adaptive_constant: no feasible model");

    trace.intercept_per_alpha.push_back(intercept);
    trace.c_hat_alpha.push_back(c_alpha);
    trace.selected_per_alpha.push_back(*chosen);
    trace.selected_dim_per_alpha.push_back(fit.dims[*chosen]);
    trace.intercept_hat = intercept;
    trace.deltas = std::move(deltas);
    trace.c_hat_m = std::move(c_m);
  }

  // Longest run of equal selections; the earliest one wins ties.
  std::size_t best_begin = 0, best_len = 0;
  for (std::size_t i = 0; i < trace.selected_per_alpha.size();) {
    std::size_t j = i;
    while (j < trace.selected_per_alpha.size() && trace.selected_per_alpha[j] == trace.selected_per_alpha[i])
      ++j;
    if (j - i > best_len) {
      best_begin = i;
      best_len = j - i;
    }
    i = j;
  }
  trace.plateau_begin = best_begin;
  trace.plateau_end = best_begin + best_len;
  trace.c_hat = median_of({ trace.c_hat_alpha.begin() + static_cast<std::ptrdiff_t>(trace.plateau_begin),
                            trace.c_hat_alpha.begin() + static_cast<std::ptrdiff_t>(trace.plateau_end) });
  return trace;
}

inline AdaptiveTrace adaptive_constant(std::span<const HistogramModel> models, std::span<const double> samples,
                                       const AlphaGrid& grid, OverpenBase base = OverpenBase::one)
{
  return adaptive_constant(fit_collection(models, samples), grid, base);
}

} // namespace overpen
