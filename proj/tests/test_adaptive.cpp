#include "overpen/adaptive.hpp"
#include "overpen/densities.hpp"
#include "overpen/selection.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace overpen;

namespace {

CollectionFit synthetic(std::size_t n, int max_dim, const std::function<double(int)>& risk)
{
  CollectionFit fit;
  fit.n = n;
  for (int d = 0; d <= max_dim; ++d) {
    fit.dims.push_back(d);
    fit.emp_risks.push_back(risk(d));
  }
  return fit;
}

CollectionFit random_fit(std::uint64_t seed)
{
  const CounterStream s(seed);
  const std::size_t n = 50 + static_cast<std::size_t>(s.uniform(0) * 400);
  const int max_dim = 4 + static_cast<int>(s.uniform(1) * 30);
  return synthetic(n, max_dim, [&](int d) {
    // decreasing fit term plus noise, roughly the shape of -log-likelihoods
    return -0.5 * std::log1p(d) / std::sqrt(static_cast<double>(n)) - d / static_cast<double>(n) +
           0.02 * (s.uniform(10 + d) - 0.5);
  });
}

} // namespace

TEST(Adaptive, PerfectLineGivesZeroConstant)
{
  // -risk = D/n + c exactly
  const auto fit = synthetic(200, 30, [](int d) { return -(d / 200.0 + 0.37); });
  const auto t = adaptive_constant(fit, AlphaGrid::standard());
  EXPECT_NEAR(t.c_hat, 0.0, 1e-12);
  for (double v : t.deltas)
    if (!std::isnan(v)) {
      EXPECT_NEAR(v, 0.0, 1e-12);
    }
  EXPECT_NEAR(t.intercept_hat, 0.37, 1e-12);
}

TEST(Adaptive, ShiftInvariance)
{
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto fit = random_fit(seed);
    const auto base = adaptive_constant(fit, AlphaGrid::standard());
    for (auto& r : fit.emp_risks)
      r += 0.8125; // exactly representable: no rounding in the shift
    const auto shifted = adaptive_constant(fit, AlphaGrid::standard());
    EXPECT_NEAR(shifted.c_hat, base.c_hat, 1e-9 * std::max(1.0, base.c_hat));
    EXPECT_EQ(shifted.selected_per_alpha, base.selected_per_alpha);
    for (std::size_t i = 0; i < base.deltas.size(); ++i)
      if (!std::isnan(base.deltas[i])) {
        EXPECT_NEAR(shifted.deltas[i], base.deltas[i], 1e-12);
      }
  }
}

TEST(Adaptive, PlateauInvariants)
{
  for (std::uint64_t seed = 100; seed < 400; ++seed) {
    const auto fit = random_fit(seed);
    const auto t = adaptive_constant(fit, AlphaGrid::standard());
    const auto& sel = t.selected_per_alpha;
    ASSERT_EQ(sel.size(), t.alpha_grid.size());
    ASSERT_LT(t.plateau_begin, t.plateau_end);
    for (std::size_t i = t.plateau_begin; i < t.plateau_end; ++i)
      EXPECT_EQ(sel[i], sel[t.plateau_begin]);
    // maximal
    if (t.plateau_begin > 0) {
      EXPECT_NE(sel[t.plateau_begin - 1], sel[t.plateau_begin]);
    }
    if (t.plateau_end < sel.size()) {
      EXPECT_NE(sel[t.plateau_end], sel[t.plateau_begin]);
    }
    // longest, earliest on ties
    const std::size_t len = t.plateau_end - t.plateau_begin;
    for (std::size_t i = 0; i < sel.size();) {
      std::size_t j = i;
      while (j < sel.size() && sel[j] == sel[i])
        ++j;
      if (i < t.plateau_begin)
        EXPECT_LT(j - i, len);
      else
        EXPECT_LE(j - i, len);
      i = j;
    }
    EXPECT_DOUBLE_EQ(t.c_hat, median_of({ t.c_hat_alpha.begin() + t.plateau_begin,
                                          t.c_hat_alpha.begin() + t.plateau_end }));
    for (double c : t.c_hat_alpha)
      EXPECT_GE(c, 0.0);
  }
}

TEST(Adaptive, PairPlateauTakesMedianOfThePair)
{
  // Three proportions; find a collection where the first two agree and the
  // third differs. Ĉ must then be the midpoint of the first two Ĉ_α.
  AlphaGrid grid{ { 0.3, 0.6, 0.9 } };
  bool found = false;
  for (std::uint64_t seed = 0; seed < 5000 && !found; ++seed) {
    const auto fit = random_fit(seed);
    const auto t = adaptive_constant(fit, grid);
    const auto& s = t.selected_per_alpha;
    if (s[0] == s[1] && s[1] != s[2]) {
      found = true;
      EXPECT_EQ(t.plateau_begin, 0u);
      EXPECT_EQ(t.plateau_end, 2u);
      EXPECT_DOUBLE_EQ(t.c_hat, 0.5 * (t.c_hat_alpha[0] + t.c_hat_alpha[1]));
    }
  }
  EXPECT_TRUE(found);
}

TEST(Adaptive, MedianConventions)
{
  EXPECT_EQ(median_of({}), 0.0);
  EXPECT_EQ(median_of({ 3.0 }), 3.0);
  EXPECT_EQ(median_of({ 4.0, 1.0 }), 2.5);
  EXPECT_EQ(median_of({ 5.0, 1.0, 3.0 }), 3.0);
}

TEST(Adaptive, RejectsDegenerateInput)
{
  EXPECT_THROW(adaptive_constant(synthetic(100, 1, [](int) { return 0.0; }), AlphaGrid::standard()),
               std::domain_error);
  CollectionFit same{ 100, { 3, 3, 3 }, { 0.1, 0.2, 0.3 } };
  EXPECT_THROW(adaptive_constant(same, AlphaGrid::standard()), std::domain_error);
  const auto ok = synthetic(100, 10, [](int d) { return -d / 90.0; });
  EXPECT_THROW(adaptive_constant(ok, AlphaGrid{ { 0.5 } }), std::domain_error);
  EXPECT_THROW(adaptive_constant(ok, AlphaGrid{ { 0.5, 0.4 } }), std::domain_error);
  EXPECT_THROW(adaptive_constant(ok, AlphaGrid{ { 0.0, 0.4 } }), std::domain_error);
  EXPECT_NO_THROW(adaptive_constant(ok, AlphaGrid{ { 0.5, 1.0 } }));
}

TEST(Adaptive, GoldenUniform200)
{
  // uniform target, n = 200, regular models with 1..40 cells, sample seed 2024.
  const auto& target = find_density("uniform");
  const auto xs = draw_samples(target, 2024, 200);
  const auto models = regular_model_grid(target.support(), 200, 40);
  ASSERT_EQ(models.size(), 40u);
  const auto t = adaptive_constant(models, xs, AlphaGrid::standard());
  const auto again = adaptive_constant(models, xs, AlphaGrid::standard());
  EXPECT_EQ(t.c_hat, again.c_hat);
  EXPECT_DOUBLE_EQ(t.c_hat, 0x1.93ea26e28016cp-9);
  EXPECT_EQ(t.selected_dim_per_alpha[t.plateau_begin], 3);
}
