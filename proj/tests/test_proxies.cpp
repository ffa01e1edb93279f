#include "overpen/proxies.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace overpen;

namespace {

HistogramDensity regular(Interval s, std::vector<double> h)
{
  const auto k = h.size();
  return HistogramDensity(build_regular_model(s, k), std::move(h));
}

} // namespace

TEST(VarianceProxies, UniformAgainstItself)
{
  const auto p = variance_proxies(find_density("uniform"), regular({ 0, 1 }, { 1.0, 1.0 }), 0.25);
  EXPECT_NEAR(p.v, 0.0, 1e-15);
  EXPECT_NEAR(p.w_r, 0.0, 1e-15);
}

TEST(VarianceProxies, TwoCellHandOracle)
{
  const auto f = regular({ 0, 1 }, { 1.5, 0.5 });
  const double l15 = std::log(1.5), l05 = std::log(0.5);
  const auto p = variance_proxies(find_density("uniform"), f, 1.0);
  // (f ∨ f*) cellwise: 1.5 and 1
  EXPECT_NEAR(p.v, 0.5 * 1.5 * l15 * l15 + 0.5 * 1.0 * l05 * l05, 1e-12);
  EXPECT_NEAR(p.v, 0.363528, 1e-6);
  // (f*^(r+1)/f^r ∨ f*) with r=1: max(1/1.5, 1) = 1 and max(1/0.5, 1) = 2
  EXPECT_NEAR(p.w_r, 0.5 * 1.0 * l15 * l15 + 0.5 * 2.0 * l05 * l05, 1e-12);
}

TEST(VarianceProxies, BetaAgainstUniformIsFinitePositive)
{
  const auto p = variance_proxies(find_density("beta22"), regular({ 0, 1 }, { 1.0 }), 0.25);
  EXPECT_TRUE(std::isfinite(p.v));
  EXPECT_TRUE(std::isfinite(p.w_r));
  EXPECT_GT(p.v, 0.0);
  EXPECT_GT(p.w_r, 0.0);
  EXPECT_THROW(variance_proxies(find_density("uniform"), regular({ 0, 1 }, { 2.0, 0.0 }), 0.25), std::domain_error);
  EXPECT_THROW(variance_proxies(find_density("uniform"), regular({ 0, 1 }, { 1.0 }), 0.0), std::domain_error);
}

TEST(RatioMoment, HandOracle)
{
  // ∫ f*^(r+1)/f^r for uniform f* and f = (1.5, 0.5): 0.5 (1.5^-r + 0.5^-r)
  const double r = 0.25;
  EXPECT_NEAR(ratio_moment(find_density("uniform"), regular({ 0, 1 }, { 1.5, 0.5 }), r),
              0.5 * (std::pow(1.5, -r) + std::pow(0.5, -r)), 1e-12);
  EXPECT_NEAR(ratio_moment(find_density("uniform"), regular({ 0, 1 }, { 1.0 }), r), 1.0, 1e-14);
}

TEST(KlQuadrature, MatchesCellwiseFormula)
{
  for (const auto& target : density_catalog()) {
    SCOPED_TRACE(target.id());
    for (std::size_t k : { 1, 2, 5, 12 }) {
      const auto f = project_target(build_regular_model(target.support(), k), target);
      EXPECT_NEAR(kl_target_to_histogram_quadrature(target, f), kl_target_to_histogram(target, f), 1e-8);
    }
  }
  EXPECT_TRUE(std::isinf(kl_target_to_histogram_quadrature(find_density("uniform"), regular({ 0, 1 }, { 2.0, 0.0 }))));
}
