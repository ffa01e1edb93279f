#include "overpen/densities.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace overpen;

namespace {

// Independent oracle: plain composite Simpson on a subinterval kept away
// from singular endpoints.
template <class F>
double simpson(F f, double a, double b, int panels = 20000)
{
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i)
    s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

} // namespace

TEST(Catalog, IdsAndLookup)
{
  std::vector<std::string> ids;
  for (const auto& d : density_catalog())
    ids.push_back(d.id());
  EXPECT_EQ(ids, (std::vector<std::string>{ "uniform", "triangle", "beta22", "bilog_peak", "inf_peak", "tilted" }));
  EXPECT_EQ(find_density("beta22").id(), "beta22");
  EXPECT_THROW(find_density("nope"), std::invalid_argument);
  EXPECT_EQ(find_density("triangle").support(), (Interval{ -1.0, 1.0 }));
}

TEST(PdfAt, Examples)
{
  EXPECT_DOUBLE_EQ(pdf_at(find_density("beta22"), 0.5), 1.5);
  EXPECT_DOUBLE_EQ(pdf_at(find_density("triangle"), 0.0), 1.0);
  EXPECT_DOUBLE_EQ(pdf_at(find_density("tilted"), 0.0), 0.5);
  EXPECT_THROW(pdf_at(find_density("uniform"), 1.5), std::domain_error);
}

TEST(CellProbability, Examples)
{
  EXPECT_NEAR(cell_probability(find_density("uniform"), 0.0, 0.5), 0.5, 1e-15);
  EXPECT_NEAR(cell_probability(find_density("beta22"), 0.0, 0.5), 0.5, 1e-15);
  EXPECT_NEAR(cell_probability(find_density("triangle"), -1.0, 0.5), 0.875, 1e-15);
  EXPECT_THROW(cell_probability(find_density("uniform"), 0.5, 0.2), std::domain_error);
  EXPECT_THROW(cell_probability(find_density("uniform"), -0.5, 0.2), std::domain_error);
}

TEST(Densities, MassAndCdfConsistency)
{
  for (const auto& d : density_catalog()) {
    SCOPED_TRACE(d.id());
    const auto s = d.support();
    auto total = integrate_functional(d, s.lo, s.hi, [](double f) { return f; });
    EXPECT_NEAR(total.value, 1.0, 1e-8);
    EXPECT_EQ(d.cdf(s.lo), 0.0);
    EXPECT_EQ(d.cdf(s.hi), 1.0);

    const CounterStream pick(split_seed(11, d.id()));
    double prev = 0.0;
    for (int i = 0; i <= 200; ++i) {
      const double c = d.cdf(s.lo + s.length() * i / 200.0);
      EXPECT_GE(c, prev);
      prev = c;
    }
    for (int k = 0; k < 20; ++k) {
      double x = s.lo + s.length() * pick.uniform(2 * k);
      double y = s.lo + s.length() * pick.uniform(2 * k + 1);
      if (x > y)
        std::swap(x, y);
      auto r = integrate_functional(d, x, y, [](double f) { return f; });
      EXPECT_NEAR(d.cdf(y) - d.cdf(x), r.value, 1e-8);
      EXPECT_GE(d.pdf(0.5 * (x + y)), 0.0);
    }
  }
}

TEST(Densities, QuantileInvertsCdf)
{
  for (const auto& d : density_catalog()) {
    SCOPED_TRACE(d.id());
    for (double u : { 1e-6, 0.01, 0.2, 0.5, 0.77, 0.999 })
      EXPECT_NEAR(d.cdf(d.quantile(u)), u, 1e-10);
  }
}

TEST(DrawSamples, DeterministicAndPrefixStable)
{
  for (const auto& d : density_catalog()) {
    const auto a = draw_samples(d, 99, 4);
    const auto b = draw_samples(d, 99, 10);
    EXPECT_EQ(a, draw_samples(d, 99, 4));
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
    for (double x : b)
      EXPECT_TRUE(d.support().contains(x));
  }
}

TEST(DrawSamples, Beta22Mean)
{
  const auto xs = draw_samples(find_density("beta22"), 2024, 100000);
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  EXPECT_NEAR(mean, 0.5, 0.005);
}

TEST(DrawSamples, KolmogorovSmirnov)
{
  // 1.63/√n is the 1% critical value; the extra factor keeps the test robust.
  const std::size_t n = 10000;
  for (const auto& d : density_catalog()) {
    SCOPED_TRACE(d.id());
    auto xs = draw_samples(d, 5, n);
    std::sort(xs.begin(), xs.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = d.cdf(xs[i]);
      ks = std::max({ ks, std::abs(c - static_cast<double>(i) / n), std::abs(c - static_cast<double>(i + 1) / n) });
    }
    EXPECT_LT(ks, 1.5 * 1.63 / std::sqrt(static_cast<double>(n)));
  }
}

TEST(EntropyTerm, ClosedForms)
{
  EXPECT_NEAR(entropy_term(find_density("uniform")), 0.0, 1e-14);
  // -h(Beta(2,2)) = -(ln B(2,2) - 2(ψ(2) - ψ(4))) with B(2,2) = 1/6, ψ(4) - ψ(2) = 1/2 + 1/3.
  const double beta = -(std::log(1.0 / 6.0) + 2.0 * (1.0 / 2.0 + 1.0 / 3.0));
  EXPECT_NEAR(entropy_term(find_density("beta22")), beta, 1e-9);
  EXPECT_NEAR(entropy_term(find_density("beta22")), 0.1250928, 1e-7);
  // 2∫₀¹ s ln s ds = -1/2.
  EXPECT_NEAR(entropy_term(find_density("triangle")), -0.5, 1e-9);
  // tilted: ∫ (0.5+x) ln(0.5+x) = [y² ln y / 2 - y²/4] from 0.5 to 1.5
  auto prim = [](double y) { return y * y * std::log(y) / 2.0 - y * y / 4.0; };
  EXPECT_NEAR(entropy_term(find_density("tilted")), prim(1.5) - prim(0.5), 1e-9);
  // inf_peak: ∫ 1/(2√x) ln(1/(2√x)) dx = -ln 2 + 1
  EXPECT_NEAR(entropy_term(find_density("inf_peak")), 1.0 - std::log(2.0), 1e-8);
}

TEST(EntropyTerm, BilogAgainstSimpson)
{
  const auto& d = find_density("bilog_peak");
  // Simpson away from the edges plus the edge contribution via substitution x = e^{-t}.
  const double eps = 1e-2;
  const double inner = simpson([&](double x) { const double f = d.pdf(x); return f * std::log(f); }, eps, 1.0 - eps);
  const double edge = simpson(
    [&](double t) {
      const double x = std::exp(-t);
      const double f = d.pdf(x);
      return f * std::log(f) * x;
    },
    -std::log(eps), 60.0, 200000);
  EXPECT_NEAR(entropy_term(d), inner + 2.0 * edge, 1e-6);
}

TEST(MomentConstants, Examples)
{
  const auto u = moment_constants(find_density("uniform"), 1.5);
  EXPECT_NEAR(u.J, 1.0, 1e-12);
  EXPECT_NEAR(u.Q, 1.0, 1e-12);
  const auto b = moment_constants(find_density("beta22"), 1.5);
  EXPECT_TRUE(b.j_finite);
  EXPECT_TRUE(b.q_finite);
  EXPECT_GE(b.J, 1.0);
  EXPECT_GE(b.Q, 1.0);
  const auto b3 = moment_constants(find_density("beta22"), 3.0);
  EXPECT_FALSE(b3.q_finite);
  EXPECT_TRUE(std::isinf(b3.Q));
  EXPECT_THROW(moment_constants(find_density("uniform"), 1.0), std::domain_error);
}

TEST(MomentConstants, AtLeastOneOnUnitSupports)
{
  for (const auto& d : density_catalog()) {
    if (d.support().length() != 1.0)
      continue;
    SCOPED_TRACE(d.id());
    const auto mc = moment_constants(d, 1.5);
    if (mc.j_finite) {
      EXPECT_GE(mc.J, 1.0 - 1e-9);
    }
    if (mc.q_finite) {
      EXPECT_GE(mc.Q, 1.0 - 1e-9);
    }
  }
}
