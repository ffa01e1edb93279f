#include "overpen/criteria.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace overpen;

TEST(EpsilonTerms, Examples)
{
  const double l = std::log(101.0);
  const auto e = epsilon_terms(10, 100);
  EXPECT_NEAR(e.plus, std::sqrt(l / 10.0), 1e-15); // D = √n: first two terms tie
  EXPECT_NEAR(e.plus, 0.67935, 1e-5);
  EXPECT_NEAR(e.minus, e.plus, 1e-15);
  const auto one = epsilon_terms(1, 1);
  EXPECT_NEAR(one.plus, std::sqrt(std::log(2.0)), 1e-15);
  EXPECT_NEAR(one.plus, 0.8326, 1e-4);
  EXPECT_LT(epsilon_terms(4, 1000).plus, epsilon_terms(4, 10000).plus);
  EXPECT_THROW(epsilon_terms(0, 10), std::domain_error);
}

TEST(EpsilonTerms, ThirdTermDominatesOnlyForSmallD)
{
  // ln(n+1)/D exceeds √(ln(n+1)/D) iff D < ln(n+1)
  const auto e = epsilon_terms(2, 1000);
  EXPECT_NEAR(e.plus, std::log(1001.0) / 2.0, 1e-15);
  EXPECT_LT(e.minus, e.plus);
}

TEST(Penalty, Examples)
{
  EXPECT_NEAR(*penalty(Criterion::aic(), 5, 100), 0.05, 1e-15);
  EXPECT_NEAR(*penalty(Criterion::aicc(), 5, 100), 5.0 / 94.0, 1e-15);
  EXPECT_NEAR(*penalty(Criterion::aicc(), 5, 100), 0.0531915, 1e-7);
  EXPECT_NEAR(*penalty(Criterion::aic1(), 10, 100), (1.0 + std::sqrt(std::log(101.0) / 10.0)) * 0.1, 1e-15);
  EXPECT_NEAR(*penalty(Criterion::aic1(), 10, 100), 0.167935, 1e-6);
  EXPECT_NEAR(*penalty(Criterion::br(), 8, 100), std::pow(std::log(8.0), 2.5) / 100.0, 1e-15);
  EXPECT_NEAR(*penalty(Criterion::br(), 8, 100), 0.0623544, 1e-7);
  EXPECT_NEAR(*penalty(Criterion::br(BrVariant::classic), 8, 100), 0.08 + 0.0623544, 1e-7);
}

TEST(Penalty, Conventions)
{
  for (const auto& c : { Criterion::aic(), Criterion::aicc(), Criterion::br(), Criterion::aic1(),
                         Criterion::theta_delta(1.3, 0.4) })
    EXPECT_EQ(*penalty(c, 0, 50), 0.0);
  EXPECT_EQ(*penalty(Criterion::br(), 1, 50), 0.0);
  EXPECT_FALSE(penalty(Criterion::aicc(), 9, 10).has_value());
  EXPECT_FALSE(penalty(Criterion::aicc(), 12, 10).has_value());
  EXPECT_TRUE(penalty(Criterion::aicc(), 8, 10).has_value());
  EXPECT_THROW(penalty(Criterion::adaptive(), 3, 10), std::logic_error);
  EXPECT_THROW(penalty(Criterion::aic(), -1, 10), std::domain_error);
  // §5 literal reading: C ε⁺ D/n without the leading 1
  EXPECT_NEAR(*penalty(Criterion::aic1(OverpenBase::none), 10, 100), std::sqrt(std::log(101.0) / 10.0) * 0.1, 1e-15);
}

TEST(Penalty, OverpenFamilyRelations)
{
  for (std::size_t n : { 1, 7, 50, 100, 1000 }) {
    for (int d = 0; d <= 60; ++d) {
      const double aic = *penalty(Criterion::aic(), d, n);
      EXPECT_DOUBLE_EQ(*penalty(Criterion::overpen(0.0), d, n), aic);
      for (double c : { 0.0, 0.5, 1.0, 3.0 }) {
        const double op = *penalty(Criterion::overpen(c), d, n);
        EXPECT_GE(op, aic);
        if (c > 0 && d >= 1) {
          EXPECT_GT(op, aic);
        }
        EXPECT_DOUBLE_EQ(*penalty(Criterion::theta_delta(1.0, c), d, n), op);
      }
      for (const auto& c : { Criterion::aic(), Criterion::aicc(), Criterion::br(), Criterion::aic1() })
        if (auto p = penalty(c, d, n)) {
          EXPECT_GE(*p, 0.0);
        }
    }
  }
}

TEST(Penalty, AicAndAiccNondecreasingInD)
{
  for (std::size_t n : { 10, 100, 1000 }) {
    double prev_aic = -1, prev_aicc = -1;
    for (int d = 0; d + 1 < static_cast<int>(n); ++d) {
      const double a = *penalty(Criterion::aic(), d, n);
      const double c = *penalty(Criterion::aicc(), d, n);
      EXPECT_GE(a, prev_aic);
      EXPECT_GE(c, prev_aicc);
      prev_aic = a;
      prev_aicc = c;
    }
  }
}

TEST(ParseCriterion, Strings)
{
  EXPECT_EQ(parse_criterion("aic").kind, CriterionKind::aic);
  EXPECT_EQ(parse_criterion("aicc").kind, CriterionKind::aicc);
  EXPECT_EQ(parse_criterion("br").kind, CriterionKind::br);
  EXPECT_EQ(parse_criterion("adaptive").kind, CriterionKind::adaptive);
  const auto a1 = parse_criterion("aic1");
  EXPECT_EQ(a1.kind, CriterionKind::overpen);
  EXPECT_EQ(a1.c, 1.0);
  const auto op = parse_criterion("overpen:2.5");
  EXPECT_EQ(op.c, 2.5);
  const auto td = parse_criterion("thetadelta:1.2,0.3");
  EXPECT_EQ(td.theta, 1.2);
  EXPECT_EQ(td.delta, 0.3);
  for (const char* bad : { "aic2", "overpen:", "overpen:x", "overpen:-1", "thetadelta:1", "", "AIC" })
    EXPECT_THROW(parse_criterion(bad), std::invalid_argument) << bad;
}

TEST(CriterionLabel, AliasesShareALabel)
{
  EXPECT_EQ(criterion_label(parse_criterion("overpen:1.0")), "aic1");
  EXPECT_EQ(criterion_label(parse_criterion("aic1")), "aic1");
  EXPECT_EQ(criterion_label(parse_criterion("overpen:0.5")), "overpen:0.5");
  EXPECT_EQ(criterion_label(parse_criterion("thetadelta:1,2")), "thetadelta:1,2");
  for (const char* s : { "aic", "aicc", "br", "adaptive", "overpen:0.25", "thetadelta:1.5,0.5" })
    EXPECT_EQ(criterion_label(parse_criterion(criterion_label(parse_criterion(s)))), criterion_label(parse_criterion(s)));
}

TEST(CriterionValue, Examples)
{
  const auto one = build_regular_model({ 0, 1 }, 1);
  const std::vector<double> xs = { 0.1, 0.2, 0.3, 0.8 };
  for (const auto& c : { Criterion::aic(), Criterion::aicc(), Criterion::br(), Criterion::aic1() })
    EXPECT_EQ(*criterion_value(c, one, xs), 0.0);
  const auto two = build_regular_model({ 0, 1 }, 2);
  EXPECT_NEAR(*criterion_value(Criterion::aic(), two, xs), -(0.75 * std::log(1.5) + 0.25 * std::log(0.5)) + 0.25,
              1e-15);
  EXPECT_NEAR(*criterion_value(Criterion::aic(), two, xs), 0.119188, 1e-6);
  EXPECT_FALSE(criterion_value(Criterion::aicc(), build_regular_model({ 0, 1 }, 4), xs).has_value());
}

TEST(ArgminFeasible, TieBreaks)
{
  const std::vector<int> dims = { 0, 1, 2 };
  std::vector<std::optional<double>> v = { 0.5, 0.3, 0.4 };
  EXPECT_EQ(*argmin_feasible(dims, v), 1u);
  const std::vector<int> d2 = { 5, 2 };
  std::vector<std::optional<double>> tie = { 0.3, 0.3 };
  EXPECT_EQ(*argmin_feasible(d2, tie), 1u);
  std::vector<std::optional<double>> none = { std::nullopt, std::nullopt };
  EXPECT_FALSE(argmin_feasible(d2, none).has_value());
}
