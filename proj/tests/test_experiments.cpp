#include "overpen/experiments.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace overpen;

namespace {

TrialRecord record(double kl, std::size_t trial = 0)
{
  TrialRecord r;
  r.density = "beta22";
  r.n = 50;
  r.criterion = "aic";
  r.trial = trial;
  r.selected_dim = 3;
  r.kl = kl;
  r.oracle_dim = 2;
  r.oracle_kl = 0.01;
  return r;
}

std::vector<TrialRecord> records_of(std::initializer_list<double> kls)
{
  std::vector<TrialRecord> out;
  std::size_t t = 0;
  for (double k : kls)
    out.push_back(record(k, t++));
  return out;
}

std::string slurp(const std::filesystem::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_config()
{
  ExperimentConfig c;
  c.densities = { "beta22", "triangle" };
  c.sample_sizes = { 50, 100 };
  c.trials = 6;
  c.criteria = { Criterion::aic(), Criterion::aic1(), Criterion::adaptive() };
  c.master_seed = 1;
  return c;
}

} // namespace

TEST(Aggregate, OrderStatisticQuantiles)
{
  const double inf = std::numeric_limits<double>::infinity();
  auto s = aggregate(records_of({ 4, 2, inf, 1, 3 }), { 50 });
  ASSERT_EQ(s.cells.size(), 1u);
  EXPECT_EQ(s.cells[0].quantiles[0], 3.0);
  EXPECT_EQ(s.cells[0].inf_count, 1u);
  EXPECT_DOUBLE_EQ(s.cells[0].mean_finite, 2.5);

  s = aggregate(records_of({ 0.7, 0.7, 0.7 }), { 5, 25, 50, 75, 95 });
  for (double q : s.cells[0].quantiles)
    EXPECT_EQ(q, 0.7);

  s = aggregate(records_of({ inf, inf, 1 }), { 5, 95 });
  EXPECT_EQ(s.cells[0].inf_count, 2u);
  EXPECT_EQ(s.cells[0].quantiles[0], 1.0);
  EXPECT_TRUE(std::isinf(s.cells[0].quantiles[1]));
}

TEST(Aggregate, FailedTrialsAreExcludedWithWarning)
{
  auto recs = records_of({ 1, 2, 3 });
  recs[1].selected_dim = -1;
  const auto s = aggregate(recs, { 50 });
  EXPECT_EQ(s.cells[0].trials, 2u);
  EXPECT_EQ(s.warnings.size(), 1u);
}

TEST(RunTrial, DeterministicAndPaired)
{
  const auto cfg = small_config();
  const auto a = run_trial(cfg, "beta22", 50, Criterion::aic(), 4);
  const auto b = run_trial(cfg, "beta22", 50, Criterion::aic(), 4);
  EXPECT_EQ(a, b);
  const auto c = run_trial(cfg, "beta22", 50, Criterion::aic1(), 4);
  EXPECT_EQ(a.seed, c.seed);
  EXPECT_EQ(a.oracle_dim, c.oracle_dim);
  EXPECT_EQ(a.seed, trial_seed(1, "beta22", 50, 4));
}

TEST(RunTrial, OneCellGridOnUniformHasZeroRisk)
{
  auto cfg = small_config();
  cfg.max_cells = 1;
  for (std::size_t t = 0; t < 5; ++t) {
    const auto r = run_trial(cfg, "uniform", 40, Criterion::aic(), t);
    EXPECT_EQ(r.kl, 0.0);
    EXPECT_EQ(r.selected_dim, 0);
  }
}

TEST(RunBenchmark, CountsOrderAndOracleDominance)
{
  ExperimentConfig one;
  one.densities = { "beta22" };
  one.sample_sizes = { 50 };
  one.trials = 3;
  one.criteria = { Criterion::aic() };
  EXPECT_EQ(run_benchmark(one).records.size(), 3u);

  const auto cfg = small_config();
  const auto res = run_benchmark(cfg);
  ASSERT_EQ(res.records.size(), 2u * 2u * 3u * 6u);
  for (std::size_t i = 0; i < res.records.size(); ++i) {
    const auto& r = res.records[i];
    EXPECT_EQ(r.trial, i % 6);
    if (std::isfinite(r.kl) && std::isfinite(r.oracle_kl)) {
      EXPECT_LE(r.oracle_kl, r.kl + 1e-12);
    }
  }
  EXPECT_EQ(res.summary.cells.size(), 12u);
}

TEST(RunBenchmark, CriterionOrderDoesNotChangeRecords)
{
  auto cfg = small_config();
  const auto a = run_benchmark(cfg).records;
  std::reverse(cfg.criteria.begin(), cfg.criteria.end());
  const auto b = run_benchmark(cfg).records;
  ASSERT_EQ(a.size(), b.size());
  for (const auto& r : a) {
    auto it = std::find_if(b.begin(), b.end(), [&](const TrialRecord& x) {
      return x.density == r.density && x.n == r.n && x.criterion == r.criterion && x.trial == r.trial;
    });
    ASSERT_NE(it, b.end());
    EXPECT_EQ(*it, r);
  }
}

TEST(RunBenchmark, ThreadCountDoesNotChangeOutput)
{
  auto cfg = small_config();
  const auto a = run_benchmark(cfg).records;
  cfg.threads = 3;
  EXPECT_EQ(run_benchmark(cfg).records, a);
}

TEST(RunBenchmark, Validation)
{
  auto cfg = small_config();
  cfg.densities = { "nope" };
  EXPECT_THROW(run_benchmark(cfg), std::invalid_argument);
  cfg = small_config();
  cfg.trials = 0;
  EXPECT_THROW(run_benchmark(cfg), std::invalid_argument);
}

TEST(Persistence, RealFormatting)
{
  EXPECT_EQ(format_real(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(parse_real(format_real(0.1)), 0.1);
  EXPECT_TRUE(std::isinf(parse_real("inf")));
  EXPECT_EQ(level_column(5), "q05");
  EXPECT_EQ(level_column(95), "q95");
}

TEST(Persistence, WriteAndReadBack)
{
  const auto dir = std::filesystem::temp_directory_path() / "overpen_test_records";
  std::filesystem::remove_all(dir);
  auto recs = records_of({ 0.25, std::numeric_limits<double>::infinity(), 1.0 / 3.0 });
  recs[2].criterion = "thetadelta:1,2"; // quoted on output
  const auto summary = aggregate(recs, { 5, 25, 50, 75, 95 });
  write_records(recs, summary, dir);

  std::ifstream in(dir / "trials.csv");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line))
    ++lines;
  EXPECT_EQ(lines, 4u);
  EXPECT_EQ(read_trials_csv(dir / "trials.csv"), recs);

  std::ifstream sin(dir / "summary.csv");
  std::getline(sin, line);
  EXPECT_EQ(line, "density,n,criterion,q05,q25,q50,q75,q95,inf_count,mean_finite,trials");
  lines = 0;
  while (std::getline(sin, line))
    ++lines;
  EXPECT_EQ(lines, 2u);
  EXPECT_EQ(split_csv_line("a,\"x,\"\"y\",c"), (std::vector<std::string>{ "a", "x,\"y", "c" }));
  EXPECT_TRUE(nlohmann::json::parse(slurp(dir / "summary.json")).is_object());
  std::filesystem::remove_all(dir);
}

TEST(Persistence, BenchmarkRoundTrip)
{
  const auto dir = std::filesystem::temp_directory_path() / "overpen_test_bench";
  std::filesystem::remove_all(dir);
  auto cfg = small_config();
  cfg.trials = 3;
  const auto res = run_benchmark(cfg);
  write_records(res.records, res.summary, dir);
  EXPECT_EQ(read_trials_csv(dir / "trials.csv"), res.records);
  const auto first = slurp(dir / "trials.csv");
  write_records(run_benchmark(cfg).records, res.summary, dir);
  EXPECT_EQ(slurp(dir / "trials.csv"), first);
  std::filesystem::remove_all(dir);
}
