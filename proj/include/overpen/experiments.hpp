#pragma once

// Seeded Monte Carlo benchmark of selection criteria: trials over
// densities × sample sizes, KL aggregation and flat-file persistence.

#include "overpen/densities.hpp"
#include "overpen/random.hpp"
#include "overpen/selection.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

namespace overpen {

struct ExperimentConfig
{
  std::vector<std::string> densities = { "triangle", "bilog_peak", "beta22", "inf_peak" };
  std::vector<std::size_t> sample_sizes = { 50, 100, 200, 500, 1000 };
  std::size_t trials = 100;
  std::vector<Criterion> criteria = { Criterion::aic(), Criterion::aicc(), Criterion::br(), Criterion::aic1(),
                                      Criterion::adaptive() };
  /// Largest cell count of the regular grid; default max(2, ⌊n/ln(n+1)⌋).
  std::optional<std::size_t> max_cells;
  std::uint64_t master_seed = 1;
  /// Percent levels, strictly increasing in (0, 100).
  std::vector<double> quantiles = { 5, 25, 50, 75, 95 };
  unsigned threads = 1;
  bool record_runtime = false;

  void validate() const
  {
    if (trials < 1)
      throw std::invalid_argument("trials must be at least 1");
    if (densities.empty() || sample_sizes.empty() || criteria.empty())
      throw std::invalid_argument("densities, sample sizes and criteria must be non-empty");
    for (auto n : sample_sizes)
      if (n < 1)
        throw std::invalid_argument("sample sizes must be at least 1");
    for (const auto& id : densities)
      (void)find_density(id);
    for (std::size_t i = 0; i < quantiles.size(); ++i)
      if (!(quantiles[i] > 0.0 && quantiles[i] < 100.0) || (i > 0 && !(quantiles[i] > quantiles[i - 1])))
        throw std::invalid_argument("quantile levels must increase strictly within (0, 100)");
  }
};

struct TrialRecord
{
  std::string density;
  std::size_t n = 0;
  std::string criterion;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  int selected_dim = -1;
  double kl = std::numeric_limits<double>::quiet_NaN();
  int oracle_dim = -1;
  double oracle_kl = std::numeric_limits<double>::quiet_NaN();
  double runtime_ms = 0.0;

  bool failed() const { return selected_dim < 0; }
  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

struct SummaryCell
{
  std::string density;
  std::size_t n = 0;
  std::string criterion;
  std::vector<double> quantiles;
  std::size_t inf_count = 0;
  double mean_finite = std::numeric_limits<double>::quiet_NaN();
  std::size_t trials = 0;
};

struct ExperimentSummary
{
  std::vector<double> levels;
  std::vector<SummaryCell> cells;
  std::vector<std::string> warnings;
};

/// Per-trial seed from (master seed, density id, n, trial index). Criteria
/// are not part of the key, so every criterion sees the same sample.
inline std::uint64_t trial_seed(std::uint64_t master, const std::string& density, std::size_t n, std::size_t trial)
{
  return split_seed(split_seed(split_seed(master, density), static_cast<std::uint64_t>(n)),
                    static_cast<std::uint64_t>(trial));
}

namespace detail {

/// Everything about a (density, n) cell that does not depend on the sample.
struct BenchmarkCell
{
  const TargetDensity* target = nullptr;
  std::size_t n = 0;
  std::vector<HistogramModel> models;
  std::vector<std::vector<double>> probs;
  double entropy = 0.0;

  BenchmarkCell(const TargetDensity& t, std::size_t size, std::optional<std::size_t> max_cells)
    : target(&t), n(size), models(regular_model_grid(t.support(), size, max_cells)), entropy(entropy_term(t))
  {
    for (const auto& m : models)
      probs.push_back(cell_probabilities(m, t));
  }
};

inline std::vector<TrialRecord> evaluate_trial(const BenchmarkCell& cell, std::uint64_t master_seed,
                                               std::size_t trial, std::span<const Criterion> criteria,
                                               bool record_runtime)
{
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const auto seed = trial_seed(master_seed, cell.target->id(), cell.n, trial);
  const auto samples = draw_samples(*cell.target, seed, cell.n);

  CollectionFit fit;
  fit.n = cell.n;
  std::vector<double> kl(cell.models.size());
  std::vector<std::optional<double>> kl_values(cell.models.size());
  for (std::size_t i = 0; i < cell.models.size(); ++i) {
    const auto& m = cell.models[i];
    const auto counts = cell_counts(m, samples);
    const auto report = risk_report(cell.probs[i], m, counts, cell.n, cell.entropy);
    fit.dims.push_back(m.dim());
    fit.emp_risks.push_back(report.emp_risk);
    kl[i] = report.total_kl;
    kl_values[i] = report.total_kl;
  }
  const auto oracle = *argmin_feasible(fit.dims, kl_values);
  const double shared_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();

  std::vector<TrialRecord> out;
  for (const auto& c : criteria) {
    const auto t1 = clock::now();
    TrialRecord r;
    r.density = cell.target->id();
    r.n = cell.n;
    r.criterion = criterion_label(c);
    r.trial = trial;
    r.seed = seed;
    r.oracle_dim = fit.dims[oracle];
    r.oracle_kl = kl[oracle];
    try {
      const auto sel = select_argmin(fit, c);
      r.selected_dim = sel.selected_dim;
      r.kl = kl[sel.selected];
    } catch (const std::exception&) {
      r.selected_dim = -1;
    }
    if (record_runtime)
      r.runtime_ms = shared_ms + std::chrono::duration<double, std::milli>(clock::now() - t1).count();
    out.push_back(std::move(r));
  }
  return out;
}

} // namespace detail

/// One trial of one criterion.
inline TrialRecord run_trial(const ExperimentConfig& config, const std::string& density, std::size_t n,
                             const Criterion& criterion, std::size_t trial_index)
{
  const detail::BenchmarkCell cell(find_density(density), n, config.max_cells);
  const Criterion one[] = { criterion };
  return detail::evaluate_trial(cell, config.master_seed, trial_index, one, config.record_runtime).front();
}

struct BenchmarkResult
{
  std::vector<TrialRecord> records;
  ExperimentSummary summary;
};

inline ExperimentSummary aggregate(const std::vector<TrialRecord>& records, const std::vector<double>& levels);

/// Full sweep. Records come out ordered by (density, n, criterion, trial) in
/// configuration order, independent of the thread count.
inline BenchmarkResult run_benchmark(const ExperimentConfig& config,
                                     const std::function<void(const std::string&)>& progress = {})
{
  config.validate();
  std::vector<detail::BenchmarkCell> cells;
  for (const auto& id : config.densities)
    for (auto n : config.sample_sizes)
      cells.emplace_back(find_density(id), n, config.max_cells);

  const std::size_t units = cells.size() * config.trials;
  std::vector<std::vector<TrialRecord>> results(units);
  std::atomic<std::size_t> next{ 0 };
  std::atomic<std::size_t> done{ 0 };
  std::mutex progress_mutex;

  auto worker = [&] {
    for (std::size_t u = next++; u < units; u = next++) {
      const auto& cell = cells[u / config.trials];
      results[u] = detail::evaluate_trial(cell, config.master_seed, u % config.trials, config.criteria,
                                          config.record_runtime);
      const auto finished = ++done;
      if (progress && (finished % config.trials == 0 || finished == units)) {
        std::lock_guard lock(progress_mutex);
        progress("benchmark: " + std::to_string(finished) + "/" + std::to_string(units) + " trial units");
      }
    }
  };

  const unsigned threads = std::max(1u, config.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back(worker);
    for (auto& th : pool)
      th.join();
  }

  BenchmarkResult out;
  for (std::size_t c = 0; c < cells.size(); ++c)
    for (std::size_t k = 0; k < config.criteria.size(); ++k)
      for (std::size_t t = 0; t < config.trials; ++t)
        out.records.push_back(results[c * config.trials + t][k]);
  out.summary = aggregate(out.records, config.quantiles);
  return out;
}

/// Order-statistic quantile at percent level `pct` of a sorted list (+∞ last):
/// the value at index ⌈q N⌉ - 1.
inline double order_statistic_quantile(const std::vector<double>& sorted, double pct)
{
  if (sorted.empty())
    throw std::domain_error("quantile of an empty list");
  const double pos = std::ceil(pct / 100.0 * static_cast<double>(sorted.size()) - 1e-9);
  const auto idx = static_cast<std::size_t>(std::clamp(pos, 1.0, static_cast<double>(sorted.size()))) - 1;
  return sorted[idx];
}

inline ExperimentSummary aggregate(const std::vector<TrialRecord>& records, const std::vector<double>& levels)
{
  ExperimentSummary summary;
  summary.levels = levels;
  std::vector<std::tuple<std::string, std::size_t, std::string>> order;
  std::map<std::tuple<std::string, std::size_t, std::string>, std::vector<const TrialRecord*>> groups;
  for (const auto& r : records) {
    auto key = std::make_tuple(r.density, r.n, r.criterion);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted)
      order.push_back(key);
    it->second.push_back(&r);
  }
  for (const auto& key : order) {
    const auto& group = groups[key];
    std::vector<double> kls;
    for (const auto* r : group)
      if (!r->failed())
        kls.push_back(r->kl);
    const auto& [density, n, criterion] = key;
    if (kls.empty()) {
      summary.warnings.push_back("no successful trials for " + density + " n=" + std::to_string(n) + " " + criterion);
      continue;
    }
    std::sort(kls.begin(), kls.end());
    SummaryCell cell{ density, n, criterion };
    for (double q : levels)
      cell.quantiles.push_back(order_statistic_quantile(kls, q));
    double sum = 0.0;
    std::size_t finite = 0;
    for (double v : kls) {
      if (std::isinf(v)) {
        ++cell.inf_count;
      } else {
        sum += v;
        ++finite;
      }
    }
    if (finite > 0)
      cell.mean_finite = sum / static_cast<double>(finite);
    cell.trials = kls.size();
    if (kls.size() < group.size())
      summary.warnings.push_back(std::to_string(group.size() - kls.size()) + " failed trials for " + density +
                                 " n=" + std::to_string(n) + " " + criterion);
    summary.cells.push_back(std::move(cell));
  }
  return summary;
}

// ---------------------------------------------------------------------------
// Persistence

inline std::string format_real(double x)
{
  if (std::isnan(x))
    return "nan";
  if (std::isinf(x))
    return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline double parse_real(const std::string& s)
{
  if (s == "inf")
    return std::numeric_limits<double>::infinity();
  if (s == "-inf")
    return -std::numeric_limits<double>::infinity();
  if (s == "nan")
    return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size())
    throw std::invalid_argument("bad number '" + s + "'");
  return v;
}

inline std::string level_column(double pct)
{
  char buf[32];
  if (pct == std::floor(pct))
    std::snprintf(buf, sizeof buf, "q%02d", static_cast<int>(pct));
  else
    std::snprintf(buf, sizeof buf, "q%g", pct);
  return buf;
}

/// Quotes a CSV field when it holds a comma or a quote (labels like thetadelta:T,D).
inline std::string csv_field(const std::string& s)
{
  if (s.find_first_of(",\"") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char c : s)
    out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

inline constexpr const char* trials_header =
  "density,n,criterion,trial,seed,selected_dim,kl,oracle_dim,oracle_kl,runtime_ms";

inline void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& records)
{
  os << trials_header << '\n';
  for (const auto& r : records)
    os << csv_field(r.density) << ',' << r.n << ',' << csv_field(r.criterion) << ',' << r.trial << ',' << r.seed
       << ',' << r.selected_dim << ',' << format_real(r.kl) << ',' << r.oracle_dim << ','
       << format_real(r.oracle_kl) << ',' << format_real(r.runtime_ms) << '\n';
}

/// Splits one CSV line; double-quoted fields may hold commas and "" escapes.
inline std::vector<std::string> split_csv_line(const std::string& line)
{
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  return fields;
}

inline std::vector<TrialRecord> read_trials_csv(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != trials_header)
    throw std::runtime_error(path.string() + ": unexpected header");
  std::vector<TrialRecord> out;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    const auto f = split_csv_line(line);
    if (f.size() != 10)
      throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
    TrialRecord r;
    r.density = f[0];
    r.n = std::stoull(f[1]);
    r.criterion = f[2];
    r.trial = std::stoull(f[3]);
    r.seed = std::stoull(f[4]);
    r.selected_dim = std::stoi(f[5]);
    r.kl = parse_real(f[6]);
    r.oracle_dim = std::stoi(f[7]);
    r.oracle_kl = parse_real(f[8]);
    r.runtime_ms = parse_real(f[9]);
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_summary_csv(std::ostream& os, const ExperimentSummary& summary)
{
  os << "density,n,criterion";
  for (double q : summary.levels)
    os << ',' << level_column(q);
  os << ",inf_count,mean_finite,trials\n";
  for (const auto& c : summary.cells) {
    os << csv_field(c.density) << ',' << c.n << ',' << csv_field(c.criterion);
    for (double v : c.quantiles)
      os << ',' << format_real(v);
    os << ',' << c.inf_count << ',' << format_real(c.mean_finite) << ',' << c.trials << '\n';
  }
}

inline nlohmann::json summary_to_json(const ExperimentSummary& summary)
{
  auto real = [](double v) -> nlohmann::json {
    if (std::isfinite(v))
      return v;
    return format_real(v);
  };
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : summary.cells) {
    nlohmann::json q = nlohmann::json::object();
    for (std::size_t i = 0; i < summary.levels.size(); ++i)
      q[level_column(summary.levels[i])] = real(c.quantiles[i]);
    cells.push_back({ { "density", c.density },
                      { "n", c.n },
                      { "criterion", c.criterion },
                      { "quantiles", q },
                      { "inf_count", c.inf_count },
                      { "mean_finite", real(c.mean_finite) },
                      { "trials", c.trials } });
  }
  return { { "levels", summary.levels }, { "cells", cells }, { "warnings", summary.warnings } };
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path)
{
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os)
    throw std::runtime_error("cannot write " + path.string());
  return os;
}

} // namespace detail

/// trials.csv, summary.csv and summary.json under `out_dir` (created if needed).
inline void write_records(const std::vector<TrialRecord>& records, const ExperimentSummary& summary,
                          const std::filesystem::path& out_dir)
{
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec)
    throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());
  {
    auto os = detail::open_output(out_dir / "trials.csv");
    write_trials_csv(os, records);
  }
  {
    auto os = detail::open_output(out_dir / "summary.csv");
    write_summary_csv(os, summary);
  }
  {
    auto os = detail::open_output(out_dir / "summary.json");
    os << summary_to_json(summary).dump(2) << '\n';
  }
  if (!std::filesystem::exists(out_dir / "trials.csv"))
    throw std::runtime_error("failed to write records under " + out_dir.string());
}

/// Long-format plot data for the KL boxplots: one row per trial and one row
/// per (cell, level).
inline void write_plotdata(const std::vector<TrialRecord>& records, const std::vector<double>& levels,
                           const std::filesystem::path& out_dir)
{
  std::filesystem::create_directories(out_dir);
  {
    auto os = detail::open_output(out_dir / "kl_long.csv");
    os << "density,n,criterion,trial,kl,is_inf\n";
    for (const auto& r : records)
      if (!r.failed())
        os << csv_field(r.density) << ',' << r.n << ',' << csv_field(r.criterion) << ',' << r.trial << ','
           << format_real(r.kl) << ',' << (std::isinf(r.kl) ? 1 : 0) << '\n';
  }
  const auto summary = aggregate(records, levels);
  auto os = detail::open_output(out_dir / "kl_quantiles.csv");
  os << "density,n,criterion,level,value,inf_count\n";
  for (const auto& c : summary.cells)
    for (std::size_t i = 0; i < levels.size(); ++i)
      os << csv_field(c.density) << ',' << c.n << ',' << csv_field(c.criterion) << ',' << format_real(levels[i]) << ','
         << format_real(c.quantiles[i]) << ',' << c.inf_count << '\n';
}

} // namespace overpen
