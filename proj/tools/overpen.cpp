// overpen: histogram bin-count selection by penalized maximum likelihood,
// the Monte Carlo benchmark, and the verification suites.
//
// Exit codes: 0 success, 1 runtime failure (or a failed verification check),
// 2 usage / validation error.

#include "overpen/overpen.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct UsageError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
    return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

std::vector<std::string> split_list(const std::string& text)
{
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
    if (auto t = trim(item); !t.empty())
      out.push_back(t);
  return out;
}

// "thetadelta:T,D" carries its own comma; glue the D back on.
std::vector<std::string> split_criteria(const std::string& text)
{
  std::vector<std::string> out;
  for (auto& item : split_list(text)) {
    if (!out.empty() && out.back().starts_with("thetadelta:") && out.back().find(',') == std::string::npos)
      out.back() += "," + item;
    else
      out.push_back(item);
  }
  return out;
}

// --config FILE: flat `key = value` lines mirroring long flags. Values from
// the file are appended only for flags absent from the command line, so
// flags win. `key = true` stands for a bare switch.
std::vector<std::string> inject_config(std::vector<std::string> args)
{
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].starts_with("--config=")) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!path)
    return args;
  std::ifstream in(*path);
  if (!in)
    throw UsageError("cannot read config file " + *path);
  auto given = [&](const std::string& flag) {
    for (const auto& a : args)
      if (a == flag || a.starts_with(flag + "="))
        return true;
    return false;
  };
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#')
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(*path + ":" + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto flag = "--" + key;
    if (key.empty() || given(flag))
      continue;
    if (value == "true") {
      args.push_back(flag);
    } else if (value != "false") {
      args.push_back(flag);
      args.push_back(value);
    }
  }
  return args;
}

overpen::Criterion apply_variants(overpen::Criterion c, const std::string& aic1_base, const std::string& br_variant)
{
  using namespace overpen;
  if (c.kind == CriterionKind::overpen || c.kind == CriterionKind::adaptive)
    c.base = aic1_base == "none" ? OverpenBase::none : OverpenBase::one;
  if (c.kind == CriterionKind::br && br_variant == "classic")
    c.br_variant = BrVariant::classic;
  return c;
}

overpen::Interval parse_support(const std::string& text)
{
  const auto parts = split_list(text);
  if (parts.size() != 2)
    throw UsageError("--support expects 'a,b'");
  try {
    const overpen::Interval s{ std::stod(parts[0]), std::stod(parts[1]) };
    if (!(s.lo < s.hi) || !std::isfinite(s.lo) || !std::isfinite(s.hi))
      throw UsageError("--support needs a finite interval with a < b");
    return s;
  } catch (const std::logic_error&) {
    throw UsageError("--support expects two numbers, got '" + text + "'");
  }
}

void write_json_file(const std::string& path, const nlohmann::json& j)
{
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os)
    throw std::runtime_error("cannot write " + path);
  os << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------

struct SelectArgs
{
  std::string input, column, support, density, criterion = "aic1", out, trace_out;
  std::optional<std::size_t> kmax;
  std::string aic1_base = "one", br_variant = "paper";
  bool pseudo_tests = false;
};

int cmd_select(const SelectArgs& a)
{
  using namespace overpen;
  std::vector<double> samples;
  try {
    samples = read_samples(a.input, a.column.empty() ? std::nullopt : std::optional<std::string>(a.column));
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  Interval support{ 0.0, 1.0 };
  if (!a.density.empty())
    support = find_density(a.density).support();
  if (!a.support.empty())
    support = parse_support(a.support);
  try {
    require_within(samples, support);
  } catch (const std::domain_error& e) {
    throw UsageError(e.what());
  }
  const auto criterion = apply_variants(parse_criterion(a.criterion), a.aic1_base, a.br_variant);
  if (a.kmax && *a.kmax < 1)
    throw UsageError("--kmax must be at least 1");
  if (!a.trace_out.empty() && (criterion.kind != CriterionKind::adaptive || a.pseudo_tests))
    throw UsageError("--trace-out needs --criterion adaptive without --pseudo-tests");

  const auto models = regular_model_grid(support, samples.size(), a.kmax);
  const auto fit = fit_collection(models, samples);
  AdaptiveTrace trace;
  const auto result =
    a.pseudo_tests ? select_by_pseudo_tests(models, samples, criterion) : select_argmin(fit, criterion, &trace);
  const auto hist = fit_mle(models[result.selected], samples);

  const auto effective = criterion.kind == CriterionKind::adaptive ? Criterion::overpen(result.constant, criterion.base)
                                                                   : criterion;
  nlohmann::json penalties = nlohmann::json::array();
  for (const auto& m : models) {
    const auto p = penalty(effective, m.dim(), samples.size());
    penalties.push_back(p ? nlohmann::json(*p) : nlohmann::json(nullptr));
  }

  auto out = to_json(result);
  out["penalties"] = penalties;
  out["histogram"] = to_json(hist);
  std::cout << out.dump(2) << '\n';
  if (!a.out.empty())
    write_json_file(a.out, to_json(hist));
  if (!a.trace_out.empty())
    write_json_file(a.trace_out, to_json(trace));

  std::fprintf(stderr, "criterion %s, n = %zu, support [%g, %g]\n", result.criterion.c_str(), samples.size(),
               support.lo, support.hi);
  if (criterion.kind == CriterionKind::adaptive)
    std::fprintf(stderr, "adaptive constant C = %.6g\n", result.constant);
  std::fprintf(stderr, "%6s %6s %14s %14s %14s\n", "cells", "dim", "emp_risk", "penalty", "criterion");
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto p = penalty(effective, models[i].dim(), samples.size());
    const auto& v = result.crit_values[i];
    std::fprintf(stderr, "%6zu %6d %14.6g %14s %14s%s\n", models[i].cells(), models[i].dim(), fit.emp_risks[i],
                 p ? std::to_string(*p).c_str() : "excluded", v ? std::to_string(*v).c_str() : "excluded",
                 i == result.selected ? "  <- selected" : "");
  }
  std::fprintf(stderr, "selected %d cells (dim %d)\n", result.selected_dim + 1, result.selected_dim);
  return 0;
}

struct BenchmarkArgs
{
  std::string densities = "triangle,bilog_peak,beta22,inf_peak", sizes = "50,100,200,500,1000",
              criteria = "aic,aicc,br,aic1,adaptive", out = "benchmark_out";
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::optional<std::size_t> kmax;
  std::string aic1_base = "one", br_variant = "paper";
  bool record_runtime = false, quiet = false;
};

int cmd_benchmark(const BenchmarkArgs& a)
{
  using namespace overpen;
  ExperimentConfig config;
  config.densities = split_list(a.densities);
  config.sample_sizes.clear();
  for (const auto& s : split_list(a.sizes)) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.front() == '-')
      throw UsageError("--n expects positive integers, got '" + s + "'");
    config.sample_sizes.push_back(static_cast<std::size_t>(v));
  }
  config.criteria.clear();
  for (const auto& c : split_criteria(a.criteria))
    config.criteria.push_back(apply_variants(parse_criterion(c), a.aic1_base, a.br_variant));
  config.trials = a.trials;
  config.master_seed = a.seed;
  config.threads = a.threads;
  config.max_cells = a.kmax;
  config.record_runtime = a.record_runtime;
  try {
    config.validate();
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }

  auto progress = [&](const std::string& msg) {
    if (!a.quiet)
      std::cerr << msg << '\n';
  };
  const auto result = run_benchmark(config, progress);
  write_records(result.records, result.summary, a.out);
  write_plotdata(result.records, config.quantiles, std::filesystem::path(a.out) / "plotdata");
  for (const auto& w : result.summary.warnings)
    std::cerr << "warning: " << w << '\n';
  if (!a.quiet)
    std::cerr << "wrote " << result.records.size() << " trial records to " << a.out << '\n';
  return 0;
}

struct VerifyArgs
{
  std::string suite = "all", report;
  std::size_t reps = 10000;
  std::uint64_t seed = 1;
  bool falsify = false;
};

int cmd_verify(const VerifyArgs& a)
{
  using namespace overpen::verify;
  if (a.reps < 1)
    throw UsageError("--reps must be at least 1");
  const auto report = run_suite(a.suite, { a.reps, a.seed, a.falsify });
  const auto j = report.to_json();
  if (a.report.empty())
    std::cout << j.dump(2) << '\n';
  else
    write_json_file(a.report, j);
  std::size_t failed = 0;
  for (const auto& c : report.checks) {
    if (!c.pass) {
      ++failed;
      std::fprintf(stderr, "FAIL %s %s empirical=%.6g bound=%.6g\n", c.id.c_str(), c.params.dump().c_str(), c.empirical,
                   c.bound);
    }
  }
  std::fprintf(stderr, "verify %s: %zu checks, %zu failed\n", a.suite.c_str(), report.checks.size(), failed);
  return failed == 0 ? 0 : 1;
}

int cmd_densities_list()
{
  for (const auto& d : overpen::density_catalog())
    std::printf("%s\t[%g, %g]\t%s\n", d.id().c_str(), d.support().lo, d.support().hi, d.description().c_str());
  return 0;
}

int cmd_densities_sample(const std::string& id, std::size_t n, std::uint64_t seed, const std::string& out)
{
  const auto& d = overpen::find_density(id);
  if (n < 1)
    throw UsageError("--n must be at least 1");
  const auto xs = overpen::draw_samples(d, seed, n);
  std::ofstream file;
  if (!out.empty()) {
    file.open(out, std::ios::binary | std::ios::trunc);
    if (!file)
      throw std::runtime_error("cannot write " + out);
  }
  std::ostream& os = out.empty() ? std::cout : file;
  char buf[32];
  for (double x : xs) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    os << buf << '\n';
  }
  return 0;
}

int cmd_plotdata(const std::string& trials, const std::string& trace, const std::string& out)
{
  using namespace overpen;
  if (trials.empty() && trace.empty())
    throw UsageError("plotdata needs --trials and/or --trace");
  std::filesystem::create_directories(out);
  if (!trials.empty()) {
    const auto records = read_trials_csv(trials);
    write_plotdata(records, ExperimentConfig{}.quantiles, out);
  }
  if (!trace.empty()) {
    std::ifstream in(trace);
    if (!in)
      throw std::runtime_error("cannot open " + trace);
    const auto t = trace_from_json(nlohmann::json::parse(in));
    std::ofstream os(std::filesystem::path(out) / "adaptive_alpha.csv", std::ios::binary | std::ios::trunc);
    write_trace_csv(os, t);
    std::ofstream ms(std::filesystem::path(out) / "adaptive_models.csv", std::ios::binary | std::ios::trunc);
    ms << "model,delta,c_hat_m\n";
    for (std::size_t i = 0; i < t.deltas.size(); ++i)
      ms << i << ',' << format_real(t.deltas[i]) << ',' << format_real(t.c_hat_m[i]) << '\n';
  }
  std::cerr << "plot data written to " << out << '\n';
  return 0;
}

} // namespace

int main(int argc, char** argv)
{
  std::vector<std::string> args;
  try {
    args = inject_config({ argv + 1, argv + argc });
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  CLI::App app{ "Histogram bin-count selection with over-penalized maximum likelihood" };
  app.require_subcommand(1);
  app.set_version_flag("--version", "overpen 1.0.0");
  std::string config_placeholder;
  app.add_option("--config", config_placeholder, "flat key = value file mirroring long flags; flags win");

  SelectArgs sel;
  auto* select = app.add_subcommand("select", "select a histogram for the samples in a file");
  select->add_option("--input", sel.input, "sample file: one value per line, or CSV with --column")->required();
  select->add_option("--column", sel.column, "CSV column holding the samples");
  select->add_option("--support", sel.support, "support 'a,b' (default 0,1 or the --density support)");
  select->add_option("--density", sel.density, "take the support from a catalog density");
  select->add_option("--criterion", sel.criterion, "aic|aicc|br|aic1|overpen:C|thetadelta:T,D|adaptive")
    ->capture_default_str();
  select->add_option("--kmax", sel.kmax, "largest cell count (default max(2, floor(n/ln(n+1))))");
  select->add_option("--aic1-base", sel.aic1_base, "one: (1 + C eps) D/n; none: C eps D/n")
    ->check(CLI::IsMember({ "one", "none" }))
    ->capture_default_str();
  select->add_option("--br-variant", sel.br_variant)->check(CLI::IsMember({ "paper", "classic" }))->capture_default_str();
  select->add_option("--out", sel.out, "write the selected histogram as JSON");
  select->add_option("--trace-out", sel.trace_out, "write the adaptive trace as JSON");
  select->add_flag("--pseudo-tests", sel.pseudo_tests, "select by iterated pseudo-tests instead of argmin");

  BenchmarkArgs bench;
  auto* benchmark = app.add_subcommand("benchmark", "run the Monte Carlo benchmark");
  benchmark->add_option("--densities", bench.densities)->capture_default_str();
  benchmark->add_option("--n", bench.sizes, "sample sizes")->capture_default_str();
  benchmark->add_option("--trials", bench.trials)->capture_default_str()->check(CLI::PositiveNumber);
  benchmark->add_option("--criteria", bench.criteria)->capture_default_str();
  benchmark->add_option("--seed", bench.seed, "master seed")->envname("OVERPEN_SEED")->capture_default_str();
  benchmark->add_option("--threads", bench.threads)->capture_default_str()->check(CLI::PositiveNumber);
  benchmark->add_option("--out", bench.out, "output directory")->capture_default_str();
  benchmark->add_option("--kmax", bench.kmax, "largest cell count");
  benchmark->add_option("--aic1-base", bench.aic1_base)->check(CLI::IsMember({ "one", "none" }))->capture_default_str();
  benchmark->add_option("--br-variant", bench.br_variant)
    ->check(CLI::IsMember({ "paper", "classic" }))
    ->capture_default_str();
  benchmark->add_flag("--record-runtime", bench.record_runtime, "fill runtime_ms (breaks byte-identical output)");
  benchmark->add_flag("--quiet", bench.quiet, "no progress lines");

  VerifyArgs ver;
  auto* verify = app.add_subcommand("verify", "run verification suites");
  verify->add_option("--suite", ver.suite)
    ->check(CLI::IsMember({ "identities", "chi", "tails", "margin", "concentration", "penopt", "all" }))
    ->capture_default_str();
  verify->add_option("--reps", ver.reps)->capture_default_str();
  verify->add_option("--seed", ver.seed)->envname("OVERPEN_SEED")->capture_default_str();
  verify->add_option("--report", ver.report, "write the JSON report here instead of stdout");
  verify->add_flag("--falsify", ver.falsify, "divide every bound by 10; the run must then fail");

  auto* densities = app.add_subcommand("densities", "list or sample the target densities");
  densities->require_subcommand(1);
  auto* dlist = densities->add_subcommand("list", "print ids and supports");
  std::string sample_id, sample_out;
  std::size_t sample_n = 0;
  std::uint64_t sample_seed = 1;
  auto* dsample = densities->add_subcommand("sample", "draw samples, one per line");
  dsample->add_option("--id", sample_id)->required();
  dsample->add_option("--n", sample_n)->required();
  dsample->add_option("--seed", sample_seed)->envname("OVERPEN_SEED")->capture_default_str();
  dsample->add_option("--out", sample_out);

  std::string plot_trials, plot_trace, plot_out = "plotdata";
  auto* plotdata = app.add_subcommand("plotdata", "long-format CSV for external plotting");
  plotdata->add_option("--trials", plot_trials, "trials.csv from benchmark");
  plotdata->add_option("--trace", plot_trace, "adaptive trace JSON from select --trace-out");
  plotdata->add_option("--out", plot_out)->capture_default_str();

  try {
    std::reverse(args.begin(), args.end()); // CLI11 consumes vectors from the back
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*select)
      return cmd_select(sel);
    if (*benchmark)
      return cmd_benchmark(bench);
    if (*verify)
      return cmd_verify(ver);
    if (*dlist)
      return cmd_densities_list();
    if (*dsample)
      return cmd_densities_sample(sample_id, sample_n, sample_seed, sample_out);
    if (*plotdata)
      return cmd_plotdata(plot_trials, plot_trace, plot_out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
