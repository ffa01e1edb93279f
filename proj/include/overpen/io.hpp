#pragma once

// JSON views of histograms, selection results and adaptive traces, and
// sample-file reading (one value per line, or a named CSV column).

#include "overpen/adaptive.hpp"
#include "overpen/experiments.hpp"
#include "overpen/histogram.hpp"
#include "overpen/selection.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace overpen {

namespace detail {

// JSON has no infinity or NaN; encode them as strings like the CSV files do.
inline nlohmann::json json_real(double x)
{
  if (std::isfinite(x))
    return x;
  return format_real(x);
}

inline std::vector<nlohmann::json> json_reals(const std::vector<double>& xs)
{
  std::vector<nlohmann::json> out;
  out.reserve(xs.size());
  for (double x : xs)
    out.push_back(json_real(x));
  return out;
}

inline double real_from_json(const nlohmann::json& j)
{
  if (j.is_number())
    return j.get<double>();
  if (j.is_string())
    return overpen::parse_real(j.get<std::string>());
  throw std::invalid_argument("expected a number, got " + j.dump());
}

inline std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

} // namespace detail

inline nlohmann::json to_json(const HistogramDensity& f)
{
  const auto s = f.model().support();
  return { { "support", { s.lo, s.hi } },
           { "breakpoints", std::vector<double>(f.model().breakpoints().begin(), f.model().breakpoints().end()) },
           { "heights", std::vector<double>(f.heights().begin(), f.heights().end()) } };
}

inline HistogramDensity histogram_from_json(const nlohmann::json& j)
{
  HistogramModel model(j.at("breakpoints").get<std::vector<double>>());
  const auto support = j.at("support").get<std::vector<double>>();
  if (support.size() != 2 || !(model.support() == Interval{ support[0], support[1] }))
    throw std::invalid_argument("histogram JSON: support does not match breakpoints");
  return HistogramDensity(std::move(model), j.at("heights").get<std::vector<double>>());
}

inline nlohmann::json to_json(const SelectionResult& r)
{
  nlohmann::json values = nlohmann::json::array();
  for (const auto& v : r.crit_values)
    values.push_back(v ? detail::json_real(*v) : nlohmann::json(nullptr));
  return { { "criterion", r.criterion }, { "n", r.n },
           { "selected_dim", r.selected_dim }, { "selected_cells", r.selected_dim + 1 },
           { "constant", r.constant }, { "crit_values", values },
           { "excluded", r.excluded } };
}

inline nlohmann::json to_json(const AdaptiveTrace& t)
{
  return { { "intercept_hat", detail::json_real(t.intercept_hat) },
           { "deltas", detail::json_reals(t.deltas) },
           { "c_hat_m", detail::json_reals(t.c_hat_m) },
           { "alpha_grid", t.alpha_grid },
           { "intercept_per_alpha", detail::json_reals(t.intercept_per_alpha) },
           { "c_hat_alpha", detail::json_reals(t.c_hat_alpha) },
           { "selected_per_alpha", t.selected_per_alpha },
           { "selected_dim_per_alpha", t.selected_dim_per_alpha },
           { "plateau_begin", t.plateau_begin },
           { "plateau_end", t.plateau_end },
           { "c_hat", t.c_hat } };
}

inline AdaptiveTrace trace_from_json(const nlohmann::json& j)
{
  auto reals = [&](const char* key) {
    std::vector<double> out;
    for (const auto& v : j.at(key))
      out.push_back(detail::real_from_json(v));
    return out;
  };
  AdaptiveTrace t;
  t.intercept_hat = detail::real_from_json(j.at("intercept_hat"));
  t.deltas = reals("deltas");
  t.c_hat_m = reals("c_hat_m");
  t.alpha_grid = j.at("alpha_grid").get<std::vector<double>>();
  t.intercept_per_alpha = reals("intercept_per_alpha");
  t.c_hat_alpha = reals("c_hat_alpha");
  t.selected_per_alpha = j.at("selected_per_alpha").get<std::vector<std::size_t>>();
  t.selected_dim_per_alpha = j.at("selected_dim_per_alpha").get<std::vector<int>>();
  t.plateau_begin = j.at("plateau_begin").get<std::size_t>();
  t.plateau_end = j.at("plateau_end").get<std::size_t>();
  t.c_hat = j.at("c_hat").get<double>();
  return t;
}

/// Per-alpha rows of an adaptive trace, for the Ĉ_α plateau plot.
inline void write_trace_csv(std::ostream& os, const AdaptiveTrace& t)
{
  os << "alpha,intercept,c_hat_alpha,selected,selected_dim,in_plateau\n";
  for (std::size_t i = 0; i < t.alpha_grid.size(); ++i)
    os << format_real(t.alpha_grid[i]) << ',' << format_real(t.intercept_per_alpha[i]) << ','
       << format_real(t.c_hat_alpha[i]) << ',' << t.selected_per_alpha[i] << ',' << t.selected_dim_per_alpha[i] << ','
       << (i >= t.plateau_begin && i < t.plateau_end ? 1 : 0) << '\n';
}

/// Reads a sample file. Without `column`, every non-empty line holds one
/// number; with it, the first line is a CSV header naming the column.
inline std::vector<double> read_samples(std::istream& in, const std::string& source,
                                        const std::optional<std::string>& column = std::nullopt)
{
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> col;
  if (column) {
    if (!std::getline(in, line))
      throw std::invalid_argument(source + ": empty file, expected a CSV header");
    ++line_no;
    const auto header = split_csv_line(line);
    for (std::size_t i = 0; i < header.size(); ++i)
      if (detail::trim(header[i]) == *column)
        col = i;
    if (!col)
      throw std::invalid_argument(source + ": no column named '" + *column + "'");
  }
  std::vector<double> out;
  while (std::getline(in, line)) {
    ++line_no;
    std::string field = detail::trim(line);
    if (field.empty() || field.front() == '#')
      continue;
    if (col) {
      const auto fields = split_csv_line(line);
      if (*col >= fields.size())
        throw std::invalid_argument(source + ":" + std::to_string(line_no) + ": missing column '" + *column + "'");
      field = detail::trim(fields[*col]);
    }
    double v = 0.0;
    try {
      v = overpen::parse_real(field);
    } catch (const std::exception&) {
      throw std::invalid_argument(source + ":" + std::to_string(line_no) + ": not a number: '" + field + "'");
    }
    if (!std::isfinite(v))
      throw std::invalid_argument(source + ":" + std::to_string(line_no) + ": non-finite value '" + field + "'");
    out.push_back(v);
  }
  if (out.empty())
    throw std::invalid_argument(source + ": no samples");
  return out;
}

inline std::vector<double> read_samples(const std::filesystem::path& path,
                                        const std::optional<std::string>& column = std::nullopt)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open " + path.string());
  return read_samples(in, path.string(), column);
}

/// Rejects samples outside `support` before any fitting, naming the first offender.
inline void require_within(std::span<const double> samples, Interval support)
{
  for (double x : samples)
    if (!(x >= support.lo && x <= support.hi))
      throw std::domain_error("sample value " + HistogramModel::format_value(x) + " is outside the support [" +
                              HistogramModel::format_value(support.lo) + ", " +
                              HistogramModel::format_value(support.hi) + "]");
}

} // namespace overpen
