#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <vector>

namespace overpen {

struct QuadratureOptions
{
  double abs_tol = 1e-11;
  double rel_tol = 1e-10;
  std::size_t max_intervals = 2000;
};

struct QuadratureResult
{
  double value = 0.0;
  double error = 0.0;
  std::size_t intervals = 0;
  bool converged = false;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
inline constexpr std::array<double, 8> gk15_nodes = {
  0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
  0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
  0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
  0.207784955007898467600689403773245, 0.000000000000000000000000000000000
};
inline constexpr std::array<double, 8> gk15_weights = {
  0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
  0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
  0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
  0.204432940075298892414161999234649, 0.209482141084727828012999174891714
};
inline constexpr std::array<double, 4> g7_weights = {
  0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
  0.381830050505118944950369775488975, 0.417959183673469387755102040816327
};

struct Segment
{
  double lo, hi, value, error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

template <class F>
Segment gauss_kronrod(F& f, double lo, double hi)
{
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = fc * gk15_weights[7];
  double gauss = fc * g7_weights[3];
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * gk15_nodes[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += gk15_weights[j] * sum;
    if (j % 2 == 1)
      gauss += g7_weights[j / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  return { lo, hi, kronrod, std::abs(kronrod - gauss) };
}

} // namespace detail

/// Globally adaptive Gauss-Kronrod integration of f over [lo, hi].
///
/// The interval with the largest error estimate is bisected until the summed
/// estimate falls under max(abs_tol, rel_tol*|value|). Failure to get there
/// within the interval budget (or a non-finite integrand) leaves
/// `converged == false`; callers use that to flag divergent integrals.
template <class F>
QuadratureResult integrate(F&& f, double lo, double hi, const QuadratureOptions& opts = {})
{
  QuadratureResult out;
  if (!(hi > lo))
    return { 0.0, 0.0, 0, hi == lo };

  std::priority_queue<detail::Segment> heap;
  auto first = detail::gauss_kronrod(f, lo, hi);
  double total = first.value;
  double error = first.error;
  heap.push(first);

  while (true) {
    if (!std::isfinite(total) || !std::isfinite(error))
      break;
    if (error <= std::max(opts.abs_tol, opts.rel_tol * std::abs(total))) {
      out.converged = true;
      break;
    }
    if (heap.size() >= opts.max_intervals)
      break;
    auto worst = heap.top();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi))
      break;
    heap.pop();
    auto left = detail::gauss_kronrod(f, worst.lo, mid);
    auto right = detail::gauss_kronrod(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }

  // Re-sum to shed the drift of the running updates.
  double value = 0.0, err = 0.0;
  out.intervals = heap.size();
  while (!heap.empty()) {
    value += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  out.value = value;
  out.error = err;
  if (!std::isfinite(value))
    out.converged = false;
  return out;
}

} // namespace overpen
