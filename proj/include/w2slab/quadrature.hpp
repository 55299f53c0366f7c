#pragma once

// Globally adaptive Gauss-Kronrod (7/15 point) quadrature on a finite interval.

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

namespace w2slab {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int evaluations = 0;
  bool converged = false;
};

namespace detail {

// Kronrod abscissae (positive half, descending); odd indices are the Gauss nodes.
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <typename F>
Segment gauss_kronrod_15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kKronrodNodes[i];
    const double s = f(c - dx) + f(c + dx);
    kronrod += kKronrodWeights[i] * s;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * s;
  }
  return {a, b, kronrod * h, std::abs((kronrod - gauss) * h)};
}

}  // namespace detail

/// Bisects the segment with the largest error estimate until the summed estimate falls
/// below max(abs_tol, rel_tol * |value|) or `max_segments` is reached.
template <typename F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, double abs_tol = 1e-13,
                                    double rel_tol = 1e-12, int max_segments = 2000) {
  int evals = 0;
  auto counted = [&](double x) {
    ++evals;
    return f(x);
  };
  std::priority_queue<detail::Segment> heap;
  auto first = detail::gauss_kronrod_15(counted, a, b);
  double value = first.value;
  double error = first.error;
  heap.push(first);
  int segments = 1;
  while (error > std::max(abs_tol, rel_tol * std::abs(value)) && segments < max_segments) {
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const auto left = detail::gauss_kronrod_15(counted, worst.a, mid);
    const auto right = detail::gauss_kronrod_15(counted, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++segments;
  }
  // Re-sum to shed the drift of the running updates.
  value = 0.0;
  error = 0.0;
  while (!heap.empty()) {
    value += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  return {value, error, evals, error <= std::max(abs_tol, rel_tol * std::abs(value))};
}

}  // namespace w2slab
