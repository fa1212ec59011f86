#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace ddc {

using ScalarFn = std::function<double(double)>;

namespace detail {

template <class F>
double adaptive_simpson_step(F& f, double a, double b, double fa, double fm, double fb,
                             double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance `tol`.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol = 1e-12, int max_depth = 48) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::adaptive_simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

/// Composite Simpson rule on `points` equispaced nodes (points odd, >= 3).
template <class F>
double simpson(F&& f, double a, double b, int points) {
  if (points < 3 || points % 2 == 0) throw std::invalid_argument("simpson: node count must be odd and >= 3");
  const int panels = points - 1;
  const double step = (b - a) / panels;
  double sum = f(a) + f(b);
  for (int i = 1; i < panels; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * f(a + i * step);
  return sum * step / 3.0;
}

/// Composite Simpson rule on samples at equispaced nodes with spacing `step`.
inline double simpson_samples(std::span<const double> values, double step) {
  const std::size_t n = values.size();
  if (n < 3 || n % 2 == 0) throw std::invalid_argument("simpson_samples: sample count must be odd and >= 3");
  double sum = values.front() + values.back();
  for (std::size_t i = 1; i + 1 < n; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * values[i];
  return sum * step / 3.0;
}

/// Equispaced grid of `points` nodes spanning [a, b].
std::vector<double> linspace(double a, double b, std::size_t points);

}  // namespace ddc
