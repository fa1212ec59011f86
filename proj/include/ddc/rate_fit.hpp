#pragma once

#include <span>
#include <utility>
#include <vector>

namespace ddc {

/// Ordinary least squares fit of log y = intercept + slope * log x.
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;  // (log x, log y)
};

/// Requires at least three points with strictly positive coordinates.
RateFit fit_rate(std::span<const double> x, std::span<const double> y);

}  // namespace ddc
