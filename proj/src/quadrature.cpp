#include "ddc/quadrature.hpp"

#include <vector>

namespace ddc {

std::vector<double> linspace(double a, double b, std::size_t points) {
  if (points < 2) throw std::invalid_argument("linspace: need at least two points");
  std::vector<double> grid(points);
  const double step = (b - a) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) grid[i] = a + step * static_cast<double>(i);
  grid.back() = b;
  return grid;
}

}  // namespace ddc
