#include "smap/interp.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "smap/errors.hpp"

namespace smap {
namespace {

std::size_t stencil_start(const RadialGrid& grid, double& r) {
  const double lo = grid.r_min();
  const double hi = grid.r_max();
  const double slack = 1e-12 * hi;
  if (!(r >= lo - slack && r <= hi + slack)) {
    throw OutOfDomainError("interpolation point outside grid coverage");
  }
  r = std::clamp(r, lo, hi);
  const std::size_t n = grid.size();
  const std::size_t i = grid.bracket(r);
  if (n < 4) return 0;
  std::size_t start = i == 0 ? 0 : i - 1;
  return std::min(start, n - 4);
}

}  // namespace

double interpolate_cubic(const RadialGrid& grid, std::span<const double> values, double r) {
  if (values.size() != grid.size()) throw GridMismatchError("interpolation values do not match grid");
  const std::size_t start = stencil_start(grid, r);
  const std::size_t m = std::min<std::size_t>(4, grid.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double w = 1.0;
    const double xj = grid[start + j];
    for (std::size_t k = 0; k < m; ++k) {
      if (k == j) continue;
      const double xk = grid[start + k];
      w *= (r - xk) / (xj - xk);
    }
    acc += w * values[start + j];
  }
  return acc;
}

double interpolate_cubic_derivative(const RadialGrid& grid, std::span<const double> values,
                                    double r) {
  if (values.size() != grid.size()) throw GridMismatchError("interpolation values do not match grid");
  const std::size_t start = stencil_start(grid, r);
  const std::size_t m = std::min<std::size_t>(4, grid.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double xj = grid[start + j];
    double denom = 1.0;
    for (std::size_t k = 0; k < m; ++k) {
      if (k != j) denom *= xj - grid[start + k];
    }
    // d/dr prod_{k != j} (r - x_k)
    double num = 0.0;
    for (std::size_t l = 0; l < m; ++l) {
      if (l == j) continue;
      double p = 1.0;
      for (std::size_t k = 0; k < m; ++k) {
        if (k != j && k != l) p *= r - grid[start + k];
      }
      num += p;
    }
    acc += num / denom * values[start + j];
  }
  return acc;
}

}  // namespace smap
