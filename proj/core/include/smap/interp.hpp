#pragma once

#include <span>

#include "smap/radial_grid.hpp"

namespace smap {

/// Four-point Lagrange interpolation of nodal values on `grid` at `r`.
/// Stencils are shifted inward at the ends. Throws OutOfDomainError for r
/// outside [r_1, r_N] (a relative slack of 1e-12 is allowed at the ends).
double interpolate_cubic(const RadialGrid& grid, std::span<const double> values, double r);

/// Same stencil, returning the first derivative of the interpolant.
double interpolate_cubic_derivative(const RadialGrid& grid, std::span<const double> values, double r);

}  // namespace smap
