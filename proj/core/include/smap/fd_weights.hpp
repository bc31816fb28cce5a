#pragma once

#include <span>
#include <vector>

namespace smap {

/// Fornberg's recursion: weights w[j] such that
/// sum_j w[j] f(x[j]) approximates the derivative of order `order` at x0.
std::vector<double> fd_weights(double x0, std::span<const double> x, int order);

}  // namespace smap
