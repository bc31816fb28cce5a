#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "smap/radial_grid.hpp"

namespace smap {

/// Leading asymptotics f ~ y^power (log y)^log_power, recorded separately
/// for y -> infinity and y -> 0+.
struct TailDescriptor {
  double power_inf = 0.0;
  int log_power_inf = 0;
  double power_zero = 0.0;
  int log_power_zero = 0;
};

/// Samples of a scalar radial function on a RadialGrid.
class RadialFunction {
 public:
  RadialFunction(RadialGrid grid, std::vector<double> samples,
                 std::optional<TailDescriptor> tail = std::nullopt);

  static RadialFunction sample(const RadialGrid& grid, const std::function<double(double)>& f,
                               std::optional<TailDescriptor> tail = std::nullopt);

  const RadialGrid& grid() const { return grid_; }
  const std::vector<double>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  double operator[](std::size_t i) const { return samples_[i]; }
  const std::optional<TailDescriptor>& tail() const { return tail_; }
  void set_tail(std::optional<TailDescriptor> tail) { tail_ = tail; }

  /// Local cubic Lagrange interpolation. Throws OutOfDomainError outside
  /// [r_1, r_N].
  double at(double y) const;

  /// Ratio test of the y -> infinity tail descriptor over the last decade of
  /// the grid: max/min of f / (y^p log^q y) must stay within `tolerance`.
  /// Returns true when no descriptor is present.
  bool tail_consistent(double tolerance = 0.2) const;

 private:
  RadialGrid grid_;
  std::vector<double> samples_;
  std::optional<TailDescriptor> tail_;
};

/// Discrete L^2(R^2) inner product 2*pi * sum m_i f_i g_i over the grid's
/// trapezoid measure. Both functions must live on the same grid.
double inner_product(const RadialFunction& f, const RadialFunction& g);
double l2_norm(const RadialFunction& f);

/// Two-column text "y value" in full precision.
void write_columns(std::ostream& out, const RadialFunction& f);
RadialFunction read_columns(std::istream& in);
/// JSON sidecar holding the tail descriptor and grid metadata.
std::string tail_sidecar_json(const RadialFunction& f);
void save(const RadialFunction& f, const std::string& path);
RadialFunction load_radial_function(const std::string& path);

}  // namespace smap
