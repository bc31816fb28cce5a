#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace smap {

enum class Spacing { Uniform, GeometricStretch, Custom };

std::string to_string(Spacing s);
Spacing spacing_from_string(const std::string& s);

/// Recipe for a radial grid. For GeometricStretch the nodes are
/// r_i = r_max * sinh(stretch * i / n) / sinh(stretch), i = 1..n, which is
/// locally uniform near the origin and stretches smoothly outward.
struct GridSpec {
  Spacing spacing = Spacing::GeometricStretch;
  std::size_t n = 1024;
  double r_max = 50.0;
  double stretch = 4.0;
};

/// Strictly increasing positive nodes r_1 < ... < r_N = r_max.
///
/// The origin is never a node. Operators that need a value there treat
/// r_0 = 0 as an implicit boundary node.
class RadialGrid {
 public:
  static RadialGrid uniform(std::size_t n, double r_max);
  static RadialGrid geometric(std::size_t n, double r_max, double stretch);
  static RadialGrid from_spec(const GridSpec& spec);
  static RadialGrid from_nodes(std::vector<double> nodes);

  std::size_t size() const { return nodes_.size(); }
  double operator[](std::size_t i) const { return nodes_[i]; }
  std::span<const double> nodes() const { return nodes_; }
  double r_min() const { return nodes_.front(); }
  double r_max() const { return nodes_.back(); }
  Spacing spacing() const { return spacing_; }
  double stretch() const { return stretch_; }

  /// Distance from the origin to the first node.
  double inner_spacing() const { return nodes_.front(); }
  double max_spacing() const;

  /// Nodes multiplied by `factor` (> 0). Used to move between the physical
  /// variable r and the self-similar variable y = r / lambda.
  RadialGrid scaled(double factor) const;

  /// Trapezoid weights for the radial measure r dr on [0, r_max]. The
  /// implicit origin node carries no weight because the integrand vanishes
  /// there.
  const std::vector<double>& measure() const { return measure_; }

  /// Face coefficients of the conservative radial Laplacian: entry i is
  /// r_{i-1/2} / (r_i - r_{i-1}) for the face between node i-1 and node i,
  /// with node -1 the implicit origin.
  const std::vector<double>& faces() const { return faces_; }

  /// Index i with nodes[i] <= r < nodes[i+1], clamped to [0, N-2].
  std::size_t bracket(double r) const;

  bool same_nodes(const RadialGrid& other, double rel_tol = 1e-13) const;

 private:
  RadialGrid(std::vector<double> nodes, Spacing spacing, double stretch);

  std::vector<double> nodes_;
  std::vector<double> measure_;
  std::vector<double> faces_;
  Spacing spacing_ = Spacing::Custom;
  double stretch_ = 0.0;
};

}  // namespace smap
