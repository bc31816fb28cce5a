#include "smap/radial_grid.hpp"

#include <algorithm>
#include <cmath>

#include "smap/errors.hpp"

namespace smap {

std::string to_string(Spacing s) {
  switch (s) {
    case Spacing::Uniform:
      return "uniform";
    case Spacing::GeometricStretch:
      return "geometric";
    case Spacing::Custom:
      return "custom";
  }
  return "custom";
}

Spacing spacing_from_string(const std::string& s) {
  if (s == "uniform") return Spacing::Uniform;
  if (s == "geometric") return Spacing::GeometricStretch;
  if (s == "custom") return Spacing::Custom;
  throw ConfigError("unknown grid spacing '" + s + "'");
}

RadialGrid::RadialGrid(std::vector<double> nodes, Spacing spacing, double stretch)
    : nodes_(std::move(nodes)), spacing_(spacing), stretch_(stretch) {
  if (nodes_.size() < 2) throw DomainError("radial grid needs at least two nodes");
  if (!(nodes_.front() > 0.0)) throw DomainError("radial grid must start at r > 0");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!std::isfinite(nodes_[i])) throw DomainError("radial grid has a non-finite node");
    if (i > 0 && !(nodes_[i] > nodes_[i - 1])) {
      throw DomainError("radial grid nodes must be strictly increasing");
    }
  }
  const std::size_t n = nodes_.size();
  measure_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i == 0 ? 0.0 : nodes_[i - 1];
    const double right = i + 1 == n ? nodes_[i] : nodes_[i + 1];
    measure_[i] = nodes_[i] * 0.5 * (right - left);
  }
  faces_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i == 0 ? 0.0 : nodes_[i - 1];
    faces_[i] = 0.5 * (left + nodes_[i]) / (nodes_[i] - left);
  }
}

RadialGrid RadialGrid::uniform(std::size_t n, double r_max) {
  if (n < 2 || !(r_max > 0.0)) throw DomainError("uniform grid needs n >= 2 and r_max > 0");
  std::vector<double> nodes(n);
  const double h = r_max / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) nodes[i] = h * static_cast<double>(i + 1);
  nodes.back() = r_max;
  return RadialGrid(std::move(nodes), Spacing::Uniform, 0.0);
}

RadialGrid RadialGrid::geometric(std::size_t n, double r_max, double stretch) {
  if (n < 2 || !(r_max > 0.0)) throw DomainError("geometric grid needs n >= 2 and r_max > 0");
  if (!(stretch > 0.0)) return uniform(n, r_max);
  std::vector<double> nodes(n);
  const double denom = std::sinh(stretch);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = static_cast<double>(i + 1) / static_cast<double>(n);
    nodes[i] = r_max * std::sinh(stretch * xi) / denom;
  }
  nodes.back() = r_max;
  return RadialGrid(std::move(nodes), Spacing::GeometricStretch, stretch);
}

RadialGrid RadialGrid::from_spec(const GridSpec& spec) {
  switch (spec.spacing) {
    case Spacing::Uniform:
      return uniform(spec.n, spec.r_max);
    case Spacing::GeometricStretch:
      return geometric(spec.n, spec.r_max, spec.stretch);
    case Spacing::Custom:
      break;
  }
  throw ConfigError("a custom grid cannot be built from a spec");
}

RadialGrid RadialGrid::from_nodes(std::vector<double> nodes) {
  return RadialGrid(std::move(nodes), Spacing::Custom, 0.0);
}

double RadialGrid::max_spacing() const {
  double h = nodes_.front();
  for (std::size_t i = 1; i < nodes_.size(); ++i) h = std::max(h, nodes_[i] - nodes_[i - 1]);
  return h;
}

RadialGrid RadialGrid::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw DomainError("grid scale factor must be positive");
  std::vector<double> nodes(nodes_);
  for (double& r : nodes) r *= factor;
  // Uniform stays uniform under scaling; the stretch law is scale-free too.
  return RadialGrid(std::move(nodes), spacing_, stretch_);
}

std::size_t RadialGrid::bracket(double r) const {
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), r);
  std::size_t i = it == nodes_.begin() ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
  return std::min(i, nodes_.size() - 2);
}

bool RadialGrid::same_nodes(const RadialGrid& other, double rel_tol) const {
  if (other.size() != size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    if (std::abs(nodes_[i] - other.nodes_[i]) > rel_tol * std::abs(nodes_[i])) return false;
  }
  return true;
}

}  // namespace smap
