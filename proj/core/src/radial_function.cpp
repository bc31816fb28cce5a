#include "smap/radial_function.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "smap/errors.hpp"
#include "smap/interp.hpp"

namespace smap {

RadialFunction::RadialFunction(RadialGrid grid, std::vector<double> samples,
                               std::optional<TailDescriptor> tail)
    : grid_(std::move(grid)), samples_(std::move(samples)), tail_(tail) {
  if (samples_.size() != grid_.size()) {
    throw GridMismatchError("radial function sample count does not match its grid");
  }
  for (double v : samples_) {
    if (!std::isfinite(v)) throw CorruptedStateError("radial function has a non-finite sample");
  }
}

RadialFunction RadialFunction::sample(const RadialGrid& grid,
                                      const std::function<double(double)>& f,
                                      std::optional<TailDescriptor> tail) {
  std::vector<double> s(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) s[i] = f(grid[i]);
  return RadialFunction(grid, std::move(s), tail);
}

double RadialFunction::at(double y) const {
  return interpolate_cubic(grid_, samples_, y);
}

bool RadialFunction::tail_consistent(double tolerance) const {
  if (!tail_) return true;
  const double hi = grid_.r_max();
  const double lo = hi / 10.0;
  double mn = std::numeric_limits<double>::infinity();
  double mx = -mn;
  std::size_t count = 0;
  for (std::size_t i = 0; i < size(); ++i) {
    const double y = grid_[i];
    if (y < lo || y <= 1.0) continue;
    const double model = std::pow(y, tail_->power_inf) * std::pow(std::log(y), tail_->log_power_inf);
    const double q = samples_[i] / model;
    mn = std::min(mn, q);
    mx = std::max(mx, q);
    ++count;
  }
  if (count < 2) return true;
  if (!(mn > 0.0) && !(mx < 0.0)) return false;
  return std::abs(mx / mn - 1.0) <= tolerance;
}

double inner_product(const RadialFunction& f, const RadialFunction& g) {
  if (!f.grid().same_nodes(g.grid())) throw GridMismatchError("inner product of functions on different grids");
  const auto& m = f.grid().measure();
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += m[i] * f[i] * g[i];
  return 2.0 * std::numbers::pi * acc;
}

double l2_norm(const RadialFunction& f) { return std::sqrt(inner_product(f, f)); }

void write_columns(std::ostream& out, const RadialFunction& f) {
  out << std::setprecision(17);
  for (std::size_t i = 0; i < f.size(); ++i) out << f.grid()[i] << ' ' << f[i] << '\n';
}

RadialFunction read_columns(std::istream& in) {
  std::vector<double> ys;
  std::vector<double> vs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    double y = 0.0;
    double v = 0.0;
    if (!(row >> y >> v)) throw IoError("malformed radial function row: '" + line + "'");
    ys.push_back(y);
    vs.push_back(v);
  }
  return RadialFunction(RadialGrid::from_nodes(std::move(ys)), std::move(vs));
}

std::string tail_sidecar_json(const RadialFunction& f) {
  nlohmann::json j;
  j["n"] = f.size();
  j["r_min"] = f.grid().r_min();
  j["r_max"] = f.grid().r_max();
  j["spacing"] = to_string(f.grid().spacing());
  if (f.tail()) {
    const auto& t = *f.tail();
    j["tail"] = {{"power_inf", t.power_inf},
                 {"log_power_inf", t.log_power_inf},
                 {"power_zero", t.power_zero},
                 {"log_power_zero", t.log_power_zero}};
  } else {
    j["tail"] = nullptr;
  }
  return j.dump(2);
}

void save(const RadialFunction& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_columns(out, f);
  std::ofstream side(path + ".json");
  if (!side) throw IoError("cannot open '" + path + ".json' for writing");
  side << tail_sidecar_json(f) << '\n';
}

RadialFunction load_radial_function(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  RadialFunction f = read_columns(in);
  std::ifstream side(path + ".json");
  if (side) {
    const auto j = nlohmann::json::parse(side);
    if (j.contains("tail") && !j["tail"].is_null()) {
      TailDescriptor t;
      t.power_inf = j["tail"].at("power_inf").get<double>();
      t.log_power_inf = j["tail"].at("log_power_inf").get<int>();
      t.power_zero = j["tail"].at("power_zero").get<double>();
      t.log_power_zero = j["tail"].at("log_power_zero").get<int>();
      f.set_tail(t);
    }
  }
  return f;
}

}  // namespace smap
