#pragma once

#include <cmath>

#include "smap/errors.hpp"

namespace smap {

struct Vec3 {
  double x1 = 0.0;
  double x2 = 0.0;
  double x3 = 0.0;

  constexpr Vec3& operator+=(const Vec3& o) {
    x1 += o.x1;
    x2 += o.x2;
    x3 += o.x3;
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    x1 -= o.x1;
    x2 -= o.x2;
    x3 -= o.x3;
    return *this;
  }
  constexpr Vec3& operator*=(double s) {
    x1 *= s;
    x2 *= s;
    x3 *= s;
    return *this;
  }

  friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
  friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x1, -a.x2, -a.x3}; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) {
  return a.x1 * b.x1 + a.x2 * b.x2 + a.x3 * b.x3;
}

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.x2 * b.x3 - a.x3 * b.x2, a.x3 * b.x1 - a.x1 * b.x3,
          a.x1 * b.x2 - a.x2 * b.x1};
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline bool is_finite(const Vec3& a) {
  return std::isfinite(a.x1) && std::isfinite(a.x2) && std::isfinite(a.x3);
}

/// e^{θR} with R the generator (x1,x2,x3) -> (-x2, x1, 0): rotates the
/// (x1,x2) plane by θ and fixes x3.
inline Vec3 rotate(const Vec3& a, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {c * a.x1 - s * a.x2, s * a.x1 + c * a.x2, a.x3};
}

/// Unit vector in R^3: the pointwise value of a map into S^2.
///
/// Construction goes through `project` (divide by the norm) or `checked`
/// (reject anything further than `tol` from the sphere).
class SphereVec {
 public:
  static constexpr double kDefaultTolerance = 1e-12;

  constexpr SphereVec() : v_{0.0, 0.0, 1.0} {}

  static SphereVec project(const Vec3& v) {
    const double n = norm(v);
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw CorruptedStateError("cannot project a zero or non-finite vector onto S^2");
    }
    return SphereVec(v * (1.0 / n));
  }

  static SphereVec checked(const Vec3& v, double tol = kDefaultTolerance) {
    if (!is_finite(v) || std::abs(norm(v) - 1.0) > tol) {
      throw DomainError("vector is not on the unit sphere");
    }
    return SphereVec(v);
  }

  static constexpr SphereVec north() { return SphereVec(Vec3{0.0, 0.0, 1.0}); }

  constexpr const Vec3& vec() const { return v_; }
  constexpr operator const Vec3&() const { return v_; }  // NOLINT
  constexpr double x1() const { return v_.x1; }
  constexpr double x2() const { return v_.x2; }
  constexpr double x3() const { return v_.x3; }

  friend constexpr bool operator==(const SphereVec&, const SphereVec&) = default;

 private:
  constexpr explicit SphereVec(const Vec3& v) : v_(v) {}
  Vec3 v_;
};

}  // namespace smap
