#pragma once

#include "rlf/dense.hpp"

namespace rlf {

using Matrix3 = Matrix<3>;
using Matrix4 = Matrix<4>;

/// Space-time position (t; x), indexed by proper time.
struct Position4 {
  double t = 0.0;
  Vec3 x{};

  Vec4 vec() const { return {t, x[0], x[1], x[2]}; }
  static Position4 from(const Vec4& v) { return {v[0], {v[1], v[2], v[3]}}; }
};

/// Augmented momentum (gamma; u). On the physical shell gamma^2 - |u|^2 = 1.
struct Velocity4 {
  double gamma = 1.0;
  Vec3 u{};

  Vec4 vec() const { return {gamma, u[0], u[1], u[2]}; }
  static Velocity4 from(const Vec4& v) { return {v[0], {v[1], v[2], v[3]}}; }

  /// (sqrt(1 + |u|^2); u).
  static Velocity4 on_shell(const Vec3& u) { return {std::sqrt(1.0 + dot(u, u)), u}; }
};

/// Conjugate momentum p = M u + A(x).
struct Momentum4 {
  Vec4 p{};
};

/// diag(-1, 1, 1, 1).
inline constexpr Matrix4 kMinkowski = Matrix4::diagonal({-1.0, 1.0, 1.0, 1.0});

/// M v; M is its own inverse.
constexpr Vec4 minkowski_apply(const Vec4& v) { return {-v[0], v[1], v[2], v[3]}; }

/// M A (flips the sign of row 0).
Matrix4 minkowski_apply(const Matrix4& a);

/// Solves a y = b by partial-pivoting elimination. Throws SingularMatrix.
Vec4 solve4(const Matrix4& a, const Vec4& b);

/// (I - z)^{-1} (I + z), computed as a four-column solve against I - z.
Matrix4 cayley(const Matrix4& z);

double det4(const Matrix4& a);

/// The cross-product matrix: hat(b) v = b x v.
constexpr Matrix3 hat(const Vec3& b) {
  Matrix3 m;
  m(0, 1) = -b[2];
  m(0, 2) = b[1];
  m(1, 0) = b[2];
  m(1, 2) = -b[0];
  m(2, 0) = -b[1];
  m(2, 1) = b[0];
  return m;
}

/// Matrix exponential by scaling and squaring with a Taylor kernel; used for
/// one-parameter Lorentz groups exp(s L).
Matrix4 expm4(const Matrix4& a);

} // namespace rlf
