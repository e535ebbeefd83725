#pragma once

// Fixed-size dense vectors and matrices with partial-pivoting LU.
// Everything is stack allocated; sizes used in the library are 3, 4 and 8.

#include <array>
#include <cmath>
#include <cstddef>
#include <utility>

#include "rlf/errors.hpp"

namespace rlf {

template <std::size_t N>
using Vec = std::array<double, N>;

using Vec3 = Vec<3>;
using Vec4 = Vec<4>;

template <std::size_t N>
constexpr Vec<N> operator+(const Vec<N>& a, const Vec<N>& b) {
  Vec<N> r{};
  for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + b[i];
  return r;
}

template <std::size_t N>
constexpr Vec<N> operator-(const Vec<N>& a, const Vec<N>& b) {
  Vec<N> r{};
  for (std::size_t i = 0; i < N; ++i) r[i] = a[i] - b[i];
  return r;
}

template <std::size_t N>
constexpr Vec<N> operator-(const Vec<N>& a) {
  Vec<N> r{};
  for (std::size_t i = 0; i < N; ++i) r[i] = -a[i];
  return r;
}

template <std::size_t N>
constexpr Vec<N> operator*(double s, const Vec<N>& a) {
  Vec<N> r{};
  for (std::size_t i = 0; i < N; ++i) r[i] = s * a[i];
  return r;
}

template <std::size_t N>
constexpr double dot(const Vec<N>& a, const Vec<N>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < N; ++i) s += a[i] * b[i];
  return s;
}

template <std::size_t N>
double norm2(const Vec<N>& a) {
  return std::sqrt(dot(a, a));
}

template <std::size_t N>
double norm_inf(const Vec<N>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

/// Row-major N x N matrix.
template <std::size_t N>
struct Matrix {
  std::array<double, N * N> a{};

  constexpr double& operator()(std::size_t i, std::size_t j) { return a[i * N + j]; }
  constexpr double operator()(std::size_t i, std::size_t j) const { return a[i * N + j]; }

  static constexpr Matrix identity() {
    Matrix m;
    for (std::size_t i = 0; i < N; ++i) m(i, i) = 1.0;
    return m;
  }

  static constexpr Matrix diagonal(const Vec<N>& d) {
    Matrix m;
    for (std::size_t i = 0; i < N; ++i) m(i, i) = d[i];
    return m;
  }

  constexpr Matrix transposed() const {
    Matrix t;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  constexpr Vec<N> column(std::size_t j) const {
    Vec<N> c{};
    for (std::size_t i = 0; i < N; ++i) c[i] = (*this)(i, j);
    return c;
  }

  constexpr void set_column(std::size_t j, const Vec<N>& c) {
    for (std::size_t i = 0; i < N; ++i) (*this)(i, j) = c[i];
  }

  /// Induced infinity norm (max absolute row sum).
  double norm_inf() const {
    double m = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < N; ++j) s += std::abs((*this)(i, j));
      m = std::max(m, s);
    }
    return m;
  }

  friend constexpr bool operator==(const Matrix&, const Matrix&) = default;
};

template <std::size_t N>
constexpr Matrix<N> operator+(const Matrix<N>& x, const Matrix<N>& y) {
  Matrix<N> r;
  for (std::size_t k = 0; k < N * N; ++k) r.a[k] = x.a[k] + y.a[k];
  return r;
}

template <std::size_t N>
constexpr Matrix<N> operator-(const Matrix<N>& x, const Matrix<N>& y) {
  Matrix<N> r;
  for (std::size_t k = 0; k < N * N; ++k) r.a[k] = x.a[k] - y.a[k];
  return r;
}

template <std::size_t N>
constexpr Matrix<N> operator*(double s, const Matrix<N>& x) {
  Matrix<N> r;
  for (std::size_t k = 0; k < N * N; ++k) r.a[k] = s * x.a[k];
  return r;
}

template <std::size_t N>
constexpr Matrix<N> operator*(const Matrix<N>& x, const Matrix<N>& y) {
  Matrix<N> r;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t k = 0; k < N; ++k) {
      const double xik = x(i, k);
      for (std::size_t j = 0; j < N; ++j) r(i, j) += xik * y(k, j);
    }
  return r;
}

template <std::size_t N>
constexpr Vec<N> operator*(const Matrix<N>& x, const Vec<N>& v) {
  Vec<N> r{};
  for (std::size_t i = 0; i < N; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < N; ++j) s += x(i, j) * v[j];
    r[i] = s;
  }
  return r;
}

/// Largest absolute entry.
template <std::size_t N>
double max_abs(const Matrix<N>& x) {
  double m = 0.0;
  for (double v : x.a) m = std::max(m, std::abs(v));
  return m;
}

/// Gaussian elimination with partial pivoting, factored once and reusable
/// for several right-hand sides.
template <std::size_t N>
class LuFactor {
public:
  /// Pivots smaller than this multiple of the matrix infinity norm are singular.
  static constexpr double kPivotThreshold = 1e-14;

  explicit LuFactor(const Matrix<N>& m) : lu_(m) {
    const double scale = m.norm_inf();
    if (!(scale > 0.0) || !std::isfinite(scale)) throw SingularMatrix("zero or non-finite matrix");
    for (std::size_t i = 0; i < N; ++i) perm_[i] = i;
    for (std::size_t k = 0; k < N; ++k) {
      std::size_t p = k;
      double best = std::abs(lu_(k, k));
      for (std::size_t i = k + 1; i < N; ++i) {
        if (std::abs(lu_(i, k)) > best) {
          best = std::abs(lu_(i, k));
          p = i;
        }
      }
      if (best < kPivotThreshold * scale) throw SingularMatrix("pivot below threshold in column " + std::to_string(k));
      if (p != k) {
        for (std::size_t j = 0; j < N; ++j) std::swap(lu_(k, j), lu_(p, j));
        std::swap(perm_[k], perm_[p]);
      }
      const double inv = 1.0 / lu_(k, k);
      for (std::size_t i = k + 1; i < N; ++i) {
        const double f = lu_(i, k) * inv;
        lu_(i, k) = f;
        for (std::size_t j = k + 1; j < N; ++j) lu_(i, j) -= f * lu_(k, j);
      }
    }
  }

  Vec<N> solve(const Vec<N>& b) const {
    Vec<N> y{};
    for (std::size_t i = 0; i < N; ++i) {
      double s = b[perm_[i]];
      for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * y[j];
      y[i] = s;
    }
    for (std::size_t ii = N; ii-- > 0;) {
      double s = y[ii];
      for (std::size_t j = ii + 1; j < N; ++j) s -= lu_(ii, j) * y[j];
      y[ii] = s / lu_(ii, ii);
    }
    return y;
  }

  Matrix<N> solve(const Matrix<N>& rhs) const {
    Matrix<N> x;
    for (std::size_t j = 0; j < N; ++j) x.set_column(j, solve(rhs.column(j)));
    return x;
  }

private:
  Matrix<N> lu_;
  std::array<std::size_t, N> perm_{};
};

/// Determinant by pivoted elimination; exactly 0 when a column has no nonzero pivot.
template <std::size_t N>
double determinant(Matrix<N> m) {
  double det = 1.0;
  for (std::size_t k = 0; k < N; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < N; ++i)
      if (std::abs(m(i, k)) > std::abs(m(p, k))) p = i;
    if (m(p, k) == 0.0) return 0.0;
    if (p != k) {
      for (std::size_t j = 0; j < N; ++j) std::swap(m(k, j), m(p, j));
      det = -det;
    }
    det *= m(k, k);
    for (std::size_t i = k + 1; i < N; ++i) {
      const double f = m(i, k) / m(k, k);
      for (std::size_t j = k + 1; j < N; ++j) m(i, j) -= f * m(k, j);
    }
  }
  return det;
}

} // namespace rlf
