#include "rlf/minkowski.hpp"

#include <cmath>

namespace rlf {

Matrix4 minkowski_apply(const Matrix4& a) {
  Matrix4 r = a;
  for (std::size_t j = 0; j < 4; ++j) r(0, j) = -r(0, j);
  return r;
}

Vec4 solve4(const Matrix4& a, const Vec4& b) { return LuFactor<4>(a).solve(b); }

Matrix4 cayley(const Matrix4& z) {
  const Matrix4 id = Matrix4::identity();
  return LuFactor<4>(id - z).solve(id + z);
}

double det4(const Matrix4& a) { return determinant(a); }

Matrix4 expm4(const Matrix4& a) {
  const double n = a.norm_inf();
  int squarings = 0;
  if (n > 0.5) squarings = static_cast<int>(std::ceil(std::log2(n / 0.5)));
  const Matrix4 scaled = std::ldexp(1.0, -squarings) * a;

  // ||scaled|| <= 1/2, so 18 terms reach double round-off.
  Matrix4 term = Matrix4::identity();
  Matrix4 sum = term;
  for (int k = 1; k <= 18; ++k) {
    term = (1.0 / k) * (term * scaled);
    sum = sum + term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

} // namespace rlf
