#include <doctest.h>

#include <cmath>
#include <random>

#include "rlf/errors.hpp"
#include "rlf/fields.hpp"

using namespace rlf;

namespace {

const BuiltinField kAll[] = {BuiltinField::Example1,   BuiltinField::Example2,     BuiltinField::Example3,
                             BuiltinField::ConstantEB, BuiltinField::Axisymmetric, BuiltinField::Zero};

Vec3 random_point(std::mt19937_64& rng, double r = 1.5) {
  std::uniform_real_distribution<double> d(-r, r);
  return {d(rng), d(rng), d(rng)};
}

// Field values written out by hand from the model formulas.
double example2_phi(const Vec3& x) {
  return std::pow(x[0], 3) - std::pow(x[1], 3) + std::pow(x[0], 4) / 5 + std::pow(x[1], 4) + std::pow(x[2], 4);
}

Vec3 stated_b(BuiltinField kind, const Vec3& x) {
  const double r = std::hypot(x[0], x[1]);
  switch (kind) {
  case BuiltinField::Example1:
  case BuiltinField::Example2:
  case BuiltinField::Axisymmetric:
    return {0, 0, r};
  case BuiltinField::Example3:
  case BuiltinField::ConstantEB:
    return {0, 0, 1};
  case BuiltinField::Zero:
    break;
  }
  return {0, 0, 0};
}

} // namespace

TEST_CASE("faraday tensor layout") {
  const Matrix4 fe = faraday(Vec3{1, 0, 0}, Vec3{0, 0, 0});
  Matrix4 expected;
  expected(0, 1) = -1.0;
  expected(1, 0) = 1.0;
  CHECK(fe == expected);

  const Matrix4 fb = faraday(Vec3{0, 0, 0}, Vec3{0, 0, 1});
  Matrix4 eb;
  eb(1, 2) = 1.0;
  eb(2, 1) = -1.0;
  CHECK(fb == eb);
}

TEST_CASE("Example1 fields at the initial point") {
  const FieldPtr m = make_builtin(BuiltinField::Example1);
  const Vec3 x{0, 1, 0.1};
  CHECK(m->phi(x) == doctest::Approx(2.03).epsilon(1e-15));
  const Vec3 e = m->electric(x);
  CHECK(e[0] == doctest::Approx(1.0));
  CHECK(e[1] == doctest::Approx(-4.0));
  CHECK(e[2] == doctest::Approx(-0.6));
  const Vec3 b = m->magnetic(x);
  CHECK(norm_inf(b - Vec3{0, 0, 1}) <= 1e-15);
}

TEST_CASE("Example2 potential matches the quartic formula") {
  const FieldPtr m = make_builtin(BuiltinField::Example2);
  std::mt19937_64 rng(5);
  for (int k = 0; k < 50; ++k) {
    const Vec3 x = random_point(rng);
    CHECK(m->phi(x) == doctest::Approx(example2_phi(x)).epsilon(1e-14));
  }
}

TEST_CASE("derived E and B agree with finite differences") {
  std::mt19937_64 rng(17);
  const double d = 1e-6;
  for (BuiltinField kind : kAll) {
    const FieldPtr m = make_builtin(kind);
    for (int k = 0; k < 20; ++k) {
      const Vec3 x = random_point(rng);
      Vec3 fd_grad{};
      Matrix3 fd_jac;
      for (std::size_t j = 0; j < 3; ++j) {
        Vec3 xp = x;
        Vec3 xm = x;
        xp[j] += d;
        xm[j] -= d;
        fd_grad[j] = (m->phi(xp) - m->phi(xm)) / (2 * d);
        const Vec3 da = (1.0 / (2 * d)) * (m->vector_potential(xp) - m->vector_potential(xm));
        for (std::size_t i = 0; i < 3; ++i) fd_jac(i, j) = da[i];
      }
      const Vec3 fd_curl{fd_jac(2, 1) - fd_jac(1, 2), fd_jac(0, 2) - fd_jac(2, 0), fd_jac(1, 0) - fd_jac(0, 1)};
      CHECK(norm_inf(m->electric(x) + fd_grad) <= 1e-6);
      CHECK(norm_inf(m->magnetic(x) - fd_curl) <= 1e-6);
    }
  }
}

TEST_CASE("curl of the chosen gauge equals the stated B") {
  std::mt19937_64 rng(23);
  for (BuiltinField kind : kAll) {
    const FieldPtr m = make_builtin(kind);
    for (int k = 0; k < 100; ++k) {
      const Vec3 x = random_point(rng);
      CHECK(norm_inf(m->magnetic(x) - stated_b(kind, x)) <= 1e-12);
    }
  }
  // On the symmetry axis the swirl Jacobian takes its continuous limit.
  const FieldPtr m = make_builtin(BuiltinField::Example1);
  CHECK(norm_inf(m->magnetic({0, 0, 0.3})) == 0.0);
}

TEST_CASE("augmented potential and its Jacobian") {
  const FieldPtr m = make_builtin(BuiltinField::Example2);
  const Vec3 x{0.3, -0.7, 0.2};
  const Vec4 a = m->aug_potential(x);
  CHECK(a[0] == -m->phi(x));
  const Matrix4 j = m->aug_potential_jacobian(x);
  for (std::size_t i = 0; i < 4; ++i) CHECK(j(i, 0) == 0.0);
  CHECK(max_abs(faraday(*m, x) - (j.transposed() - j)) <= 1e-15);
}

TEST_CASE("midpoint discrete gradient") {
  SUBCASE("exact on linear potentials") {
    const FieldPtr m = make_constant_eb({1.0, -2.0, 0.5}, {0, 0, 0});
    const Vec3 g = midpoint_dgrad(*m, {0.3, 0.1, 2.0}, {-1.0, 0.7, 0.4});
    CHECK(norm_inf(g - Vec3{-1.0, 2.0, -0.5}) <= 1e-15);
  }
  SUBCASE("coincident points give the gradient") {
    const FieldPtr m = make_builtin(BuiltinField::Example2);
    const Vec3 x{0.2, 0.9, -0.3};
    CHECK(midpoint_dgrad(*m, x, x) == m->grad_phi(x));
  }
  SUBCASE("Example2 difference quotient") {
    const FieldPtr m = make_builtin(BuiltinField::Example2);
    const Vec3 xo{0, 1, 0.1};
    const Vec3 xn{0.1, 1.05, 0.12};
    const Vec3 g = midpoint_dgrad(*m, xn, xo);
    CHECK(std::abs(dot(g, xn - xo) - (example2_phi(xn) - example2_phi(xo))) <= 1e-14);
  }
}

TEST_CASE("average vector field discrete gradient") {
  SUBCASE("quadratic potential gives the midpoint gradient") {
    const FieldPtr m = make_builtin(BuiltinField::Example1);
    const Vec3 xo{0, 1, 0.1};
    const Vec3 xn{0.4, 0.6, -0.2};
    CHECK(norm_inf(avf_dgrad(*m, xn, xo) - m->grad_phi(0.5 * (xn + xo))) <= 1e-14);
  }
  SUBCASE("coincident points give the gradient") {
    const FieldPtr m = make_builtin(BuiltinField::Example2);
    const Vec3 x{0.2, 0.9, -0.3};
    CHECK(norm_inf(avf_dgrad(*m, x, x) - m->grad_phi(x)) <= 1e-15);
  }
  SUBCASE("Example2 difference quotient") {
    const FieldPtr m = make_builtin(BuiltinField::Example2);
    const Vec3 xo{0, 1, 0.1};
    const Vec3 xn{0.1, 1.05, 0.12};
    const Vec3 g = avf_dgrad(*m, xn, xo);
    CHECK(std::abs(dot(g, xn - xo) - (example2_phi(xn) - example2_phi(xo))) <= 1e-13);
  }
}

TEST_CASE("discrete gradient conditions on every built-in model") {
  std::mt19937_64 rng(29);
  for (BuiltinField kind : kAll) {
    const FieldPtr m = make_builtin(kind);
    for (auto dg : {DiscreteGradientKind::Midpoint, DiscreteGradientKind::AverageVectorField}) {
      for (int k = 0; k < 100; ++k) {
        const Vec3 a = random_point(rng);
        const Vec3 b = random_point(rng);
        const double lhs = dot(discrete_gradient(*m, dg, a, b), a - b);
        const double rhs = m->phi(a) - m->phi(b);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * (1 + std::abs(m->phi(a)) + std::abs(m->phi(b))));
      }
    }
  }
}

TEST_CASE("discrete-gradient Faraday tensor") {
  const Vec3 xn{0.3, 1.1, 0.2};
  const Vec3 xo{0.1, 0.9, 0.15};
  const Vec3 mid{0.2, 1.0, 0.17};
  SUBCASE("constant E reproduces the Faraday tensor") {
    const FieldPtr m = make_constant_eb({1, 0.5, 0}, {0, 0.3, 1});
    for (auto dg : {DiscreteGradientKind::Midpoint, DiscreteGradientKind::AverageVectorField})
      CHECK(max_abs(dg_faraday(*m, dg, xn, xo, mid) - faraday(*m, mid)) <= 1e-15);
  }
  SUBCASE("zero field") {
    const FieldPtr m = make_builtin(BuiltinField::Zero);
    CHECK(dg_faraday(*m, DiscreteGradientKind::Midpoint, xn, xo, mid) == Matrix4{});
  }
  SUBCASE("skew-symmetric by construction") {
    const FieldPtr m = make_builtin(BuiltinField::Example2);
    for (auto dg : {DiscreteGradientKind::Midpoint, DiscreteGradientKind::AverageVectorField}) {
      const Matrix4 f = dg_faraday(*m, dg, xn, xo, mid);
      CHECK(max_abs(f + f.transposed()) == 0.0);
    }
  }
}

TEST_CASE("axisymmetric model is invariant under rotations about x3") {
  const FieldPtr m = make_builtin(BuiltinField::Axisymmetric);
  Matrix4 l;
  l(1, 2) = -1.0;
  l(2, 1) = 1.0;
  std::mt19937_64 rng(31);
  for (double s : {0.1, 1.0, M_PI}) {
    const Matrix4 g = expm4(s * l);
    for (int k = 0; k < 20; ++k) {
      const Vec3 x = random_point(rng);
      const Position4 gx = Position4::from(g * Position4{0.0, x}.vec());
      const Vec4 lhs = g.transposed() * m->aug_potential(gx.x);
      CHECK(norm_inf(lhs - m->aug_potential(x)) <= 1e-12);
    }
  }
}

TEST_CASE("polynomial validation and scaling") {
  CHECK_THROWS_AS(Polynomial3(std::vector<Polynomial3::Term>{{1.0, {7, 0, 0}}}), ValidationError);
  CHECK_THROWS_AS(Polynomial3(std::vector<Polynomial3::Term>{{1.0, {0, -1, 0}}}), ValidationError);

  const FieldPtr base = make_builtin(BuiltinField::Example1);
  const ScaledField scaled(base, 0.25, 0.5);
  const Vec3 x{0.3, 0.4, 0.5};
  CHECK(scaled.phi(x) == doctest::Approx(0.25 * base->phi(x)));
  CHECK(norm_inf(scaled.magnetic(x) - 0.5 * base->magnetic(x)) <= 1e-15);
  CHECK(norm_inf(scaled.electric(x) - 0.25 * base->electric(x)) <= 1e-15);
}
