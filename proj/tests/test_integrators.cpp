#include <doctest.h>

#include <cmath>
#include <random>

#include "rlf/diagnostics.hpp"

using namespace rlf;

namespace {

const Position4 kX0{0.0, {0, 1, 0.1}};
const Vec3 kU0{0.09, 0.05, 0.2};

// Gauss-Jordan elimination with full pivoting on a copy; test-side oracle.
Vec4 brute_force_solve(Matrix4 a, Vec4 b) {
  std::array<std::size_t, 4> col{0, 1, 2, 3};
  for (std::size_t k = 0; k < 4; ++k) {
    std::size_t pr = k;
    std::size_t pc = k;
    for (std::size_t i = k; i < 4; ++i)
      for (std::size_t j = k; j < 4; ++j)
        if (std::abs(a(i, j)) > std::abs(a(pr, pc))) {
          pr = i;
          pc = j;
        }
    for (std::size_t j = 0; j < 4; ++j) std::swap(a(k, j), a(pr, j));
    std::swap(b[k], b[pr]);
    for (std::size_t i = 0; i < 4; ++i) std::swap(a(i, k), a(i, pc));
    std::swap(col[k], col[pc]);
    for (std::size_t i = 0; i < 4; ++i) {
      if (i == k) continue;
      const double f = a(i, k) / a(k, k);
      for (std::size_t j = k; j < 4; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  Vec4 y{};
  for (std::size_t k = 0; k < 4; ++k) y[col[k]] = b[k] / a(k, k);
  return y;
}

HalfStepState example1_start(double h) {
  const FieldPtr m = make_builtin(BuiltinField::Example1);
  return start_state(*m, kX0, Velocity4::on_shell(kU0), h);
}

} // namespace

TEST_CASE("settings and step-size validation") {
  CHECK_THROWS_AS((SolverSettings{0.0, 50}.validate()), ValidationError);
  CHECK_THROWS_AS((SolverSettings{1e-14, 0}.validate()), ValidationError);
  CHECK_NOTHROW(SolverSettings{}.validate());
  const FieldPtr m = make_builtin(BuiltinField::Example1);
  CHECK_THROWS_AS(check_step_size(*m, kX0.x, 5.0), ValidationError);
  CHECK_NOTHROW(check_step_size(*m, kX0.x, 0.02));
}

TEST_CASE("start_half_step") {
  const FieldPtr zero = make_builtin(BuiltinField::Zero);
  const Velocity4 u0 = Velocity4::on_shell(kU0);
  SUBCASE("zero field keeps u0") {
    const Velocity4 u = start_half_step(*zero, kX0, u0, 0.02);
    CHECK(u.u == kU0);
    CHECK(u.gamma == doctest::Approx(1.0249878).epsilon(1e-7));
    CHECK(u.gamma == std::sqrt(1.0506));
  }
  SUBCASE("h = 0") {
    const FieldPtr m = make_builtin(BuiltinField::Example1);
    const Velocity4 u = start_half_step(*m, kX0, u0, 0.0);
    CHECK(u.vec() == u0.vec());
  }
  SUBCASE("on shell by construction") {
    const FieldPtr m = make_builtin(BuiltinField::Example1);
    const Velocity4 u = start_half_step(*m, kX0, u0, 0.01);
    CHECK(std::abs(u.gamma * u.gamma - 1.0 - dot(u.u, u.u)) <= 1e-15);
    // Spatial part: u0 + h/2 (gamma E + u x B).
    const Vec3 expected = kU0 + 0.005 * (u0.gamma * m->electric(kX0.x) + cross(kU0, m->magnetic(kX0.x)));
    CHECK(norm_inf(u.u - expected) <= 1e-16);
  }
}

TEST_CASE("explicit leapfrog step") {
  SUBCASE("free particle") {
    const FieldPtr zero = make_builtin(BuiltinField::Zero);
    const HalfStepState s{kX0, Velocity4::on_shell(kU0), 3};
    const HalfStepState next = explicit_lf_step(*zero, s, 0.1);
    CHECK(next.u_half.vec() == s.u_half.vec());
    CHECK(norm_inf(next.xn.vec() - (kX0.vec() + 0.1 * s.u_half.vec())) == 0.0);
    CHECK(next.step == 4);
  }
  SUBCASE("mass shell is preserved by each step") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    const FieldPtr m = make_builtin(BuiltinField::Example2);
    for (int k = 0; k < 100; ++k) {
      const HalfStepState s{{d(rng), {d(rng), d(rng), d(rng)}}, Velocity4::on_shell({d(rng), d(rng), d(rng)}), 0};
      const HalfStepState next = explicit_lf_step(*m, s, 0.02);
      // Relative to the size of the terms in -gamma^2 + |u|^2.
      const double scale = next.u_half.gamma * next.u_half.gamma;
      CHECK(std::abs(mass_shell(next.u_half) - mass_shell(s.u_half)) <= 5e-16 * scale);
    }
  }
  SUBCASE("Example1 step against a brute-force solve") {
    const double h = 0.02;
    const FieldPtr m = make_builtin(BuiltinField::Example1);
    const HalfStepState s = example1_start(h);
    const HalfStepState next = explicit_lf_step(*m, s, h);
    const Matrix4 f = faraday(*m, s.xn.x);
    const Vec4 u = brute_force_solve(kMinkowski - (0.5 * h) * f, (kMinkowski + (0.5 * h) * f) * s.u_half.vec());
    CHECK(norm_inf(next.u_half.vec() - u) <= 1e-15 * norm_inf(u));
    CHECK(norm_inf(next.xn.vec() - (s.xn.vec() + h * u)) <= 1e-15);
  }
}

TEST_CASE("gamma relation and mass shell over many explicit steps") {
  const double h = 0.02;
  const FieldPtr m = make_builtin(BuiltinField::Example1);
  HalfStepState s = example1_start(h);
  const double shell0 = mass_shell(s.u_half);
  double worst_gamma = 0.0;
  double worst_shell = 0.0;
  for (int n = 0; n < 100000; ++n) {
    s = explicit_lf_step(*m, s, h);
    worst_gamma = std::max(worst_gamma, std::abs(s.u_half.gamma - std::sqrt(1 + dot(s.u_half.u, s.u_half.u))));
    worst_shell = std::max(worst_shell, std::abs(mass_shell(s.u_half) - shell0));
  }
  CHECK(worst_gamma <= 1e-11);
  CHECK(worst_shell <= 1e-11);
}

TEST_CASE("discrete-gradient leapfrog step") {
  const SolverSettings settings;
  SUBCASE("constant fields coincide with the explicit step") {
    const FieldPtr m = make_constant_eb({0.3, 0.1, 0}, {0, 0.5, 1});
    HalfStepState s{kX0, Velocity4::on_shell(kU0), 1};
    for (auto kind : {DiscreteGradientKind::Midpoint, DiscreteGradientKind::AverageVectorField}) {
      const HalfStepState a = explicit_lf_step(*m, s, 0.05);
      const HalfStepState b = dg_lf_step(*m, kind, s, 0.05, settings);
      CHECK(norm_inf(a.u_half.vec() - b.u_half.vec()) <= settings.tol * 10);
      CHECK(norm_inf(a.xn.vec() - b.xn.vec()) <= settings.tol * 10);
    }
  }
  SUBCASE("zero field is the identity on u") {
    const FieldPtr zero = make_builtin(BuiltinField::Zero);
    const HalfStepState s{kX0, Velocity4::on_shell(kU0), 1};
    const HalfStepState next = dg_lf_step(*zero, DiscreteGradientKind::Midpoint, s, 0.1, settings);
    CHECK(next.u_half.vec() == s.u_half.vec());
  }
  SUBCASE("Example2 half-step energy over 1000 steps") {
    const double h = 0.001;
    const FieldPtr m = make_builtin(BuiltinField::Example2);
    for (auto kind : {DiscreteGradientKind::Midpoint, DiscreteGradientKind::AverageVectorField}) {
      HalfStepState s = start_state(*m, kX0, Velocity4::on_shell({0.09, 0.55, 0.3}), h);
      auto half_energy = [&](const HalfStepState& st) {
        return st.u_half.gamma + m->phi(st.xn.x - (0.5 * h) * st.u_half.u);
      };
      const double e0 = half_energy(s);
      double worst = 0.0;
      for (int n = 0; n < 1000; ++n) {
        s = dg_lf_step(*m, kind, s, h, settings);
        worst = std::max(worst, std::abs(half_energy(s) - e0) / std::abs(e0));
      }
      CHECK(worst <= 1e-11);
    }
  }
  SUBCASE("unreachable tolerance reports NoConvergence") {
    const FieldPtr m = make_builtin(BuiltinField::Example2);
    const HalfStepState s = start_state(*m, kX0, Velocity4::on_shell({0.09, 0.55, 0.3}), 0.01);
    CHECK_THROWS_AS(dg_lf_step(*m, DiscreteGradientKind::Midpoint, s, 0.01, SolverSettings{1e-300, 3}),
                    NoConvergence);
  }
}

TEST_CASE("variational step") {
  const SolverSettings settings;
  SUBCASE("constant fields: one Newton iteration, same trajectory as explicit leapfrog") {
    const FieldPtr m = make_constant_eb({0.3, 0.1, 0}, {0, 0.5, 1});
    const double h = 0.05;
    const HalfStepState first = start_state(*m, kX0, Velocity4::on_shell(kU0), h);
    PhaseState p{kX0, phase_momentum_for(*m, kX0, first.u_half, h), 0};
    HalfStepState e = first;
    VariationalStep v = variational_advance(*m, p, h, settings);
    CHECK(v.stats.iterations <= 1);
    CHECK(norm_inf(v.next.xn.vec() - first.xn.vec()) <= 1e-15);
    for (int n = 0; n < 50; ++n) {
      e = explicit_lf_step(*m, e, h);
      v = variational_advance(*m, v.next, h, settings);
      CHECK(v.stats.iterations <= 1);
      CHECK(norm_inf(v.next.xn.vec() - e.xn.vec()) <= 1e-12);
    }
  }
  SUBCASE("zero field") {
    const FieldPtr zero = make_builtin(BuiltinField::Zero);
    const PhaseState s{kX0, {{-1.2, 0.3, 0.4, -0.5}}, 0};
    const PhaseState next = variational_step(*zero, s, 0.1, settings);
    CHECK(norm_inf(next.xn.vec() - (kX0.vec() + 0.1 * minkowski_apply(s.pn.p))) <= 1e-16);
    CHECK(next.pn.p == s.pn.p);
  }
  SUBCASE("first momentum component is minus the discrete energy") {
    const double h = 0.02;
    const FieldPtr m = make_builtin(BuiltinField::Example1);
    PhaseState s{kX0, canonical_momentum(*m, kX0, Velocity4::on_shell(kU0)), 0};
    for (int n = 0; n < 20; ++n) {
      const VariationalStep v = variational_advance(*m, s, h, settings);
      const double discrete = v.u_half.gamma + 0.5 * (m->phi(s.xn.x) + m->phi(v.next.xn.x));
      CHECK(s.pn.p[0] == doctest::Approx(-discrete).epsilon(1e-14));
      CHECK(v.next.pn.p[0] == doctest::Approx(-discrete).epsilon(1e-14));
      s = v.next;
    }
  }
  SUBCASE("unreachable tolerance reports NoConvergence") {
    const FieldPtr m = make_builtin(BuiltinField::Example1);
    const PhaseState s{kX0, canonical_momentum(*m, kX0, Velocity4::on_shell(kU0)), 0};
    CHECK_THROWS_AS(variational_step(*m, s, 0.02, SolverSettings{1e-300, 2}), NoConvergence);
  }
}

TEST_CASE("two-step residual of the discrete Euler-Lagrange equations") {
  SUBCASE("collinear points in a zero field") {
    const FieldPtr zero = make_builtin(BuiltinField::Zero);
    const Position4 a{0, {0, 0, 0}};
    const Position4 b{0.5, {0.1, 0.2, 0.3}};
    const Position4 c{1.0, {0.2, 0.4, 0.6}};
    CHECK(norm_inf(variational_two_step_residual(*zero, a, b, c, 0.5)) <= 1e-15);
  }
  SUBCASE("triples from the one-step map") {
    const double h = 0.01;
    const FieldPtr m = make_builtin(BuiltinField::Example1);
    PhaseState s{kX0, canonical_momentum(*m, kX0, Velocity4::on_shell(kU0)), 0};
    Position4 prev = s.xn;
    s = variational_step(*m, s, h, {});
    for (int n = 0; n < 100; ++n) {
      const PhaseState next = variational_step(*m, s, h, {});
      CHECK(norm_inf(variational_two_step_residual(*m, prev, s.xn, next.xn, h)) <= 1e-11);
      prev = s.xn;
      s = next;
    }
  }
  SUBCASE("explicit leapfrog triples for constant fields") {
    const double h = 0.02;
    const FieldPtr m = make_builtin(BuiltinField::ConstantEB);
    HalfStepState s = start_state(*m, kX0, Velocity4::on_shell(kU0), h);
    Position4 prev = kX0;
    for (int n = 0; n < 100; ++n) {
      const HalfStepState next = explicit_lf_step(*m, s, h);
      CHECK(norm_inf(variational_two_step_residual(*m, prev, s.xn, next.xn, h)) <= 1e-12);
      prev = s.xn;
      s = next;
    }
  }
}

TEST_CASE("grid momentum") {
  const Velocity4 a = Velocity4::on_shell({0.1, -0.2, 0.3});
  CHECK(grid_momentum(a, a).vec() == a.vec());
  const Velocity4 b{a.gamma, -1.0 * a.u};
  CHECK(grid_momentum(a, b).vec() == Vec4{a.gamma, 0, 0, 0});

  const double h = 0.02;
  const FieldPtr m = make_builtin(BuiltinField::Example1);
  const HalfStepState s1 = example1_start(h);
  const HalfStepState s2 = explicit_lf_step(*m, s1, h);
  const Vec4 central = (0.5 / h) * (s2.xn.vec() - kX0.vec());
  CHECK(norm_inf(grid_momentum(s1.u_half, s2.u_half).vec() - central) <= 1e-14);
}

TEST_CASE("explicit leapfrog is time-reversible") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const FieldPtr m = make_builtin(BuiltinField::Example2);
  for (int k = 0; k < 50; ++k) {
    const HalfStepState s{{d(rng), {d(rng), d(rng), d(rng)}}, Velocity4::on_shell({d(rng), d(rng), d(rng)}), 0};
    CHECK(reversibility_defect(*m, s, 0.01) <= 1e-12);
  }
}

TEST_CASE("variational discrete energy is conserved to solver tolerance") {
  const double h = 0.01;
  const SolverSettings settings;
  const FieldPtr m = make_builtin(BuiltinField::Example2);
  PhaseState s{kX0, canonical_momentum(*m, kX0, Velocity4::on_shell({0.09, 0.55, 0.3})), 0};
  const double e0 = s.pn.p[0];
  for (int n = 1; n <= 2000; ++n) {
    s = variational_step(*m, s, h, settings);
    REQUIRE(std::abs(s.pn.p[0] - e0) <= 10 * settings.tol * n * std::abs(e0) + 1e-14);
  }
}
