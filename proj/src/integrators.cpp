#include "rlf/integrators.hpp"

#include <cmath>
#include <string>

namespace rlf {

void SolverSettings::validate() const {
  if (!(tol > 0.0)) throw ValidationError("solver tolerance must be positive");
  if (max_iter < 1) throw ValidationError("solver max_iter must be at least 1");
}

namespace {

constexpr double kFdJacobianStep = 1e-7;

// A solve that stalls within this factor of the tolerance has hit the rounding
// floor of its residual and is accepted.
constexpr double kRoundoffSlack = 100.0;

bool accept(bool ok, SolveStats& stats, const SolverSettings& settings) {
  if (ok) return true;
  stats.roundoff_limited = stats.residual <= kRoundoffSlack * settings.tol;
  return stats.roundoff_limited;
}

template <std::size_t N>
Vec<N> solve_dense(const Matrix<N>& a, const Vec<N>& b) {
  return LuFactor<N>(a).solve(b);
}

// Newton's method on r(y) = 0 with a central-difference Jacobian.
template <std::size_t N, class Residual>
bool newton_fd(Vec<N>& y, const Residual& residual, double scale, const SolverSettings& settings,
               SolveStats& stats) {
  Vec<N> r = residual(y);
  for (int it = 0; it < settings.max_iter; ++it) {
    stats.residual = norm_inf(r) / scale;
    if (stats.residual <= settings.tol) return true;
    Matrix<N> jac;
    for (std::size_t j = 0; j < N; ++j) {
      Vec<N> yp = y;
      Vec<N> ym = y;
      yp[j] += kFdJacobianStep;
      ym[j] -= kFdJacobianStep;
      jac.set_column(j, (0.5 / kFdJacobianStep) * (residual(yp) - residual(ym)));
    }
    y = y - solve_dense(jac, r);
    r = residual(y);
    ++stats.iterations;
  }
  stats.residual = norm_inf(r) / scale;
  return stats.residual <= settings.tol;
}

// Fixed-point iteration y <- update(y) until the residual meets the tolerance;
// falls back to Newton when the iteration budget runs out.
template <std::size_t N, class Residual, class Update>
Vec<N> solve_implicit(Vec<N> y, const Residual& residual, const Update& update, double scale,
                      const SolverSettings& settings, SolveStats* stats_out) {
  SolveStats stats;
  bool ok = false;
  if (settings.scheme == SolveScheme::FixedPoint) {
    for (int it = 0; it <= settings.max_iter; ++it) {
      stats.residual = norm_inf(residual(y)) / scale;
      if (stats.residual <= settings.tol) {
        ok = true;
        break;
      }
      if (it == settings.max_iter) break;
      y = update(y);
      ++stats.iterations;
    }
    if (!ok) {
      stats.used_fallback = true;
      ok = newton_fd(y, residual, scale, settings, stats);
    }
  } else {
    ok = newton_fd(y, residual, scale, settings, stats);
  }
  const bool accepted = accept(ok, stats, settings);
  if (stats_out) *stats_out = stats;
  if (!accepted) throw NoConvergence(stats.iterations, stats.residual);
  return y;
}

Vec3 spatial(const Vec4& v) { return {v[1], v[2], v[3]}; }

} // namespace

// ---------------------------------------------------------------------------

void check_step_size(const FieldModel& model, const Vec3& x0, double h) {
  const double z = (0.5 * std::abs(h) * minkowski_apply(faraday(model, x0))).norm_inf();
  if (!(z < 1.0))
    throw ValidationError("step size too large for the local field: ||h/2 M F(x0)|| = " + std::to_string(z));
}

Velocity4 start_half_step(const FieldModel& model, const Position4& x0, const Velocity4& u0, double h) {
  const Matrix4 mf = minkowski_apply(faraday(model, x0.x));
  const Vec4 trial = u0.vec() + (0.5 * h) * (mf * u0.vec());
  return Velocity4::on_shell(spatial(trial));
}

HalfStepState start_state(const FieldModel& model, const Position4& x0, const Velocity4& u0, double h) {
  const Velocity4 u_half = start_half_step(model, x0, u0, h);
  return {Position4::from(x0.vec() + h * u_half.vec()), u_half, 1};
}

HalfStepState explicit_lf_step(const FieldModel& model, const HalfStepState& s, double h) {
  const Matrix4 half_f = 0.5 * h * faraday(model, s.xn.x);
  const Vec4 u_minus = s.u_half.vec();
  const Vec4 u_plus = solve4(kMinkowski - half_f, (kMinkowski + half_f) * u_minus);
  return {Position4::from(s.xn.vec() + h * u_plus), Velocity4::from(u_plus), s.step + 1};
}

HalfStepState dg_lf_step(const FieldModel& model, DiscreteGradientKind kind, const HalfStepState& s,
                         double h, const SolverSettings& settings, SolveStats* stats) {
  const Vec3& x = s.xn.x;
  const Vec4 u_minus = s.u_half.vec();
  const Vec3 x_old_half = x - (0.5 * h) * s.u_half.u;

  auto half_fbar = [&](const Vec4& u_plus) {
    return 0.5 * h * dg_faraday(model, kind, x + (0.5 * h) * spatial(u_plus), x_old_half, x);
  };
  auto residual = [&](const Vec4& u_plus) {
    return kMinkowski * (u_plus - u_minus) - half_fbar(u_plus) * (u_plus + u_minus);
  };
  auto update = [&](const Vec4& u_plus) {
    const Matrix4 hf = half_fbar(u_plus);
    return solve4(kMinkowski - hf, (kMinkowski + hf) * u_minus);
  };

  const Vec4 guess = explicit_lf_step(model, s, h).u_half.vec();
  const Vec4 u_plus = solve_implicit(guess, residual, update, 1.0 + norm_inf(u_minus), settings, stats);
  return {Position4::from(s.xn.vec() + h * u_plus), Velocity4::from(u_plus), s.step + 1};
}

// ---------------------------------------------------------------------------

VariationalStep variational_advance(const FieldModel& model, const PhaseState& s, double h,
                                    const SolverSettings& settings) {
  const Vec3& x = s.xn.x;
  const Vec4& p = s.pn.p;
  const Vec4 a_n = model.aug_potential(x);
  const Matrix4 lhs = kMinkowski - (0.5 * h) * model.aug_potential_jacobian(x).transposed();
  const double scale = 1.0 + norm_inf(p);

  // Unknown is u^{n+1/2}; x^{n+1} = x^n + h u. Potentials do not depend on t.
  Vec4 u = minkowski_apply(p - a_n);
  SolveStats stats;
  bool ok = false;
  for (int it = 0; it <= settings.max_iter; ++it) {
    const Vec3 x_next = x + h * spatial(u);
    const Vec4 r = lhs * u + 0.5 * (a_n + model.aug_potential(x_next)) - p;
    stats.residual = norm_inf(r) / scale;
    if (stats.residual <= settings.tol) {
      ok = true;
      break;
    }
    if (it == settings.max_iter) break;
    const Matrix4 jac = lhs + (0.5 * h) * model.aug_potential_jacobian(x_next);
    u = u - solve4(jac, r);
    ++stats.iterations;
  }
  if (!accept(ok, stats, settings)) throw NoConvergence(stats.iterations, stats.residual);

  const Position4 x_next = Position4::from(s.xn.vec() + h * u);
  const Vec4 a_next = model.aug_potential(x_next.x);
  const Matrix4 rhs = kMinkowski + (0.5 * h) * model.aug_potential_jacobian(x_next.x).transposed();
  const Momentum4 p_next{rhs * u + 0.5 * (a_n + a_next)};
  return {{x_next, p_next, s.step + 1}, Velocity4::from(u), stats};
}

PhaseState variational_step(const FieldModel& model, const PhaseState& s, double h,
                            const SolverSettings& settings) {
  return variational_advance(model, s, h, settings).next;
}

Momentum4 canonical_momentum(const FieldModel& model, const Position4& x, const Velocity4& u) {
  return {minkowski_apply(u.vec()) + model.aug_potential(x.x)};
}

Momentum4 phase_momentum_for(const FieldModel& model, const Position4& xn, const Velocity4& u_half,
                             double h) {
  const Vec4 u = u_half.vec();
  const Matrix4 lhs = kMinkowski - (0.5 * h) * model.aug_potential_jacobian(xn.x).transposed();
  const Vec3 x_next = xn.x + h * u_half.u;
  return {lhs * u + 0.5 * (model.aug_potential(xn.x) + model.aug_potential(x_next))};
}

Vec4 variational_two_step_residual(const FieldModel& model, const Position4& x_prev,
                                   const Position4& x_cur, const Position4& x_next, double h) {
  const Vec4 xm = x_prev.vec();
  const Vec4 x0 = x_cur.vec();
  const Vec4 xp = x_next.vec();
  const Vec4 accel = (1.0 / (h * h)) * (xp - 2.0 * x0 + xm);
  const Vec4 central = (0.5 / h) * (xp - xm);
  const Vec4 dpot = (0.5 / h) * (model.aug_potential(x_next.x) - model.aug_potential(x_prev.x));
  return kMinkowski * accel - model.aug_potential_jacobian(x_cur.x).transposed() * central + dpot;
}

Velocity4 grid_momentum(const Velocity4& u_minus, const Velocity4& u_plus) {
  return Velocity4::from(0.5 * (u_minus.vec() + u_plus.vec()));
}

// ---------------------------------------------------------------------------

Vec3 nonrel_start_velocity(const FieldModel& model, const Vec3& x0, const Vec3& v0, double h) {
  return v0 + (0.5 * h) * (model.electric(x0) + cross(v0, model.magnetic(x0)));
}

namespace {

// Solves v+ - v- = h f + h/2 (v+ + v-) x B, i.e.
// (I + h/2 hat(B)) v+ = (I - h/2 hat(B)) v- + h f.
Vec3 rotate_kick(const Vec3& v_minus, const Vec3& force, const Vec3& b, double h) {
  const Matrix3 half_b = (0.5 * h) * hat(b);
  const Matrix3 id = Matrix3::identity();
  return LuFactor<3>(id + half_b).solve((id - half_b) * v_minus + h * force);
}

} // namespace

std::pair<Vec3, Vec3> boris_step(const FieldModel& model, const Vec3& x, const Vec3& v_half, double h) {
  const Vec3 v_plus = rotate_kick(v_half, model.electric(x), model.magnetic(x), h);
  return {x + h * v_plus, v_plus};
}

NonrelState boris_step(const FieldModel& model, const NonrelState& s, double h) {
  const auto [x_next, v_next] = boris_step(model, s.x, s.v_half, h);
  return {x_next, v_next, s.step + 1};
}

NonrelState nonrel_dg_step(const FieldModel& model, DiscreteGradientKind kind, const NonrelState& s,
                           double h, const SolverSettings& settings, SolveStats* stats) {
  const Vec3& x = s.x;
  const Vec3& v_minus = s.v_half;
  const Vec3 b = model.magnetic(x);
  const Vec3 x_old_half = x - (0.5 * h) * v_minus;
  auto dgrad = [&](const Vec3& v_plus) {
    return discrete_gradient(model, kind, x + (0.5 * h) * v_plus, x_old_half);
  };
  auto residual = [&](const Vec3& v_plus) {
    return v_plus - v_minus + h * dgrad(v_plus) - (0.5 * h) * cross(v_plus + v_minus, b);
  };
  auto update = [&](const Vec3& v_plus) { return rotate_kick(v_minus, -dgrad(v_plus), b, h); };

  const Vec3 guess = boris_step(model, x, v_minus, h).second;
  const Vec3 v_plus = solve_implicit(guess, residual, update, 1.0 + norm_inf(v_minus), settings, stats);
  return {x + h * v_plus, v_plus, s.step + 1};
}

NonrelState nonrel_variational_step(const FieldModel& model, const NonrelState& s, double h,
                                    const SolverSettings& settings, SolveStats* stats_out) {
  const Vec3& x = s.x;
  const Vec3& v_minus = s.v_half;
  const Vec3 e = model.electric(x);
  const Vec3 b = model.magnetic(x);
  const Matrix3 jac_x = model.vector_potential_jacobian(x);
  const Vec3 a_prev = model.vector_potential(x - h * v_minus);
  const Matrix3 base_jac = Matrix3::identity() + (0.5 * h) * hat(b) - (0.5 * h) * jac_x;
  const double scale = 1.0 + norm_inf(v_minus);

  // h times the two-step residual, expressed in v+.
  auto residual = [&](const Vec3& v_plus) {
    const Vec3 w = v_plus + v_minus;
    return v_plus - v_minus - h * e - (0.5 * h) * cross(w, b) - (0.5 * h) * (jac_x * w) +
           0.5 * (model.vector_potential(x + h * v_plus) - a_prev);
  };

  Vec3 v = rotate_kick(v_minus, e, b, h);
  SolveStats stats;
  bool ok = false;
  for (int it = 0; it <= settings.max_iter; ++it) {
    const Vec3 r = residual(v);
    stats.residual = norm_inf(r) / scale;
    if (stats.residual <= settings.tol) {
      ok = true;
      break;
    }
    if (it == settings.max_iter) break;
    const Matrix3 jac = base_jac + (0.5 * h) * model.vector_potential_jacobian(x + h * v);
    v = v - LuFactor<3>(jac).solve(r);
    ++stats.iterations;
  }
  const bool accepted = accept(ok, stats, settings);
  if (stats_out) *stats_out = stats;
  if (!accepted) throw NoConvergence(stats.iterations, stats.residual);
  return {x + h * v, v, s.step + 1};
}

Vec3 nonrel_variational_residual(const FieldModel& model, const Vec3& x_prev, const Vec3& x_cur,
                                 const Vec3& x_next, double h) {
  const Vec3 accel = (1.0 / (h * h)) * (x_next - 2.0 * x_cur + x_prev);
  const Vec3 central = (0.5 / h) * (x_next - x_prev);
  const Vec3 dpot = (0.5 / h) * (model.vector_potential(x_next) - model.vector_potential(x_prev));
  return accel - model.electric(x_cur) - cross(central, model.magnetic(x_cur)) -
         model.vector_potential_jacobian(x_cur) * central + dpot;
}

} // namespace rlf
