#pragma once

#include <cstdint>
#include <utility>

#include "rlf/fields.hpp"

namespace rlf {

/// One-step leapfrog state (x^n, u^{n-1/2}).
struct HalfStepState {
  Position4 xn;
  Velocity4 u_half;
  std::int64_t step = 0;
};

/// Canonical state (x^n, p^n) of the variational one-step map.
struct PhaseState {
  Position4 xn;
  Momentum4 pn;
  std::int64_t step = 0;
};

enum class SolveScheme { FixedPoint, Newton };

struct SolverSettings {
  double tol = 1e-14;
  int max_iter = 50;
  SolveScheme scheme = SolveScheme::FixedPoint;

  void validate() const;
};

struct SolveStats {
  int iterations = 0;
  bool used_fallback = false;
  bool roundoff_limited = false; // stalled above tol but within 100 tol
  double residual = 0.0;
};

/// Rejects h when ||h/2 M F(x0)||_inf >= 1.
void check_step_size(const FieldModel& model, const Vec3& x0, double h);

/// u^{1/2}: spatial part of u0 + h/2 M F(x0) u0, gamma put back on the shell.
Velocity4 start_half_step(const FieldModel& model, const Position4& x0, const Velocity4& u0, double h);

/// (x^1, u^{1/2}) from the initial data.
HalfStepState start_state(const FieldModel& model, const Position4& x0, const Velocity4& u0, double h);

/// Linearly implicit leapfrog: (M - h/2 F) u+ = (M + h/2 F) u-, x+ = x + h u+.
HalfStepState explicit_lf_step(const FieldModel& model, const HalfStepState& s, double h);

/// Energy-conserving leapfrog with F built from a discrete gradient between the
/// half-step positions. x^{n-1} is reconstructed as x^n - h u^{n-1/2}.
HalfStepState dg_lf_step(const FieldModel& model, DiscreteGradientKind kind, const HalfStepState& s,
                         double h, const SolverSettings& settings, SolveStats* stats = nullptr);

struct VariationalStep {
  PhaseState next;
  /// (x^{n+1} - x^n) / h, computed directly rather than from the difference.
  Velocity4 u_half;
  SolveStats stats;
};

/// Symplectic map (x^n, p^n) -> (x^{n+1}, p^{n+1}) of the trapezoidal discrete
/// Lagrangian, solved by Newton's method with the exact Jacobian.
VariationalStep variational_advance(const FieldModel& model, const PhaseState& s, double h,
                                    const SolverSettings& settings);

PhaseState variational_step(const FieldModel& model, const PhaseState& s, double h,
                            const SolverSettings& settings);

/// p = M u + A(x).
Momentum4 canonical_momentum(const FieldModel& model, const Position4& x, const Velocity4& u);

/// The p^n for which the variational map produces u^{n+1/2} = u_half from x^n.
Momentum4 phase_momentum_for(const FieldModel& model, const Position4& xn, const Velocity4& u_half,
                             double h);

/// Residual of the two-step discrete Euler-Lagrange equations at x_cur.
Vec4 variational_two_step_residual(const FieldModel& model, const Position4& x_prev,
                                   const Position4& x_cur, const Position4& x_next, double h);

/// u^n = (u^{n+1/2} + u^{n-1/2}) / 2.
Velocity4 grid_momentum(const Velocity4& u_minus, const Velocity4& u_plus);

// ---------------------------------------------------------------------------
// Non-relativistic limit methods on (x^n, v^{n-1/2}).

struct NonrelState {
  Vec3 x{};
  Vec3 v_half{};
  std::int64_t step = 0;
};

/// v^{1/2} = v0 + h/2 (E + v0 x B).
Vec3 nonrel_start_velocity(const FieldModel& model, const Vec3& x0, const Vec3& v0, double h);

/// Boris: v+ - v- = h E(x) + h/2 (v+ + v-) x B(x), x+ = x + h v+.
/// Returns (x^{n+1}, v^{n+1/2}).
std::pair<Vec3, Vec3> boris_step(const FieldModel& model, const Vec3& x, const Vec3& v_half, double h);
NonrelState boris_step(const FieldModel& model, const NonrelState& s, double h);

/// Boris with E replaced by minus the discrete gradient between half-step positions.
NonrelState nonrel_dg_step(const FieldModel& model, DiscreteGradientKind kind, const NonrelState& s,
                           double h, const SolverSettings& settings, SolveStats* stats = nullptr);

/// Variational limit: Boris plus A'(x)(x+ - x-)/2h - (A(x+) - A(x-))/2h.
NonrelState nonrel_variational_step(const FieldModel& model, const NonrelState& s, double h,
                                    const SolverSettings& settings, SolveStats* stats = nullptr);

/// Residual of the two-step form of the variational limit method.
Vec3 nonrel_variational_residual(const FieldModel& model, const Vec3& x_prev, const Vec3& x_cur,
                                 const Vec3& x_next, double h);

} // namespace rlf
