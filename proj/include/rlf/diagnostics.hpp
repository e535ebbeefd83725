#pragma once

#include <functional>
#include <vector>

#include "rlf/propagator.hpp"

namespace rlf {

/// H(x, gamma) = gamma + phi(x).
double energy(const FieldModel& model, const Vec3& x, double gamma);

/// (-gamma^2 + |u|^2) / 2, evaluated with error-free products so that an
/// on-shell momentum gives -1/2 to within an ulp.
double mass_shell(const Velocity4& u);

/// Generator L of a one-parameter Lorentz group, M L + L^T M = 0.
struct LorentzGenerator {
  Matrix4 L;

  /// Spatial rotation about the x3 axis.
  static LorentzGenerator rotation_x3();
  /// ||M L + L^T M||_max.
  double defect() const;
};

/// p^T L x with p = M u + A(x).
double noether(const FieldModel& model, const Position4& x, const Velocity4& u, const LorentzGenerator& gen);
double noether(const Position4& x, const Momentum4& p, const LorentzGenerator& gen);

// ---------------------------------------------------------------------------
// Finite-difference structure checks on 8-dimensional one-step maps.

using State8 = Vec<8>;
using Matrix8 = Matrix<8>;
using Map8 = std::function<State8(const State8&)>;

State8 pack(const Position4& x, const Vec4& v);
std::pair<Position4, Vec4> unpack(const State8& s);

/// Central-difference Jacobian with a uniform perturbation per component.
Matrix8 fd_jacobian(const Map8& step, const State8& state, double fd_eps = 1e-6);
double fd_jacobian_det(const Map8& step, const State8& state, double fd_eps = 1e-6);
/// ||D^T J D - J||_inf with J the canonical structure matrix [[0, I], [-I, 0]].
double fd_symplectic_defect(const Map8& step, const State8& state, double fd_eps = 1e-6);

/// (x^n, u^{n-1/2}) -> (x^{n+1}, u^{n+1/2}).
Map8 explicit_lf_map(FieldPtr model, double h);
Map8 dg_lf_map(FieldPtr model, DiscreteGradientKind kind, double h, SolverSettings settings);
/// (x^n, p^n) -> (x^{n+1}, p^{n+1}).
Map8 variational_map(FieldPtr model, double h, SolverSettings settings);
/// Explicit leapfrog seen on (x^n, p^{n-1/2}) with p^{n-1/2} = M u^{n-1/2} + A(x^n).
Map8 explicit_lf_phase_map(FieldPtr model, double h);

/// Applies the explicit step with h, then the step with -h to (x^n, u^{n+1/2})
/// (superscripts n+1 and n-1 exchanged). Returns the max deviation of the
/// recovered (x^n, u^{n-1/2}) from the input.
double reversibility_defect(const FieldModel& model, const HalfStepState& s, double h);

// ---------------------------------------------------------------------------

struct ReferenceSample {
  double tau = 0.0;
  Position4 x;
  Velocity4 u;
};

/// Classical fourth-order Runge-Kutta on x' = u, u' = M F(x) u. The final step
/// lands exactly on tau_end (the step is tau_end / ceil(tau_end / h_ref)).
std::vector<ReferenceSample> reference_solve(const FieldModel& model, const Position4& x0,
                                             const Velocity4& u0, double tau_end, double h_ref,
                                             std::size_t record_every = 1);

struct ConvergenceRow {
  double h = 0.0;
  double error = 0.0;
  /// log2(err(2h)/err(h)); NaN for the first row and when errors are at round-off.
  double observed_order = 0.0;
};

/// Global error of x at tau_end (max norm over t and x) against reference_solve.
std::vector<ConvergenceRow> convergence_order(Method method, FieldPtr model, const Position4& x0,
                                              const Velocity4& u0, double tau_end,
                                              const std::vector<double>& h_list, double h_ref = 1e-4,
                                              SolverSettings settings = {});

} // namespace rlf
