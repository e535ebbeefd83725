#include "rlf/diagnostics.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>

namespace rlf {

double energy(const FieldModel& model, const Vec3& x, double gamma) { return gamma + model.phi(x); }

namespace {

// Neumaier summation of a few terms.
class CompensatedSum {
public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

} // namespace

double mass_shell(const Velocity4& u) {
  CompensatedSum s;
  auto add_square = [&s](double a, double sign) {
    const double p = a * a;
    s.add(sign * p);
    s.add(sign * std::fma(a, a, -p));
  };
  add_square(u.gamma, -1.0);
  for (double c : u.u) add_square(c, 1.0);
  return 0.5 * s.value();
}

LorentzGenerator LorentzGenerator::rotation_x3() {
  Matrix4 l;
  l(1, 2) = -1.0;
  l(2, 1) = 1.0;
  return {l};
}

double LorentzGenerator::defect() const {
  return max_abs(kMinkowski * L + L.transposed() * kMinkowski);
}

double noether(const Position4& x, const Momentum4& p, const LorentzGenerator& gen) {
  return dot(p.p, gen.L * x.vec());
}

double noether(const FieldModel& model, const Position4& x, const Velocity4& u, const LorentzGenerator& gen) {
  return noether(x, canonical_momentum(model, x, u), gen);
}

// ---------------------------------------------------------------------------

State8 pack(const Position4& x, const Vec4& v) {
  const Vec4 xv = x.vec();
  return {xv[0], xv[1], xv[2], xv[3], v[0], v[1], v[2], v[3]};
}

std::pair<Position4, Vec4> unpack(const State8& s) {
  return {Position4::from({s[0], s[1], s[2], s[3]}), Vec4{s[4], s[5], s[6], s[7]}};
}

Matrix8 fd_jacobian(const Map8& step, const State8& state, double fd_eps) {
  Matrix8 jac;
  for (std::size_t j = 0; j < 8; ++j) {
    State8 plus = state;
    State8 minus = state;
    plus[j] += fd_eps;
    minus[j] -= fd_eps;
    jac.set_column(j, (0.5 / fd_eps) * (step(plus) - step(minus)));
  }
  return jac;
}

double fd_jacobian_det(const Map8& step, const State8& state, double fd_eps) {
  return determinant(fd_jacobian(step, state, fd_eps));
}

double fd_symplectic_defect(const Map8& step, const State8& state, double fd_eps) {
  Matrix8 j;
  for (std::size_t i = 0; i < 4; ++i) {
    j(i, i + 4) = 1.0;
    j(i + 4, i) = -1.0;
  }
  const Matrix8 d = fd_jacobian(step, state, fd_eps);
  return (d.transposed() * j * d - j).norm_inf();
}

Map8 explicit_lf_map(FieldPtr model, double h) {
  return [model = std::move(model), h](const State8& s) {
    const auto [x, u] = unpack(s);
    const HalfStepState next = explicit_lf_step(*model, {x, Velocity4::from(u), 0}, h);
    return pack(next.xn, next.u_half.vec());
  };
}

Map8 dg_lf_map(FieldPtr model, DiscreteGradientKind kind, double h, SolverSettings settings) {
  return [model = std::move(model), kind, h, settings](const State8& s) {
    const auto [x, u] = unpack(s);
    const HalfStepState next = dg_lf_step(*model, kind, {x, Velocity4::from(u), 0}, h, settings);
    return pack(next.xn, next.u_half.vec());
  };
}

Map8 variational_map(FieldPtr model, double h, SolverSettings settings) {
  return [model = std::move(model), h, settings](const State8& s) {
    const auto [x, p] = unpack(s);
    const PhaseState next = variational_step(*model, {x, {p}, 0}, h, settings);
    return pack(next.xn, next.pn.p);
  };
}

Map8 explicit_lf_phase_map(FieldPtr model, double h) {
  return [model = std::move(model), h](const State8& s) {
    const auto [x, p] = unpack(s);
    const Velocity4 u = Velocity4::from(minkowski_apply(p - model->aug_potential(x.x)));
    const HalfStepState next = explicit_lf_step(*model, {x, u, 0}, h);
    return pack(next.xn, canonical_momentum(*model, next.xn, next.u_half).p);
  };
}

double reversibility_defect(const FieldModel& model, const HalfStepState& s, double h) {
  const HalfStepState forward = explicit_lf_step(model, s, h);
  const HalfStepState back = explicit_lf_step(model, {s.xn, forward.u_half, 0}, -h);
  const Vec4 expected_prev = s.xn.vec() - h * s.u_half.vec();
  return std::max(norm_inf(back.u_half.vec() - s.u_half.vec()), norm_inf(back.xn.vec() - expected_prev));
}

// ---------------------------------------------------------------------------

std::vector<ReferenceSample> reference_solve(const FieldModel& model, const Position4& x0,
                                             const Velocity4& u0, double tau_end, double h_ref,
                                             std::size_t record_every) {
  if (!(h_ref > 0.0) || !(tau_end >= 0.0)) throw ValidationError("reference_solve needs h_ref > 0, tau_end >= 0");
  if (record_every == 0) throw ValidationError("record_every must be at least 1");
  const auto steps = static_cast<std::size_t>(std::ceil(tau_end / h_ref - 1e-9));
  const double h = steps > 0 ? tau_end / static_cast<double>(steps) : 0.0;

  auto rhs = [&model](const State8& y) {
    const auto [x, u] = unpack(y);
    return pack(Position4::from(u), minkowski_apply(faraday(model, x.x) * u));
  };

  std::vector<ReferenceSample> out;
  out.reserve(steps / record_every + 2);
  State8 y = pack(x0, u0.vec());
  State8 carry{}; // Kahan compensation for the accumulated increments
  out.push_back({0.0, x0, u0});
  for (std::size_t n = 1; n <= steps; ++n) {
    const State8 k1 = rhs(y);
    const State8 k2 = rhs(y + (0.5 * h) * k1);
    const State8 k3 = rhs(y + (0.5 * h) * k2);
    const State8 k4 = rhs(y + h * k3);
    const State8 dy = (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    for (std::size_t i = 0; i < 8; ++i) {
      const double inc = dy[i] - carry[i];
      const double next = y[i] + inc;
      carry[i] = (next - y[i]) - inc;
      y[i] = next;
    }
    if (n % record_every == 0 || n == steps) {
      const auto [x, u] = unpack(y);
      out.push_back({static_cast<double>(n) * h, x, Velocity4::from(u)});
    }
  }
  return out;
}

std::vector<ConvergenceRow> convergence_order(Method method, FieldPtr model, const Position4& x0,
                                              const Velocity4& u0, double tau_end,
                                              const std::vector<double>& h_list, double h_ref,
                                              SolverSettings settings) {
  if (!is_relativistic(method)) throw ValidationError("convergence study supports the relativistic methods only");
  if (h_list.size() < 3) throw ValidationError("convergence study needs at least three step sizes");
  for (std::size_t i = 1; i < h_list.size(); ++i)
    if (!(h_list[i] < h_list[i - 1])) throw ValidationError("step sizes must be strictly decreasing");

  const std::vector<ReferenceSample> ref = reference_solve(*model, x0, u0, tau_end, h_ref, SIZE_MAX);
  const Vec4 x_ref = ref.back().x.vec();
  const double round_off = 1e-12 * (1.0 + norm_inf(x_ref));

  std::vector<ConvergenceRow> rows;
  for (double h : h_list) {
    const double steps_real = tau_end / h;
    const auto steps = static_cast<std::int64_t>(std::llround(steps_real));
    if (steps < 1 || std::abs(steps_real - static_cast<double>(steps)) > 1e-9 * steps_real)
      throw ValidationError("tau_end must be a whole number of steps for h = " + std::to_string(h));
    Propagator prop(model, method, h, settings, x0, u0);
    while (prop.steps_taken() < steps) prop.advance();
    ConvergenceRow row{h, norm_inf(prop.position().vec() - x_ref), std::numeric_limits<double>::quiet_NaN()};
    if (!rows.empty()) {
      const ConvergenceRow& prev = rows.back();
      if (prev.error > round_off && row.error > round_off)
        row.observed_order = std::log(prev.error / row.error) / std::log(prev.h / h);
    }
    rows.push_back(row);
  }
  return rows;
}

} // namespace rlf
