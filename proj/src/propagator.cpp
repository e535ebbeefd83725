#include "rlf/propagator.hpp"

#include <array>
#include <utility>

namespace rlf {

namespace {

struct MethodName {
  Method method;
  std::string_view name;
};

constexpr std::array<MethodName, 7> kMethodNames = {{
    {Method::Explicit, "explicit"},
    {Method::DgMidpoint, "dgrad-midpoint"},
    {Method::DgAvf, "dgrad-avf"},
    {Method::Variational, "variational"},
    {Method::Boris, "boris"},
    {Method::NonrelDg, "nonrel-dgrad"},
    {Method::NonrelVariational, "nonrel-variational"},
}};

} // namespace

std::string_view to_string(Method m) {
  for (const auto& e : kMethodNames)
    if (e.method == m) return e.name;
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  for (const auto& e : kMethodNames)
    if (e.name == name) return e.method;
  return std::nullopt;
}

bool is_relativistic(Method m) {
  return m == Method::Explicit || m == Method::DgMidpoint || m == Method::DgAvf ||
         m == Method::Variational;
}

Propagator::Propagator(FieldPtr model, Method method, double h, SolverSettings settings, Position4 x0,
                       Velocity4 u0)
    : model_(std::move(model)), method_(method), h_(h), settings_(settings), x0_(x0), u0_(u0), x_(x0),
      u_last_(u0) {
  if (!model_) throw ValidationError("missing field model");
  if (!(h_ > 0.0)) throw ValidationError("step size must be positive");
  settings_.validate();
  check_step_size(*model_, x0_.x, h_);
  if (is_relativistic(method_)) {
    p_ = canonical_momentum(*model_, x0_, u0_);
  } else {
    x_.t = 0.0;
    u_last_.gamma = 1.0;
    u0_ = u_last_;
  }
}

StepRecord Propagator::advance() {
  StepRecord rec;
  rec.n = n_;
  rec.x_old = x_;
  rec.u_old = u_last_;
  const FieldModel& model = *model_;
  const DiscreteGradientKind kind =
      method_ == Method::DgAvf ? DiscreteGradientKind::AverageVectorField : DiscreteGradientKind::Midpoint;

  if (method_ == Method::Variational) {
    rec.p_old = p_;
    const VariationalStep step = variational_advance(model, {x_, p_, n_}, h_, settings_);
    x_ = step.next.xn;
    p_ = step.next.pn;
    u_last_ = step.u_half;
    rec.stats = step.stats;
  } else if (is_relativistic(method_)) {
    HalfStepState next;
    if (n_ == 0) {
      next = start_state(model, x_, u_last_, h_);
    } else if (method_ == Method::Explicit) {
      next = explicit_lf_step(model, {x_, u_last_, n_}, h_);
    } else {
      next = dg_lf_step(model, kind, {x_, u_last_, n_}, h_, settings_, &rec.stats);
    }
    x_ = next.xn;
    u_last_ = next.u_half;
  } else {
    NonrelState next;
    if (n_ == 0) {
      const Vec3 v = nonrel_start_velocity(model, x_.x, u_last_.u, h_);
      next = {x_.x + h_ * v, v, 1};
    } else if (method_ == Method::Boris) {
      next = boris_step(model, {x_.x, u_last_.u, n_}, h_);
    } else if (method_ == Method::NonrelDg) {
      next = nonrel_dg_step(model, kind, {x_.x, u_last_.u, n_}, h_, settings_, &rec.stats);
    } else {
      next = nonrel_variational_step(model, {x_.x, u_last_.u, n_}, h_, settings_, &rec.stats);
    }
    x_ = {static_cast<double>(n_ + 1) * h_, next.x};
    u_last_ = {1.0, next.v_half};
  }
  ++n_;
  rec.x_new = x_;
  rec.u_new = u_last_;
  return rec;
}

} // namespace rlf
