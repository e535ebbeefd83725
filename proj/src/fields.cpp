#include "rlf/fields.hpp"

#include <cassert>
#include <cmath>
#include <utility>

namespace rlf {

Vec3 FieldModel::magnetic(const Vec3& x) const {
  const Matrix3 j = vector_potential_jacobian(x);
  return {j(2, 1) - j(1, 2), j(0, 2) - j(2, 0), j(1, 0) - j(0, 1)};
}

Vec4 FieldModel::aug_potential(const Vec3& x) const {
  const Vec3 a = vector_potential(x);
  return {-phi(x), a[0], a[1], a[2]};
}

Matrix4 FieldModel::aug_potential_jacobian(const Vec3& x) const {
  const Vec3 g = grad_phi(x);
  const Matrix3 j = vector_potential_jacobian(x);
  Matrix4 m;
  for (std::size_t k = 0; k < 3; ++k) m(0, k + 1) = -g[k];
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 3; ++k) m(i + 1, k + 1) = j(i, k);
  return m;
}

// ---------------------------------------------------------------------------

namespace {

using PowerTable = std::array<std::array<double, Polynomial3::kMaxDegree + 1>, 3>;

PowerTable powers(const Vec3& x) {
  PowerTable p{};
  for (std::size_t v = 0; v < 3; ++v) {
    p[v][0] = 1.0;
    for (int k = 1; k <= Polynomial3::kMaxDegree; ++k) p[v][k] = p[v][k - 1] * x[v];
  }
  return p;
}

} // namespace

Polynomial3::Polynomial3(std::vector<Term> terms) : terms_(std::move(terms)) {
  for (const Term& t : terms_) {
    for (int e : t.exps) {
      if (e < 0 || e > kMaxDegree)
        throw ValidationError("polynomial exponent " + std::to_string(e) + " outside [0, 6]");
    }
    if (!std::isfinite(t.coeff)) throw ValidationError("non-finite polynomial coefficient");
  }
}

double Polynomial3::operator()(const Vec3& x) const {
  const PowerTable p = powers(x);
  double s = 0.0;
  for (const Term& t : terms_) s += t.coeff * p[0][t.exps[0]] * p[1][t.exps[1]] * p[2][t.exps[2]];
  return s;
}

Vec3 Polynomial3::gradient(const Vec3& x) const {
  const PowerTable p = powers(x);
  Vec3 g{};
  for (const Term& t : terms_) {
    const auto& e = t.exps;
    if (e[0] > 0) g[0] += t.coeff * e[0] * p[0][e[0] - 1] * p[1][e[1]] * p[2][e[2]];
    if (e[1] > 0) g[1] += t.coeff * e[1] * p[0][e[0]] * p[1][e[1] - 1] * p[2][e[2]];
    if (e[2] > 0) g[2] += t.coeff * e[2] * p[0][e[0]] * p[1][e[1]] * p[2][e[2] - 1];
  }
  return g;
}

// ---------------------------------------------------------------------------

AnalyticField::AnalyticField(Polynomial3 phi, std::array<Polynomial3, 3> a, double swirl)
    : phi_(std::move(phi)), a_(std::move(a)), swirl_(swirl) {}

double AnalyticField::phi(const Vec3& x) const { return phi_(x); }

Vec3 AnalyticField::grad_phi(const Vec3& x) const { return phi_.gradient(x); }

Vec3 AnalyticField::vector_potential(const Vec3& x) const {
  Vec3 a{a_[0](x), a_[1](x), a_[2](x)};
  if (swirl_ != 0.0) {
    const double r = std::hypot(x[0], x[1]);
    a[0] -= swirl_ * x[1] * r;
    a[1] += swirl_ * x[0] * r;
  }
  return a;
}

Matrix3 AnalyticField::vector_potential_jacobian(const Vec3& x) const {
  Matrix3 j;
  for (std::size_t i = 0; i < 3; ++i) {
    const Vec3 g = a_[i].gradient(x);
    for (std::size_t k = 0; k < 3; ++k) j(i, k) = g[k];
  }
  if (swirl_ != 0.0) {
    const double r = std::hypot(x[0], x[1]);
    // The terms x_i x_k / r are continuous with limit 0 on the axis.
    const double inv_r = r > 0.0 ? 1.0 / r : 0.0;
    j(0, 0) -= swirl_ * x[0] * x[1] * inv_r;
    j(0, 1) -= swirl_ * (r + x[1] * x[1] * inv_r);
    j(1, 0) += swirl_ * (r + x[0] * x[0] * inv_r);
    j(1, 1) += swirl_ * x[0] * x[1] * inv_r;
  }
  return j;
}

// ---------------------------------------------------------------------------

ScaledField::ScaledField(FieldPtr base, double phi_scale, double a_scale)
    : base_(std::move(base)), phi_scale_(phi_scale), a_scale_(a_scale) {}

double ScaledField::phi(const Vec3& x) const { return phi_scale_ * base_->phi(x); }

Vec3 ScaledField::grad_phi(const Vec3& x) const { return phi_scale_ * base_->grad_phi(x); }

Vec3 ScaledField::vector_potential(const Vec3& x) const {
  return a_scale_ * base_->vector_potential(x);
}

Matrix3 ScaledField::vector_potential_jacobian(const Vec3& x) const {
  return a_scale_ * base_->vector_potential_jacobian(x);
}

// ---------------------------------------------------------------------------

namespace {

using Term = Polynomial3::Term;

Polynomial3 example1_phi() {
  // x1^2 + 2 x2^2 + 3 x3^2 - x1
  return Polynomial3({{1.0, {2, 0, 0}}, {2.0, {0, 2, 0}}, {3.0, {0, 0, 2}}, {-1.0, {1, 0, 0}}});
}

Polynomial3 quartic_phi() {
  // x1^3 - x2^3 + x1^4/5 + x2^4 + x3^4
  return Polynomial3({{1.0, {3, 0, 0}},
                      {-1.0, {0, 3, 0}},
                      {0.2, {4, 0, 0}},
                      {1.0, {0, 4, 0}},
                      {1.0, {0, 0, 4}}});
}

/// Linear potential (B x x)/2 for a constant B.
std::array<Polynomial3, 3> uniform_b_potential(const Vec3& b) {
  return {Polynomial3({{0.5 * b[1], {0, 0, 1}}, {-0.5 * b[2], {0, 1, 0}}}),
          Polynomial3({{0.5 * b[2], {1, 0, 0}}, {-0.5 * b[0], {0, 0, 1}}}),
          Polynomial3({{0.5 * b[0], {0, 1, 0}}, {-0.5 * b[1], {1, 0, 0}}})};
}

} // namespace

FieldPtr make_constant_eb(const Vec3& e, const Vec3& b) {
  Polynomial3 phi({{-e[0], {1, 0, 0}}, {-e[1], {0, 1, 0}}, {-e[2], {0, 0, 1}}});
  return std::make_shared<AnalyticField>(std::move(phi), uniform_b_potential(b));
}

FieldPtr make_builtin(BuiltinField kind) {
  constexpr double kRadialSwirl = 1.0 / 3.0; // curl gives B = (0, 0, r)
  switch (kind) {
  case BuiltinField::Example1:
    return std::make_shared<AnalyticField>(example1_phi(), std::array<Polynomial3, 3>{}, kRadialSwirl);
  case BuiltinField::Example2:
    return std::make_shared<AnalyticField>(quartic_phi(), std::array<Polynomial3, 3>{}, kRadialSwirl);
  case BuiltinField::Example3:
    return std::make_shared<AnalyticField>(quartic_phi(), uniform_b_potential({0.0, 0.0, 1.0}));
  case BuiltinField::ConstantEB:
    return make_constant_eb({1.0, 0.0, 0.0}, {0.0, 0.0, 1.0});
  case BuiltinField::Axisymmetric:
    return std::make_shared<AnalyticField>(
        Polynomial3({{1.0, {2, 0, 0}}, {1.0, {0, 2, 0}}, {1.0, {0, 0, 2}}}),
        std::array<Polynomial3, 3>{}, kRadialSwirl);
  case BuiltinField::Zero:
    return std::make_shared<AnalyticField>(Polynomial3{}, std::array<Polynomial3, 3>{});
  }
  throw ValidationError("unknown builtin field");
}

// ---------------------------------------------------------------------------

Matrix4 faraday(const Vec3& e, const Vec3& b) {
  Matrix4 f;
  for (std::size_t k = 0; k < 3; ++k) {
    f(0, k + 1) = -e[k];
    f(k + 1, 0) = e[k];
  }
  const Matrix3 bh = hat(b);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 3; ++k) f(i + 1, k + 1) = -bh(i, k);
  assert(max_abs(f + f.transposed()) == 0.0);
  return f;
}

Matrix4 faraday(const FieldModel& model, const Vec3& x) {
  return faraday(model.electric(x), model.magnetic(x));
}

std::string_view to_string(DiscreteGradientKind kind) {
  return kind == DiscreteGradientKind::Midpoint ? "midpoint" : "avf";
}

Vec3 midpoint_dgrad(const FieldModel& model, const Vec3& x_new, const Vec3& x_old) {
  const Vec3 mid = 0.5 * (x_new + x_old);
  const Vec3 dx = x_new - x_old;
  const Vec3 g = model.grad_phi(mid);
  const double dx2 = dot(dx, dx);
  if (std::sqrt(dx2) < 1e-12 * (1.0 + norm2(mid))) return g;
  const double defect = model.phi(x_new) - model.phi(x_old) - dot(g, dx);
  return g + (defect / dx2) * dx;
}

Vec3 avf_dgrad(const FieldModel& model, const Vec3& x_new, const Vec3& x_old) {
  // Gauss-Legendre on [0, 1].
  static constexpr std::array<double, 5> kNodes = {
      0.5, 0.5 - 0.5 * 0.53846931010568309104, 0.5 + 0.5 * 0.53846931010568309104,
      0.5 - 0.5 * 0.90617984593866399280, 0.5 + 0.5 * 0.90617984593866399280};
  static constexpr std::array<double, 5> kWeights = {
      0.5 * (128.0 / 225.0), 0.5 * 0.47862867049936646804, 0.5 * 0.47862867049936646804,
      0.5 * 0.23692688505618908751, 0.5 * 0.23692688505618908751};
  const Vec3 dx = x_new - x_old;
  Vec3 g{};
  for (std::size_t q = 0; q < kNodes.size(); ++q)
    g = g + kWeights[q] * model.grad_phi(x_old + kNodes[q] * dx);
  return g;
}

Vec3 discrete_gradient(const FieldModel& model, DiscreteGradientKind kind, const Vec3& x_new,
                       const Vec3& x_old) {
  return kind == DiscreteGradientKind::Midpoint ? midpoint_dgrad(model, x_new, x_old)
                                                : avf_dgrad(model, x_new, x_old);
}

Matrix4 dg_faraday(const FieldModel& model, DiscreteGradientKind kind, const Vec3& x_new_half,
                   const Vec3& x_old_half, const Vec3& x_mid) {
  // E is replaced by -dgrad, so the layout matches faraday(-dgrad, B).
  return faraday(-discrete_gradient(model, kind, x_new_half, x_old_half), model.magnetic(x_mid));
}

} // namespace rlf
