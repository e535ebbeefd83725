#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include "rlf/minkowski.hpp"

namespace rlf {

/// Time-independent electromagnetic potentials phi(x) and A(x).
///
/// Implementations provide the potentials and their first derivatives; the
/// fields, the augmented potential (-phi; A) and its 4x4 Jacobian are derived.
/// Instances are immutable and may be shared between threads.
class FieldModel {
public:
  virtual ~FieldModel() = default;

  virtual double phi(const Vec3& x) const = 0;
  virtual Vec3 grad_phi(const Vec3& x) const = 0;
  virtual Vec3 vector_potential(const Vec3& x) const = 0;
  /// Entry (i, j) is d A_i / d x_j.
  virtual Matrix3 vector_potential_jacobian(const Vec3& x) const = 0;

  Vec3 electric(const Vec3& x) const { return -grad_phi(x); }
  Vec3 magnetic(const Vec3& x) const;

  /// (-phi(x); A(x)).
  Vec4 aug_potential(const Vec3& x) const;
  /// Entry (i, j) is d A_i / d x_j in space-time; column 0 vanishes.
  Matrix4 aug_potential_jacobian(const Vec3& x) const;
};

using FieldPtr = std::shared_ptr<const FieldModel>;

/// Sparse polynomial in three variables, at most degree 6 in each.
class Polynomial3 {
public:
  static constexpr int kMaxDegree = 6;

  struct Term {
    double coeff = 0.0;
    std::array<int, 3> exps{};
  };

  Polynomial3() = default;
  explicit Polynomial3(std::vector<Term> terms);

  double operator()(const Vec3& x) const;
  Vec3 gradient(const Vec3& x) const;

  const std::vector<Term>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

private:
  std::vector<Term> terms_;
};

/// Potentials given by polynomials plus an optional axisymmetric swirl term
/// A_swirl = s * r * (-x2, x1, 0), r = sqrt(x1^2 + x2^2), whose curl is (0, 0, 3 s r).
class AnalyticField final : public FieldModel {
public:
  AnalyticField(Polynomial3 phi, std::array<Polynomial3, 3> a, double swirl = 0.0);

  double phi(const Vec3& x) const override;
  Vec3 grad_phi(const Vec3& x) const override;
  Vec3 vector_potential(const Vec3& x) const override;
  Matrix3 vector_potential_jacobian(const Vec3& x) const override;

  double swirl() const { return swirl_; }

private:
  Polynomial3 phi_;
  std::array<Polynomial3, 3> a_;
  double swirl_;
};

/// phi -> phi_scale * phi, A -> a_scale * A. Used for the non-relativistic
/// scaling phi ~ eps^2, A ~ eps.
class ScaledField final : public FieldModel {
public:
  ScaledField(FieldPtr base, double phi_scale, double a_scale);

  double phi(const Vec3& x) const override;
  Vec3 grad_phi(const Vec3& x) const override;
  Vec3 vector_potential(const Vec3& x) const override;
  Matrix3 vector_potential_jacobian(const Vec3& x) const override;

private:
  FieldPtr base_;
  double phi_scale_;
  double a_scale_;
};

enum class BuiltinField { Example1, Example2, Example3, ConstantEB, Axisymmetric, Zero };

/// Concrete models. Examples 1 and 2 carry B = (0, 0, r) through the gauge
/// A = (-x2 r/3, x1 r/3, 0); Example 3 uses A = (-x2, x1, 0)/2.
FieldPtr make_builtin(BuiltinField kind);
/// phi = -E.x, A = (B x x)/2.
FieldPtr make_constant_eb(const Vec3& e, const Vec3& b);

/// Faraday tensor [[0, -E^T], [E, -hat(B)]].
Matrix4 faraday(const Vec3& e, const Vec3& b);
Matrix4 faraday(const FieldModel& model, const Vec3& x);

enum class DiscreteGradientKind { Midpoint, AverageVectorField };

std::string_view to_string(DiscreteGradientKind kind);

/// Gonzalez midpoint discrete gradient; falls back to grad phi at the midpoint
/// when |dx| < 1e-12 (1 + |xbar|).
Vec3 midpoint_dgrad(const FieldModel& model, const Vec3& x_new, const Vec3& x_old);
/// Average vector field, integral of grad phi along the segment by 5-node
/// Gauss-Legendre (exact for polynomial phi up to degree 10).
Vec3 avf_dgrad(const FieldModel& model, const Vec3& x_new, const Vec3& x_old);
Vec3 discrete_gradient(const FieldModel& model, DiscreteGradientKind kind, const Vec3& x_new,
                       const Vec3& x_old);

/// Faraday tensor with -grad phi replaced by minus the discrete gradient
/// between the two half-step positions, and B taken at x_mid.
Matrix4 dg_faraday(const FieldModel& model, DiscreteGradientKind kind, const Vec3& x_new_half,
                   const Vec3& x_old_half, const Vec3& x_mid);

} // namespace rlf
