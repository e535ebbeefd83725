#pragma once

#include <optional>
#include <string_view>
#include <variant>

#include "rlf/integrators.hpp"

namespace rlf {

enum class Method { Explicit, DgMidpoint, DgAvf, Variational, Boris, NonrelDg, NonrelVariational };

std::string_view to_string(Method m);
/// Accepts the CLI names: explicit, dgrad-midpoint, dgrad-avf, variational,
/// boris, nonrel-dgrad, nonrel-variational.
std::optional<Method> parse_method(std::string_view name);
bool is_relativistic(Method m);

/// Everything known about one step n -> n+1.
struct StepRecord {
  std::int64_t n = 0;
  Position4 x_old; // x^n
  Position4 x_new; // x^{n+1}
  /// u^{n-1/2}; the supplied initial u^0 when n == 0.
  Velocity4 u_old;
  Velocity4 u_new; // u^{n+1/2}
  /// p^n for the variational method.
  std::optional<Momentum4> p_old;
  SolveStats stats;
};

/// Drives one trajectory of any method from initial data (x^0, u^0).
///
/// The first call to advance() applies the starting procedure (for the
/// variational method it takes p^0 = M u^0 + A(x^0)); later calls apply the
/// method's one-step map. Non-relativistic methods use t = tau and gamma = 1.
class Propagator {
public:
  Propagator(FieldPtr model, Method method, double h, SolverSettings settings, Position4 x0,
             Velocity4 u0);

  StepRecord advance();

  Method method() const { return method_; }
  double step_size() const { return h_; }
  const FieldModel& model() const { return *model_; }
  std::int64_t steps_taken() const { return n_; }
  /// x^n, where n = steps_taken().
  const Position4& position() const { return x_; }

private:
  FieldPtr model_;
  Method method_;
  double h_;
  SolverSettings settings_;
  Position4 x0_;
  Velocity4 u0_;

  std::int64_t n_ = 0;
  Position4 x_;
  Velocity4 u_last_;   // u^{n-1/2}
  Momentum4 p_;        // variational only
};

} // namespace rlf
