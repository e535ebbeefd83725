#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlf/diagnostics.hpp"

namespace rlf {

/// Named initial-value problem with its plotting envelope constant.
struct Preset {
  std::string name;
  FieldPtr field;
  Vec3 x0{};
  Vec3 u0{};
  double h = 0.0;
  double tau_end = 0.0;
  /// Energy-error plots use the window +-c h^2.
  double envelope_c = 1.0;
  std::optional<LorentzGenerator> generator;
};

/// example1, example2, example3, axisym, constant-eb, zero.
Preset make_preset(const std::string& name);
std::vector<std::string> preset_names();

/// Additive offsets k * delta, k = 0 .. count-1, on the second component of x0.
struct Perturbation {
  double delta = 1e-15;
  int count = 1;
};

struct ExperimentConfig {
  std::string preset = "example1";
  FieldPtr field;
  std::optional<LorentzGenerator> generator;
  Method method = Method::Explicit;
  double h = 0.02;
  double tau_end = 1e4;
  Vec3 x0{};
  Vec3 u0{};
  std::string out;
  std::size_t record_every = 1;
  SolverSettings solver;
  double envelope_c = 1.0;
  /// Runs the eps-scaled relativistic problem: phi -> eps^2 phi, A -> eps A,
  /// u0 -> eps u0, h -> h/eps, tau_end -> tau_end/eps.
  std::optional<double> epsilon;
  std::vector<double> epsilons;
  std::optional<Perturbation> perturb;

  /// Throws ValidationError.
  void validate() const;
  std::int64_t steps() const;
};

/// Config seeded from a preset's defaults.
ExperimentConfig config_from_preset(const std::string& name);

/// Reads the JSON experiment document. Keys: preset, field {phi, A, swirl},
/// method, h, tau_end, x0, u0, out, record_every, solver {tol, max_iter,
/// scheme}, epsilon, epsilons, perturb {delta, count}, envelope_c.
ExperimentConfig config_from_json(const nlohmann::json& doc);

/// One CSV row.
struct TrajectoryRecord {
  std::int64_t n = 0;
  double tau = 0.0;
  double t = 0.0;
  Vec3 x{};
  double gamma = 1.0;
  Vec3 u{};
  double energy = 0.0;
  double energy_rel_err = 0.0;
  std::optional<double> mass_shell;
  std::optional<double> discrete_energy;
  std::optional<double> noether;

  friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

inline constexpr const char* kCsvHeader =
    "n,tau,t,x1,x2,x3,gamma,u1,u2,u3,energy,energy_rel_err,mass_shell,discrete_energy,noether";

/// 17 significant digits, general notation.
std::string format_double(double v);
std::string format_record(const TrajectoryRecord& r);
TrajectoryRecord parse_record(const std::string& line);
/// Throws ValidationError on a missing file, wrong header or no rows.
std::vector<TrajectoryRecord> read_records(const std::string& path);

/// Quantities derivable from the rows alone, plus run statistics.
struct RunSummary {
  std::int64_t steps = 0;
  std::size_t rows = 0;
  double initial_energy = 0.0;
  double max_abs_energy_rel_err = 0.0;
  std::optional<double> max_mass_shell_drift;
  std::optional<double> max_discrete_energy_drift;
  std::optional<double> max_noether_drift;
  double wall_time_s = 0.0;
  std::int64_t solver_iterations = 0;
  int max_solver_iterations = 0;
  std::int64_t fallback_steps = 0;

  /// True when every row-derived field matches exactly.
  bool same_statistics(const RunSummary& other) const;
  nlohmann::json to_json() const;
};

/// Folds rows into the row-derived part of RunSummary. Drifts are relative to
/// the first row, |q_n - q_0| / |q_0| (absolute when q_0 == 0).
class SummaryAccumulator {
public:
  void add(const TrajectoryRecord& r);
  RunSummary summary() const { return s_; }

private:
  RunSummary s_;
  std::optional<double> ms0_, de0_, no0_;
};

RunSummary summarize(const std::vector<TrajectoryRecord>& rows);

using RecordSink = std::function<void(const TrajectoryRecord&)>;

/// Integrates cfg, writes CSV to cfg.out when set and forwards every recorded
/// row to sink. Rows are written for n = 0, record_every, 2 record_every, ...
/// and the final step. Solver failures are rethrown as StepFailure.
RunSummary run_experiment(const ExperimentConfig& cfg, const RecordSink& sink = {});

/// Runs the perturbed copies of cfg concurrently; copy k writes to
/// "<stem>_k<k><ext>" when cfg.out is set.
std::vector<RunSummary> run_perturbed(const ExperimentConfig& cfg);

struct LimitRow {
  double epsilon = 0.0;
  double max_position_diff = 0.0;
  double max_velocity_diff = 0.0;
};

/// For each epsilon compares the eps-scaled explicit leapfrog (positions, and
/// u/eps) with the Boris method on the same grid; sup norm over all steps.
std::vector<LimitRow> run_limit_study(const ExperimentConfig& cfg);

struct FigureWindow {
  double tau_min = 0.0;
  double tau_max = std::numeric_limits<double>::infinity();
  std::size_t stride = 1;
  double c = 1.0;
  /// Inferred from the first two rows when not given.
  std::optional<double> h;
};

struct FigureSeries {
  double h = 0.0;
  double c = 0.0;
  double envelope = 0.0; // c h^2
  std::vector<double> tau;
  std::vector<double> energy_rel_err;
};

FigureSeries emit_figure_data(const std::string& records_path, const FigureWindow& window);
void write_figure_csv(const FigureSeries& series, std::ostream& os);

} // namespace rlf
