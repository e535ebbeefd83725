#include "rlf/experiment.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <ostream>
#include <set>
#include <sstream>

namespace rlf {

namespace {

constexpr std::array<const char*, 6> kPresetNames = {"example1", "example2",    "example3",
                                                     "axisym",   "constant-eb", "zero"};

} // namespace

std::vector<std::string> preset_names() { return {kPresetNames.begin(), kPresetNames.end()}; }

Preset make_preset(const std::string& name) {
  const Vec3 x0{0.0, 1.0, 0.1};
  const Vec3 u_slow{0.09, 0.05, 0.2};
  const Vec3 u_fast{0.09, 0.55, 0.3};
  if (name == "example1") return {name, make_builtin(BuiltinField::Example1), x0, u_slow, 0.02, 1e4, 2.0, {}};
  if (name == "example2") return {name, make_builtin(BuiltinField::Example2), x0, u_fast, 2e-4, 1e3, 4000.0, {}};
  if (name == "example3") return {name, make_builtin(BuiltinField::Example3), x0, u_fast, 0.002, 1e4, 5000.0, {}};
  if (name == "axisym")
    return {name, make_builtin(BuiltinField::Axisymmetric), {1.0, 0.0, 0.1}, u_fast, 0.01, 1e3, 1.0,
            LorentzGenerator::rotation_x3()};
  if (name == "constant-eb")
    return {name, make_builtin(BuiltinField::ConstantEB), x0, u_slow, 0.02, 2e3, 1.0, {}};
  if (name == "zero") return {name, make_builtin(BuiltinField::Zero), x0, u_slow, 0.02, 1e2, 1.0, {}};
  throw ValidationError("unknown preset '" + name + "'");
}

// ---------------------------------------------------------------------------

void ExperimentConfig::validate() const {
  if (!field) throw ValidationError("no field model");
  if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("h must be positive and finite");
  if (!(tau_end > 0.0) || !std::isfinite(tau_end)) throw ValidationError("tau_end must be positive and finite");
  if (record_every < 1) throw ValidationError("record_every must be at least 1");
  solver.validate();
  for (double c : x0)
    if (!std::isfinite(c)) throw ValidationError("x0 must be finite");
  for (double c : u0)
    if (!std::isfinite(c)) throw ValidationError("u0 must be finite");
  if (epsilon && !(*epsilon > 0.0 && *epsilon <= 1.0)) throw ValidationError("epsilon must lie in (0, 1]");
  for (double e : epsilons)
    if (!(e >= 0.0 && e <= 0.5)) throw ValidationError("limit-study epsilons must lie in [0, 0.5]");
  if (perturb && (perturb->count < 1 || perturb->count > 64 || !std::isfinite(perturb->delta)))
    throw ValidationError("perturbation count must lie in [1, 64]");
  if (tau_end / h > 1e11) throw ValidationError("more than 1e11 steps requested");
}

std::int64_t ExperimentConfig::steps() const {
  return static_cast<std::int64_t>(std::ceil(tau_end / h - 1e-9));
}

ExperimentConfig config_from_preset(const std::string& name) {
  const Preset p = make_preset(name);
  ExperimentConfig cfg;
  cfg.preset = p.name;
  cfg.field = p.field;
  cfg.generator = p.generator;
  cfg.h = p.h;
  cfg.tau_end = p.tau_end;
  cfg.x0 = p.x0;
  cfg.u0 = p.u0;
  cfg.envelope_c = p.envelope_c;
  return cfg;
}

namespace {

using nlohmann::json;

Vec3 read_vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ValidationError(std::string(what) + " must be an array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Polynomial3 read_polynomial(const json& j) {
  if (!j.is_array()) throw ValidationError("polynomial must be an array of {c, e} terms");
  std::vector<Polynomial3::Term> terms;
  for (const json& t : j) {
    if (!t.contains("c") || !t.contains("e")) throw ValidationError("polynomial term needs 'c' and 'e'");
    const json& e = t.at("e");
    if (!e.is_array() || e.size() != 3) throw ValidationError("term exponent 'e' must have 3 entries");
    terms.push_back({t.at("c").get<double>(), {e[0].get<int>(), e[1].get<int>(), e[2].get<int>()}});
  }
  return Polynomial3(std::move(terms));
}

FieldPtr read_field(const json& j) {
  static const std::set<std::string> keys = {"phi", "A", "swirl"};
  for (const auto& [k, v] : j.items())
    if (!keys.count(k)) throw ValidationError("unknown field key '" + k + "'");
  Polynomial3 phi = j.contains("phi") ? read_polynomial(j.at("phi")) : Polynomial3{};
  std::array<Polynomial3, 3> a{};
  if (j.contains("A")) {
    const json& ja = j.at("A");
    if (!ja.is_array() || ja.size() != 3) throw ValidationError("'A' must list three component polynomials");
    for (std::size_t i = 0; i < 3; ++i) a[i] = read_polynomial(ja[i]);
  }
  return std::make_shared<AnalyticField>(std::move(phi), std::move(a), j.value("swirl", 0.0));
}

} // namespace

ExperimentConfig config_from_json(const nlohmann::json& doc) {
  static const std::set<std::string> keys = {"preset", "field",   "generator", "method",   "h",
                                             "tau_end", "x0",     "u0",        "out",      "record_every",
                                             "solver",  "epsilon", "epsilons", "perturb", "envelope_c"};
  if (!doc.is_object()) throw ValidationError("config must be a JSON object");
  try {
    for (const auto& [k, v] : doc.items())
      if (!keys.count(k)) throw ValidationError("unknown config key '" + k + "'");

    ExperimentConfig cfg = config_from_preset(doc.value("preset", std::string("example1")));
    if (doc.contains("field")) {
      cfg.preset = "custom";
      cfg.field = read_field(doc.at("field"));
      cfg.generator.reset();
      cfg.envelope_c = 1.0;
    }
    if (doc.contains("generator")) {
      const auto g = doc.at("generator").get<std::string>();
      if (g == "rotation-x3")
        cfg.generator = LorentzGenerator::rotation_x3();
      else if (g == "none")
        cfg.generator.reset();
      else
        throw ValidationError("unknown generator '" + g + "'");
    }
    if (doc.contains("method")) {
      const auto name = doc.at("method").get<std::string>();
      const auto m = parse_method(name);
      if (!m) throw ValidationError("unknown method '" + name + "'");
      cfg.method = *m;
    }
    cfg.h = doc.value("h", cfg.h);
    cfg.tau_end = doc.value("tau_end", cfg.tau_end);
    if (doc.contains("x0")) cfg.x0 = read_vec3(doc.at("x0"), "x0");
    if (doc.contains("u0")) cfg.u0 = read_vec3(doc.at("u0"), "u0");
    cfg.out = doc.value("out", cfg.out);
    if (doc.contains("record_every")) {
      const auto r = doc.at("record_every").get<std::int64_t>();
      if (r < 1) throw ValidationError("record_every must be at least 1");
      cfg.record_every = static_cast<std::size_t>(r);
    }
    if (doc.contains("solver")) {
      const json& s = doc.at("solver");
      cfg.solver.tol = s.value("tol", cfg.solver.tol);
      cfg.solver.max_iter = s.value("max_iter", cfg.solver.max_iter);
      const auto scheme = s.value("scheme", std::string("fixed-point"));
      if (scheme == "fixed-point")
        cfg.solver.scheme = SolveScheme::FixedPoint;
      else if (scheme == "newton")
        cfg.solver.scheme = SolveScheme::Newton;
      else
        throw ValidationError("unknown solver scheme '" + scheme + "'");
    }
    if (doc.contains("epsilon")) cfg.epsilon = doc.at("epsilon").get<double>();
    if (doc.contains("epsilons")) cfg.epsilons = doc.at("epsilons").get<std::vector<double>>();
    if (doc.contains("perturb")) {
      const json& p = doc.at("perturb");
      cfg.perturb = Perturbation{p.value("delta", 1e-15), p.value("count", 1)};
    }
    cfg.envelope_c = doc.value("envelope_c", cfg.envelope_c);
    cfg.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string format_record(const TrajectoryRecord& r) {
  std::string line = std::to_string(r.n);
  auto put = [&line](double v) {
    line += ',';
    line += format_double(v);
  };
  auto put_opt = [&line, &put](const std::optional<double>& v) {
    if (v)
      put(*v);
    else
      line += ',';
  };
  put(r.tau);
  put(r.t);
  for (double c : r.x) put(c);
  put(r.gamma);
  for (double c : r.u) put(c);
  put(r.energy);
  put(r.energy_rel_err);
  put_opt(r.mass_shell);
  put_opt(r.discrete_energy);
  put_opt(r.noether);
  return line;
}

namespace {

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ValidationError("bad number '" + std::string(s) + "' in record");
  return v;
}

} // namespace

TrajectoryRecord parse_record(const std::string& line) {
  std::vector<std::string_view> f;
  std::string_view rest(line);
  while (true) {
    const auto pos = rest.find(',');
    f.push_back(rest.substr(0, pos));
    if (pos == std::string_view::npos) break;
    rest.remove_prefix(pos + 1);
  }
  if (f.size() != 15) throw ValidationError("record has " + std::to_string(f.size()) + " fields, expected 15");
  auto opt = [](std::string_view s) -> std::optional<double> {
    if (s.empty()) return std::nullopt;
    return parse_double(s);
  };
  TrajectoryRecord r;
  std::int64_t n = 0;
  const auto res = std::from_chars(f[0].data(), f[0].data() + f[0].size(), n);
  if (res.ec != std::errc() || res.ptr != f[0].data() + f[0].size())
    throw ValidationError("bad step index '" + std::string(f[0]) + "'");
  r.n = n;
  r.tau = parse_double(f[1]);
  r.t = parse_double(f[2]);
  r.x = {parse_double(f[3]), parse_double(f[4]), parse_double(f[5])};
  r.gamma = parse_double(f[6]);
  r.u = {parse_double(f[7]), parse_double(f[8]), parse_double(f[9])};
  r.energy = parse_double(f[10]);
  r.energy_rel_err = parse_double(f[11]);
  r.mass_shell = opt(f[12]);
  r.discrete_energy = opt(f[13]);
  r.noether = opt(f[14]);
  return r;
}

std::vector<TrajectoryRecord> read_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open records file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("records file '" + path + "' is empty");
  if (line != kCsvHeader) throw ValidationError("records file '" + path + "' has an unexpected header");
  std::vector<TrajectoryRecord> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(parse_record(line));
  }
  if (rows.empty()) throw ValidationError("records file '" + path + "' has no rows");
  return rows;
}

// ---------------------------------------------------------------------------

namespace {

double drift(double v, double ref) {
  return ref != 0.0 ? std::abs(v - ref) / std::abs(ref) : std::abs(v - ref);
}

void fold_drift(std::optional<double>& ref, std::optional<double>& max, const std::optional<double>& v) {
  if (!v) return;
  if (!ref) {
    ref = *v;
    max = 0.0;
  }
  max = std::max(*max, drift(*v, *ref));
}

} // namespace

void SummaryAccumulator::add(const TrajectoryRecord& r) {
  if (s_.rows == 0) s_.initial_energy = r.energy;
  ++s_.rows;
  s_.steps = r.n;
  s_.max_abs_energy_rel_err = std::max(s_.max_abs_energy_rel_err, std::abs(r.energy_rel_err));
  fold_drift(ms0_, s_.max_mass_shell_drift, r.mass_shell);
  fold_drift(de0_, s_.max_discrete_energy_drift, r.discrete_energy);
  fold_drift(no0_, s_.max_noether_drift, r.noether);
}

RunSummary summarize(const std::vector<TrajectoryRecord>& rows) {
  SummaryAccumulator acc;
  for (const auto& r : rows) acc.add(r);
  return acc.summary();
}

bool RunSummary::same_statistics(const RunSummary& o) const {
  return steps == o.steps && rows == o.rows && initial_energy == o.initial_energy &&
         max_abs_energy_rel_err == o.max_abs_energy_rel_err && max_mass_shell_drift == o.max_mass_shell_drift &&
         max_discrete_energy_drift == o.max_discrete_energy_drift && max_noether_drift == o.max_noether_drift;
}

nlohmann::json RunSummary::to_json() const {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  return {{"steps", steps},
          {"rows", rows},
          {"initial_energy", initial_energy},
          {"max_abs_energy_rel_err", max_abs_energy_rel_err},
          {"max_mass_shell_drift", opt(max_mass_shell_drift)},
          {"max_discrete_energy_drift", opt(max_discrete_energy_drift)},
          {"max_noether_drift", opt(max_noether_drift)},
          {"wall_time_s", wall_time_s},
          {"solver_iterations", solver_iterations},
          {"max_solver_iterations", max_solver_iterations},
          {"fallback_steps", fallback_steps}};
}

// ---------------------------------------------------------------------------

namespace {

// Builds the row for x^n from the step n -> n+1.
class RowBuilder {
public:
  RowBuilder(const FieldModel& model, Method method, double h, std::optional<LorentzGenerator> gen)
      : model_(model), method_(method), h_(h), gen_(std::move(gen)) {}

  TrajectoryRecord build(const StepRecord& s) {
    TrajectoryRecord r;
    r.n = s.n;
    r.tau = static_cast<double>(s.n) * h_;
    r.t = s.x_old.t;
    r.x = s.x_old.x;
    const Velocity4 grid = s.n == 0 ? s.u_old : grid_momentum(s.u_old, s.u_new);
    r.gamma = grid.gamma;
    r.u = grid.u;

    const Vec3 mid = 0.5 * (s.x_old.x + s.x_new.x);
    const double phi_avg = 0.5 * (model_.phi(s.x_old.x) + model_.phi(s.x_new.x));
    const bool trapezoidal = method_ == Method::Variational || method_ == Method::NonrelVariational;
    const double potential_half = trapezoidal ? phi_avg : model_.phi(mid);
    if (is_relativistic(method_)) {
      r.energy = energy(model_, r.x, r.gamma);
      r.mass_shell = mass_shell(s.u_new);
      r.discrete_energy = s.u_new.gamma + potential_half;
    } else {
      r.energy = 0.5 * dot(r.u, r.u) + model_.phi(r.x);
      r.discrete_energy = 0.5 * dot(s.u_new.u, s.u_new.u) + potential_half;
    }
    if (gen_) {
      r.noether = s.p_old ? noether(s.x_old, *s.p_old, *gen_) : noether(model_, s.x_old, grid, *gen_);
    }
    if (s.n == 0) h0_ = r.energy;
    r.energy_rel_err = h0_ != 0.0 ? (r.energy - h0_) / h0_ : r.energy - h0_;
    return r;
  }

private:
  const FieldModel& model_;
  Method method_;
  double h_;
  std::optional<LorentzGenerator> gen_;
  double h0_ = 0.0;
};

std::string perturbed_path(const std::string& out, int k) {
  const std::filesystem::path p(out);
  auto name = p.stem().string() + "_k" + std::to_string(k) + p.extension().string();
  return (p.parent_path() / name).string();
}

} // namespace

RunSummary run_experiment(const ExperimentConfig& cfg, const RecordSink& sink) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();

  FieldPtr field = cfg.field;
  Vec3 u0 = cfg.u0;
  double h = cfg.h;
  if (cfg.epsilon && is_relativistic(cfg.method)) {
    const double e = *cfg.epsilon;
    field = std::make_shared<ScaledField>(field, e * e, e);
    u0 = e * u0;
    h /= e;
  }
  const std::int64_t steps = cfg.steps();

  Propagator prop(field, cfg.method, h, cfg.solver, Position4{0.0, cfg.x0}, Velocity4::on_shell(u0));
  RowBuilder rows(*field, cfg.method, h, cfg.generator);

  std::ofstream out;
  if (!cfg.out.empty()) {
    out.open(cfg.out);
    if (!out) throw ValidationError("cannot open output file '" + cfg.out + "'");
    out << kCsvHeader << '\n';
  }

  SummaryAccumulator acc;
  RunSummary stats;
  const auto every = static_cast<std::int64_t>(cfg.record_every);
  for (std::int64_t n = 0; n <= steps; ++n) {
    StepRecord step;
    try {
      step = prop.advance();
    } catch (const NoConvergence& e) {
      throw StepFailure(static_cast<std::size_t>(n), e.what());
    } catch (const SingularMatrix& e) {
      throw StepFailure(static_cast<std::size_t>(n), e.what());
    }
    stats.solver_iterations += step.stats.iterations;
    stats.max_solver_iterations = std::max(stats.max_solver_iterations, step.stats.iterations);
    stats.fallback_steps += step.stats.used_fallback ? 1 : 0;
    if (n % every != 0 && n != steps) continue;
    const TrajectoryRecord row = rows.build(step);
    acc.add(row);
    if (out.is_open()) out << format_record(row) << '\n';
    if (sink) sink(row);
  }

  RunSummary summary = acc.summary();
  summary.solver_iterations = stats.solver_iterations;
  summary.max_solver_iterations = stats.max_solver_iterations;
  summary.fallback_steps = stats.fallback_steps;
  summary.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return summary;
}

std::vector<RunSummary> run_perturbed(const ExperimentConfig& cfg) {
  cfg.validate();
  const Perturbation p = cfg.perturb.value_or(Perturbation{0.0, 1});
  std::vector<std::future<RunSummary>> jobs;
  for (int k = 0; k < p.count; ++k) {
    ExperimentConfig run = cfg;
    run.perturb.reset();
    run.x0[1] += k * p.delta;
    if (!cfg.out.empty()) run.out = perturbed_path(cfg.out, k);
    jobs.push_back(std::async(std::launch::async, [run] { return run_experiment(run); }));
  }
  std::vector<RunSummary> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

// ---------------------------------------------------------------------------

std::vector<LimitRow> run_limit_study(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.epsilons.empty()) throw ValidationError("limit study needs at least one epsilon");
  const std::int64_t steps = cfg.steps();
  const Position4 x0{0.0, cfg.x0};

  std::vector<Vec3> boris_x;
  std::vector<Vec3> boris_v;
  {
    Propagator boris(cfg.field, Method::Boris, cfg.h, cfg.solver, x0, Velocity4{1.0, cfg.u0});
    for (std::int64_t n = 0; n < steps; ++n) {
      const StepRecord s = boris.advance();
      boris_x.push_back(s.x_old.x);
      boris_v.push_back(s.u_new.u);
    }
    boris_x.push_back(boris.position().x);
  }

  std::vector<LimitRow> table;
  for (double eps : cfg.epsilons) {
    LimitRow row{eps, 0.0, 0.0};
    if (eps > 0.0) {
      auto scaled = std::make_shared<ScaledField>(cfg.field, eps * eps, eps);
      Propagator rel(scaled, Method::Explicit, cfg.h / eps, cfg.solver, x0, Velocity4::on_shell(eps * cfg.u0));
      for (std::int64_t n = 0; n < steps; ++n) {
        const StepRecord s = rel.advance();
        row.max_position_diff = std::max(row.max_position_diff, norm_inf(s.x_old.x - boris_x[n]));
        row.max_velocity_diff =
            std::max(row.max_velocity_diff, norm_inf((1.0 / eps) * s.u_new.u - boris_v[n]));
      }
      row.max_position_diff = std::max(row.max_position_diff, norm_inf(rel.position().x - boris_x.back()));
    }
    table.push_back(row);
  }
  return table;
}

// ---------------------------------------------------------------------------

FigureSeries emit_figure_data(const std::string& records_path, const FigureWindow& window) {
  const std::vector<TrajectoryRecord> rows = read_records(records_path);
  if (window.stride < 1) throw ValidationError("stride must be at least 1");
  FigureSeries fig;
  if (window.h) {
    fig.h = *window.h;
  } else {
    if (rows.size() < 2) throw ValidationError("cannot infer h from a single row; pass it explicitly");
    fig.h = (rows[1].tau - rows[0].tau) / static_cast<double>(rows[1].n - rows[0].n);
  }
  fig.c = window.c;
  fig.envelope = window.c * fig.h * fig.h;
  std::size_t k = 0;
  for (const auto& r : rows) {
    if (r.tau < window.tau_min || r.tau > window.tau_max) continue;
    if (k++ % window.stride != 0) continue;
    fig.tau.push_back(r.tau);
    fig.energy_rel_err.push_back(r.energy_rel_err);
  }
  return fig;
}

void write_figure_csv(const FigureSeries& series, std::ostream& os) {
  os << "# h=" << format_double(series.h) << " c=" << format_double(series.c)
     << " envelope=" << format_double(series.envelope) << '\n';
  os << "tau,energy_rel_err,lower,upper\n";
  for (std::size_t i = 0; i < series.tau.size(); ++i) {
    os << format_double(series.tau[i]) << ',' << format_double(series.energy_rel_err[i]) << ','
       << format_double(-series.envelope) << ',' << format_double(series.envelope) << '\n';
  }
}

} // namespace rlf
