// rlf: command-line driver for the relativistic leapfrog experiments.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "rlf/experiment.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;

using nlohmann::json;
using rlf::ExperimentConfig;

ExperimentConfig load_base(const std::string& config_path, const std::string& preset) {
  if (config_path.empty()) return rlf::config_from_preset(preset);
  std::ifstream in(config_path);
  if (!in) throw rlf::ValidationError("cannot open config '" + config_path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw rlf::ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  return rlf::config_from_json(doc);
}

// "k*1e-15:5" or "1e-15:5".
rlf::Perturbation parse_perturb(std::string spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw rlf::ValidationError("--perturb expects DELTA:COUNT");
  std::string delta = spec.substr(0, colon);
  const std::string count = spec.substr(colon + 1);
  if (delta.rfind("k*", 0) == 0) delta.erase(0, 2);
  rlf::Perturbation p;
  const auto r1 = std::from_chars(delta.data(), delta.data() + delta.size(), p.delta);
  const auto r2 = std::from_chars(count.data(), count.data() + count.size(), p.count);
  if (r1.ec != std::errc() || r1.ptr != delta.data() + delta.size() || r2.ec != std::errc() ||
      r2.ptr != count.data() + count.size())
    throw rlf::ValidationError("--perturb expects DELTA:COUNT, got '" + spec + "'");
  return p;
}

rlf::Method method_from(const std::string& name) {
  const auto m = rlf::parse_method(name);
  if (!m) throw rlf::ValidationError("unknown method '" + name + "'");
  return *m;
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relativistic charged-particle leapfrog integrators"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);

  std::string config_path;
  std::string preset = "example1";
  std::string method = "explicit";
  std::optional<double> h;
  std::optional<double> tau_end;
  std::optional<std::size_t> record_every;
  std::string out;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::string perturb;
  std::optional<double> epsilon;

  const std::vector<std::string> presets = rlf::preset_names();

  auto* run = app.add_subcommand("run", "integrate one trajectory and write CSV records");
  run->add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
  run->add_option("--preset", preset)->check(CLI::IsMember(presets));
  run->add_option("--method", method);
  run->add_option("--h", h);
  run->add_option("--tau-end", tau_end);
  run->add_option("--record-every", record_every);
  run->add_option("--out", out);
  run->add_option("--tol", tol);
  run->add_option("--max-iter", max_iter);
  run->add_option("--perturb", perturb, "k*DELTA:COUNT");
  run->add_option("--epsilon", epsilon, "run the eps-scaled relativistic problem");

  std::vector<double> epsilons;
  auto* limit = app.add_subcommand("limit-study", "eps-scaled explicit leapfrog against Boris");
  limit->add_option("--config", config_path)->check(CLI::ExistingFile);
  limit->add_option("--preset", preset)->check(CLI::IsMember(presets));
  limit->add_option("--epsilons", epsilons)->delimiter(',')->required();
  limit->add_option("--h", h);
  limit->add_option("--tau-end", tau_end);

  std::vector<double> h_list;
  double h_ref = 1e-4;
  auto* conv = app.add_subcommand("converge", "observed order against an RK4 reference");
  conv->add_option("--preset", preset)->check(CLI::IsMember(presets));
  conv->add_option("--method", method);
  conv->add_option("--h-list", h_list)->delimiter(',')->required();
  conv->add_option("--tau-end", tau_end);
  conv->add_option("--h-ref", h_ref);
  conv->add_option("--tol", tol);
  conv->add_option("--out", out, "CSV h,error,observed_order");

  std::string records;
  rlf::FigureWindow window;
  auto* fig = app.add_subcommand("figure", "energy-error series with the +-c h^2 envelope");
  fig->add_option("--records", records)->required();
  fig->add_option("--tau-min", window.tau_min);
  fig->add_option("--tau-max", window.tau_max);
  fig->add_option("--stride", window.stride);
  fig->add_option("--c", window.c);
  fig->add_option("--h", h);
  fig->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*run) {
      ExperimentConfig cfg = load_base(config_path, preset);
      if (run->count("--method") || config_path.empty()) cfg.method = method_from(method);
      if (h) cfg.h = *h;
      if (tau_end) cfg.tau_end = *tau_end;
      if (record_every) cfg.record_every = *record_every;
      if (!out.empty()) cfg.out = out;
      if (tol) cfg.solver.tol = *tol;
      if (max_iter) cfg.solver.max_iter = *max_iter;
      if (epsilon) cfg.epsilon = epsilon;
      if (!perturb.empty()) cfg.perturb = parse_perturb(perturb);
      cfg.validate();
      if (cfg.perturb) {
        json runs = json::array();
        for (const auto& s : rlf::run_perturbed(cfg)) runs.push_back(s.to_json());
        print({{"runs", runs}});
      } else {
        print(rlf::run_experiment(cfg).to_json());
      }
    } else if (*limit) {
      ExperimentConfig cfg = load_base(config_path, preset);
      cfg.epsilons = epsilons;
      if (config_path.empty()) {
        cfg.h = 0.01;
        cfg.tau_end = 10.0;
      }
      if (h) cfg.h = *h;
      if (tau_end) cfg.tau_end = *tau_end;
      json rows = json::array();
      for (const auto& r : rlf::run_limit_study(cfg))
        rows.push_back({{"epsilon", r.epsilon},
                        {"max_position_diff", r.max_position_diff},
                        {"max_velocity_diff", r.max_velocity_diff}});
      print(rows);
    } else if (*conv) {
      ExperimentConfig cfg = rlf::config_from_preset(preset);
      if (tol) cfg.solver.tol = *tol;
      const double horizon = tau_end.value_or(10.0);
      const auto rows = rlf::convergence_order(method_from(method), cfg.field, rlf::Position4{0.0, cfg.x0},
                                               rlf::Velocity4::on_shell(cfg.u0), horizon, h_list, h_ref,
                                               cfg.solver);
      std::ofstream csv;
      if (!out.empty()) {
        csv.open(out);
        if (!csv) throw rlf::ValidationError("cannot open '" + out + "'");
        csv << "h,error,observed_order\n";
      }
      json j = json::array();
      for (const auto& r : rows) {
        const json order = std::isnan(r.observed_order) ? json(nullptr) : json(r.observed_order);
        j.push_back({{"h", r.h}, {"error", r.error}, {"observed_order", order}});
        if (csv.is_open())
          csv << rlf::format_double(r.h) << ',' << rlf::format_double(r.error) << ','
              << (std::isnan(r.observed_order) ? std::string() : rlf::format_double(r.observed_order)) << '\n';
      }
      print(j);
    } else if (*fig) {
      window.h = h;
      const rlf::FigureSeries series = rlf::emit_figure_data(records, window);
      if (out.empty()) {
        rlf::write_figure_csv(series, std::cout);
      } else {
        std::ofstream os(out);
        if (!os) throw rlf::ValidationError("cannot open '" + out + "'");
        rlf::write_figure_csv(series, os);
      }
    }
  } catch (const rlf::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const rlf::StepFailure& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const rlf::NoConvergence& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const rlf::SingularMatrix& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  }
  return 0;
}
