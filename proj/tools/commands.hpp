#ifndef FRACEPI_TOOLS_COMMANDS_HPP
#define FRACEPI_TOOLS_COMMANDS_HPP

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "fracepi/case_data.hpp"
#include "fracepi/config.hpp"
#include "fracepi/control.hpp"
#include "fracepi/cost_effectiveness.hpp"
#include "fracepi/csv.hpp"
#include "fracepi/error.hpp"
#include "fracepi/fitting.hpp"
#include "fracepi/model.hpp"
#include "fracepi/sensitivity.hpp"

namespace fracepi::cli {

namespace fs = std::filesystem;

struct CommandOptions {
  fs::path out_dir;
  std::vector<double> alphas;  ///< empty: use the config
  ControlScenario scenario = ControlScenario::both;
  bool emit_plot_script = false;
  std::string emit_cases;  ///< simulate only: write synthetic case data here
  double cases_scale = 15.0;
};

inline std::string alpha_tag(double alpha) { return "alpha_" + csv::format(alpha); }

inline std::string scenario_suffix(ControlScenario s) {
  switch (s) {
    case ControlScenario::only_v: return "_only_v";
    case ControlScenario::only_m: return "_only_m";
    case ControlScenario::both: break;
  }
  return "";
}

inline std::string scenario_name(ControlScenario s) {
  switch (s) {
    case ControlScenario::only_v: return "only_v";
    case ControlScenario::only_m: return "only_m";
    case ControlScenario::both: break;
  }
  return "both";
}

/// `key = value` lines, one per entry, in insertion order.
class Summary {
public:
  explicit Summary(std::string title) { text_ << "# fracepi " << title << '\n'; }

  Summary& add(const std::string& key, double value) { return add(key, csv::format(value)); }
  Summary& add(const std::string& key, const std::string& value) {
    text_ << key << " = " << value << '\n';
    return *this;
  }
  Summary& comment(const std::string& line) {
    text_ << "# " << line << '\n';
    return *this;
  }

  std::string str() const { return text_.str(); }

  void write(const fs::path& path) const {
    auto os = csv::open_output(path.string());
    os << text_.str();
  }

private:
  std::ostringstream text_;
};

inline void prepare_output(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

inline std::vector<double> requested_alphas(const RunConfig& cfg, const CommandOptions& opts) {
  return opts.alphas.empty() ? cfg.alphas : opts.alphas;
}

/// Runs f(alpha) for every alpha concurrently; results keep the input order.
template <class F>
auto map_parallel(const std::vector<double>& alphas, F f) {
  using R = decltype(f(0.0));
  std::vector<std::future<R>> jobs;
  jobs.reserve(alphas.size());
  for (double a : alphas) jobs.push_back(std::async(std::launch::async, f, a));
  std::vector<R> out;
  out.reserve(alphas.size());
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

inline void write_plot_script(const fs::path& path, const std::string& title, const std::vector<std::string>& files,
                              const std::string& using_clause, const std::string& ylabel) {
  auto os = csv::open_output(path.string());
  os << "# gnuplot script\n"
     << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set title '" << title << "'\n"
     << "set xlabel 't (days)'\n"
     << "set ylabel '" << ylabel << "'\n"
     << "plot ";
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (i) os << ", \\\n     ";
    os << "'" << files[i] << "' using " << using_clause << " with lines title '" << files[i] << "'";
  }
  os << '\n';
}

// ---------------------------------------------------------------------------

inline int cmd_simulate(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
  prepare_output(opts.out_dir);
  const auto alphas = requested_alphas(cfg, opts);
  const auto grid = cfg.grid();
  const double n = cfg.params.population;
  const double initial_sum = total_population(cfg.initial_state);

  auto runs = map_parallel(alphas, [&](double a) {
    return simulate(cfg.params, FractionalOrder(a), cfg.initial_state, grid, cfg.schedule, cfg.variant);
  });

  Summary summary("simulate");
  summary.add("population", n).add("initial_sum", initial_sum);
  std::vector<std::string> files;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const auto& traj = runs[i];
    const auto file = "trajectory_" + alpha_tag(alphas[i]) + ".csv";
    files.push_back(file);
    {
      auto os = csv::open_output((opts.out_dir / file).string());
      write_csv(os, traj, compartment_names());
    }
    double drift = 0.0, deviation = 0.0, lowest = 0.0;
    for (const auto& y : traj.values) {
      const double sum = total_population(y);
      drift = std::max(drift, std::abs(sum - initial_sum));
      deviation = std::max(deviation, std::abs(sum - n));
      lowest = std::min(lowest, *std::min_element(y.begin(), y.end()));
    }
    const auto tag = alpha_tag(alphas[i]);
    summary.add(tag + ".r0", basic_reproduction_number(cfg.params, FractionalOrder(alphas[i]), cfg.variant))
        .add(tag + ".max_sum_drift", drift)
        .add(tag + ".max_sum_deviation_from_population", deviation)
        .add(tag + ".most_negative_compartment", lowest)
        .add(tag + ".output", file);
    spdlog::info("simulate alpha={} steps={} drift={}", alphas[i], grid.n_steps(), drift);
  }
  summary.write(opts.out_dir / "simulate.txt");
  out << summary.str();

  if (opts.emit_plot_script) {
    write_plot_script(opts.out_dir / "simulate.gp", "I + P + H", files, "1:($4+$5+$7)", "individuals");
  }

  if (!opts.emit_cases.empty()) {
    const auto fit = cfg.data ? cfg.fit_config() : FitConfig{};
    const auto days = static_cast<std::size_t>((fit.window_end - fit.window_start).count()) + 1;
    const TimeGrid window_grid(0.0, static_cast<double>(days - 1), cfg.step);
    const auto traj =
        simulate(cfg.params, FractionalOrder(alphas.front()), cfg.initial_state, window_grid, cfg.schedule, cfg.variant);
    const auto series = synthesize_case_series(predicted_observable(traj, opts.cases_scale), fit.window_start);
    auto os = csv::open_output(opts.emit_cases);
    write_case_data(os, series);
    spdlog::info("synthetic cases written to {} (alpha={}, s={})", opts.emit_cases, alphas.front(),
                 opts.cases_scale);
  }
  return 0;
}

// ---------------------------------------------------------------------------

inline int cmd_fit(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
  if (!cfg.data) throw ConfigError("data", "required key missing");
  const auto data = load_case_data(cfg.data->cases);
  auto fit_cfg = cfg.fit_config();
  prepare_output(opts.out_dir);

  spdlog::info("fitting {} days of data from {}", data.size(), cfg.data->cases);
  const auto classical = best_scale_for_order(1.0, data, fit_cfg);
  const auto best = fit(data, fit_cfg);

  Summary summary("fit");
  summary.add("data", cfg.data->cases)
      .add("window_start", format_date(fit_cfg.window_start))
      .add("window_end", format_date(fit_cfg.window_end))
      .add("data_norm", best.data_norm)
      .comment("observable = (I + P + H) / s");
  auto row = [&](const std::string& name, const FitResult& r) {
    summary.add(name + ".alpha", r.alpha)
        .add(name + ".s", r.s)
        .add(name + ".absolute_error", r.absolute_error)
        .add(name + ".relative_error", r.relative_error)
        .add(name + ".converged", r.converged ? "true" : "false");
  };
  row("classical", classical);
  row("fractional", best);
  summary.add("evaluations", static_cast<double>(best.evaluations));
  summary.write(opts.out_dir / "fit.txt");
  out << summary.str();

  {
    auto os = csv::open_output((opts.out_dir / "fit_overlay.csv").string());
    write_overlay_csv(os, data, fit_cfg, best.alpha, best.s);
  }
  {
    auto os = csv::open_output((opts.out_dir / "fit_overlay_classical.csv").string());
    write_overlay_csv(os, data, fit_cfg, classical.alpha, classical.s);
  }
  if (!best.converged) spdlog::warn("optimizer hit its iteration cap; best point reported");
  return 0;
}

// ---------------------------------------------------------------------------

inline std::vector<double> default_sensitivity_grid() {
  std::vector<double> grid;
  for (int k = 10; k <= 20; ++k) grid.push_back(k / 20.0);
  return grid;
}

inline int cmd_sensitivity(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
  std::vector<double> alphas = opts.alphas;
  if (alphas.empty()) alphas = cfg.sensitivity.alphas;
  if (alphas.empty()) alphas = default_sensitivity_grid();
  std::vector<Parameter> params = cfg.sensitivity.parameters;
  if (params.empty()) params.assign(kAllParameters.begin(), kAllParameters.end());
  prepare_output(opts.out_dir);

  std::vector<std::future<SensitivityReport>> jobs;
  for (Parameter p : params) {
    jobs.push_back(std::async(std::launch::async, [&, p] { return sensitivity_vs_alpha(p, cfg.params, alphas); }));
  }
  const auto alpha_report = r0_alpha_sensitivity_vs_alpha(cfg.params, alphas);

  Summary summary("sensitivity");
  std::vector<std::string> files;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto report = jobs[i].get();
    const auto name = std::string(parameter_name(params[i]));
    const auto file = "sensitivity_" + name + ".csv";
    files.push_back(file);
    auto os = csv::open_output((opts.out_dir / file).string());
    write_csv(os, report);
    for (std::size_t k = 0; k < alphas.size(); ++k) {
      summary.add(name + "." + alpha_tag(alphas[k]), report.indices[k]);
    }
  }
  {
    auto os = csv::open_output((opts.out_dir / "sensitivity_alpha.csv").string());
    write_csv(os, alpha_report);
    files.push_back("sensitivity_alpha.csv");
  }
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    summary.add("alpha." + alpha_tag(alphas[k]), alpha_report.indices[k]);
    summary.add("r0." + alpha_tag(alphas[k]),
                basic_reproduction_number(cfg.params, FractionalOrder(alphas[k]), cfg.variant));
  }
  summary.write(opts.out_dir / "sensitivity.txt");
  out << summary.str();

  if (opts.emit_plot_script) {
    auto os = csv::open_output((opts.out_dir / "sensitivity.gp").string());
    os << "# gnuplot script\nset datafile separator ','\nset xlabel 'alpha'\nset ylabel 'index'\nplot ";
    for (std::size_t i = 0; i < files.size(); ++i) {
      if (i) os << ", \\\n     ";
      os << "'" << files[i] << "' using 1:2 with linespoints title '" << files[i] << "'";
    }
    os << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------

inline std::string control_file(double alpha, ControlScenario s) {
  return "control_" + alpha_tag(alpha) + scenario_suffix(s) + ".csv";
}

inline int cmd_control(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
  if (!cfg.control) throw ConfigError("control", "required key missing");
  const auto alphas = requested_alphas(cfg, opts);
  const auto sweep = cfg.sweep_config(opts.scenario);
  prepare_output(opts.out_dir);

  auto runs = map_parallel(alphas, [&](double a) {
    return forward_backward_sweep(cfg.params, FractionalOrder(a), cfg.initial_state, cfg.control->weights, sweep);
  });

  Summary summary("control");
  summary.add("scenario", scenario_name(opts.scenario))
      .add("v_max", sweep.effective_bounds().v_max)
      .add("m_max", sweep.effective_bounds().m_max)
      .add("horizon", sweep.horizon)
      .add("step", sweep.step);
  std::vector<std::string> files;
  bool all_converged = true;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const auto& r = runs[i];
    const auto tag = alpha_tag(alphas[i]);
    const auto file = control_file(alphas[i], opts.scenario);
    files.push_back(file);
    {
      auto os = csv::open_output((opts.out_dir / file).string());
      write_sweep_csv(os, r);
    }
    {
      auto os = csv::open_output((opts.out_dir / ("iterations_" + tag + scenario_suffix(opts.scenario) + ".csv")).string());
      os << "iteration,residual\n";
      for (std::size_t k = 0; k < r.residual_history.size(); ++k) {
        os << k + 1 << ',' << csv::format(r.residual_history[k]) << '\n';
      }
    }
    summary.add(tag + ".J", r.cost)
        .add(tag + ".iterations", static_cast<double>(r.iterations))
        .add(tag + ".converged", r.converged ? "true" : "false")
        .add(tag + ".residual", r.residual)
        .add(tag + ".output", file);
    if (!r.converged) {
      all_converged = false;
      spdlog::error("sweep for alpha={} did not converge; final residual {}", alphas[i], r.residual);
    } else {
      spdlog::info("sweep alpha={} converged in {} iterations, J={}", alphas[i], r.iterations, r.cost);
    }
  }
  summary.write(opts.out_dir / ("control" + scenario_suffix(opts.scenario) + ".txt"));
  out << summary.str();

  if (opts.emit_plot_script) {
    write_plot_script(opts.out_dir / ("control" + scenario_suffix(opts.scenario) + ".gp"), "I + P + H", files,
                      "1:($4+$5+$7)", "individuals");
  }
  return all_converged ? 0 : 1;
}

// ---------------------------------------------------------------------------

struct SweepArtifact {
  Trajectory<kCompartments> state;
  ControlSchedule controls;
};

/// Reads a control CSV written by cmd_control back into state and controls.
inline SweepArtifact read_sweep_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("missing control artifact '" + path.string() + "'");
  const std::string source = path.string();
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 1, "empty file");
  const auto header = csv::split(line);
  constexpr std::size_t kColumns = 1 + 2 * kCompartments + 2;
  if (header.size() != kColumns || csv::trim(header.front()) != "t" || csv::trim(header.back()) != "m") {
    throw ParseError(source, 1, "unexpected header");
  }
  std::vector<double> t, v, m;
  std::vector<CompartmentState> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto fields = csv::split(line);
    if (fields.size() != kColumns) throw ParseError(source, line_no, "expected " + std::to_string(kColumns) + " fields");
    std::array<double, kColumns> x{};
    for (std::size_t i = 0; i < kColumns; ++i) {
      if (!csv::parse_double(fields[i], x[i])) throw ParseError(source, line_no, "not a number");
    }
    t.push_back(x[0]);
    CompartmentState y{};
    for (std::size_t i = 0; i < kCompartments; ++i) y[i] = x[1 + i];
    rows.push_back(y);
    v.push_back(x[kColumns - 2]);
    m.push_back(x[kColumns - 1]);
  }
  if (t.size() < 2) throw ParseError(source, line_no, "need at least two rows");
  std::optional<TimeGrid> grid;
  try {
    grid.emplace(t.front(), t.back(), t[1] - t[0]);
  } catch (const InvalidArgument& e) {
    throw ValidationError(source + ": " + e.what());
  }
  if (grid->size() != t.size()) throw ValidationError(source + ": time column is not a uniform grid");
  SweepArtifact a{Trajectory<kCompartments>{*grid, std::move(rows), {}}, ControlSchedule{*grid, std::move(v), std::move(m)}};
  return a;
}

inline int cmd_report(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
  const auto alphas = requested_alphas(cfg, opts);
  const RunConfig::Control defaults{};
  const auto& c = cfg.control ? *cfg.control : defaults;

  std::vector<SweepArtifact> artifacts;
  for (double a : alphas) artifacts.push_back(read_sweep_csv(opts.out_dir / control_file(a, opts.scenario)));
  for (std::size_t i = 1; i < artifacts.size(); ++i) {
    if (!(artifacts[i].state.grid == artifacts[0].state.grid)) {
      throw AlignmentError("control artifacts for alpha " + csv::format(alphas[0]) + " and " +
                           csv::format(alphas[i]) + " are on different grids");
    }
  }

  Summary summary("report");
  summary.comment("AV in individual-days, TC in cost units; *_scaled divide both by report_scale")
      .add("report_scale", c.report_scale)
      .add("C1", c.c1)
      .add("C2", c.c2);
  std::ostringstream table;
  table << "alpha,AV,TC,ACER,F_bar,AV_scaled,TC_scaled\n";
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const auto& art = artifacts[i];
    const auto r = evaluate_effectiveness(alphas[i], art.state, art.controls, c.c1, c.c2, c.report_scale);
    const auto tag = alpha_tag(alphas[i]);
    const std::string acer_text = r.acer ? csv::format(*r.acer) : "undefined";
    summary.add(tag + ".i0", r.i0)
        .add(tag + ".AV", r.averted)
        .add(tag + ".TC", r.total_cost)
        .add(tag + ".ACER", acer_text)
        .add(tag + ".F_bar", r.f_bar)
        .add(tag + ".AV_scaled", r.averted_scaled())
        .add(tag + ".TC_scaled", r.total_cost_scaled());
    if (!r.acer) summary.comment(tag + ": ACER undefined because no cases were averted (AV = 0)");
    table << csv::format(alphas[i]) << ',' << csv::format(r.averted) << ',' << csv::format(r.total_cost) << ','
          << acer_text << ',' << csv::format(r.f_bar) << ',' << csv::format(r.averted_scaled()) << ','
          << csv::format(r.total_cost_scaled()) << '\n';

    auto os = csv::open_output((opts.out_dir / ("efficacy_" + tag + scenario_suffix(opts.scenario) + ".csv")).string());
    os << "t,efficacy\n";
    for (std::size_t k = 0; k < r.efficacy_curve.size(); ++k) {
      os << csv::format(art.state.grid.at(k)) << ',' << csv::format(r.efficacy_curve[k]) << '\n';
    }
  }
  {
    auto os = csv::open_output((opts.out_dir / ("report" + scenario_suffix(opts.scenario) + ".csv")).string());
    os << table.str();
  }
  summary.write(opts.out_dir / ("report" + scenario_suffix(opts.scenario) + ".txt"));
  out << summary.str();
  return 0;
}

}  // namespace fracepi::cli

#endif  // FRACEPI_TOOLS_COMMANDS_HPP
