#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"

namespace {

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("fracepi");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("FRACEPI_LOG")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace fracepi;
  configure_logging();

  CLI::App app{"Fractional SEIPAHRF epidemic model: simulation, fitting, sensitivity and optimal control"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::vector<double> alphas;
  bool only_v = false;
  bool only_m = false;
  bool plot_script = false;
  cli::CommandOptions opts;

  auto common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "JSON run configuration")->required();
    sub->add_option("-o,--out", out_dir, "output directory (default: the config's output entry)");
    sub->add_option("-a,--alpha", alphas, "derivative orders, overriding the config")->delimiter(',');
  };

  auto* simulate = app.add_subcommand("simulate", "forward solve of the uncontrolled model");
  common(simulate);
  simulate->add_flag("--emit-plot-script", plot_script, "also write a gnuplot script");
  simulate->add_option("--emit-cases", opts.emit_cases,
                       "write synthetic case data over the fit window generated with the first order");
  simulate->add_option("--scale", opts.cases_scale, "scaling factor for --emit-cases")->capture_default_str();

  auto* fit = app.add_subcommand("fit", "fit the derivative order and scaling factor to case data");
  common(fit);

  auto* sensitivity = app.add_subcommand("sensitivity", "normalized sensitivity indices of R0 over an order grid");
  common(sensitivity);
  sensitivity->add_flag("--emit-plot-script", plot_script, "also write a gnuplot script");

  auto* control = app.add_subcommand("control", "forward-backward sweep for the optimal control problem");
  common(control);
  control->add_flag("--emit-plot-script", plot_script, "also write a gnuplot script");

  auto* report = app.add_subcommand("report", "cost-effectiveness summary of control outputs");
  common(report);

  for (auto* sub : {control, report}) {
    auto* v = sub->add_flag("--only-v", only_v, "vaccination only (m = 0)");
    auto* m = sub->add_flag("--only-m", only_m, "preventive measures only (v = 0)");
    v->excludes(m);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const auto cfg = load_run_config(config_path);
    opts.out_dir = out_dir.empty() ? std::filesystem::path(cfg.output_dir) : std::filesystem::path(out_dir);
    for (double a : alphas) {
      if (!(a > 0.0 && a <= 1.0)) throw ConfigError("--alpha", "orders must lie in (0, 1]");
    }
    opts.alphas = alphas;
    opts.emit_plot_script = plot_script;
    if (only_v) opts.scenario = ControlScenario::only_v;
    if (only_m) opts.scenario = ControlScenario::only_m;

    if (*simulate) return cli::cmd_simulate(cfg, opts, std::cout);
    if (*fit) return cli::cmd_fit(cfg, opts, std::cout);
    if (*sensitivity) return cli::cmd_sensitivity(cfg, opts, std::cout);
    if (*control) return cli::cmd_control(cfg, opts, std::cout);
    if (*report) return cli::cmd_report(cfg, opts, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return 0;
}
