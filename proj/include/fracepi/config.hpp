#ifndef FRACEPI_CONFIG_HPP
#define FRACEPI_CONFIG_HPP

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fracepi/case_data.hpp"
#include "fracepi/control.hpp"
#include "fracepi/error.hpp"
#include "fracepi/fitting.hpp"
#include "fracepi/model.hpp"
#include "fracepi/sensitivity.hpp"

namespace fracepi {

/// Everything a CLI run needs, validated up front. Loaded from a JSON file;
/// unknown keys anywhere are rejected with their dotted path.
struct RunConfig {
  ModelParams params{};
  ModelVariant variant = ModelVariant::dimension_consistent;
  std::vector<double> alphas{1.0};

  double t0 = 0.0;
  double tf = 52.0;
  double step = 0.1;

  CompartmentState initial_state = portugal_initial_conditions();
  ContactReductionSchedule schedule{};

  struct Control {
    ControlBounds bounds{};
    CostWeights weights{};
    double relaxation = 0.5;
    double tolerance = 1e-3;
    std::size_t max_iterations = 200;
    AdjointForm adjoint_form = AdjointForm::hamiltonian_consistent;
    double c1 = 1.0;
    double c2 = 1.0;
    double report_scale = 1.0;
  };
  std::optional<Control> control;

  struct Data {
    std::string cases;
    Date window_start = Date{std::chrono::year{2020} / 12 / 27};
    Date window_end = Date{std::chrono::year{2021} / 2 / 16};
    double initial_alpha = 1.0;
    double initial_scale = 20.0;
    std::vector<double> restart_alphas{1.0, 0.99, 0.95, 0.9};
  };
  std::optional<Data> data;

  struct Sensitivity {
    std::vector<double> alphas;
    std::vector<Parameter> parameters;
  };
  Sensitivity sensitivity{};

  std::string output_dir = "out";

  TimeGrid grid() const { return TimeGrid(t0, tf, step); }

  SweepConfig sweep_config(ControlScenario scenario = ControlScenario::both) const {
    if (!control) throw ConfigError("control", "required key missing");
    SweepConfig s;
    s.bounds = control->bounds;
    s.relaxation = control->relaxation;
    s.tolerance = control->tolerance;
    s.max_iterations = control->max_iterations;
    s.step = step;
    s.horizon = tf - t0;
    s.scenario = scenario;
    s.adjoint_form = control->adjoint_form;
    return s;
  }

  FitConfig fit_config() const {
    if (!data) throw ConfigError("data", "required key missing");
    FitConfig f;
    f.params = params;
    f.initial_state = initial_state;
    f.schedule = schedule;
    f.step = step;
    f.window_start = data->window_start;
    f.window_end = data->window_end;
    f.initial_alpha = data->initial_alpha;
    f.initial_scale = data->initial_scale;
    f.restart_alphas = data->restart_alphas;
    f.variant = variant;
    return f;
  }
};

namespace config_detail {

using nlohmann::json;

/// Reads keys of one JSON object and remembers which were consumed.
class Section {
public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key);
  }

  const json& raw(const std::string& key) {
    if (!has(key)) throw ConfigError(key_path(key), "required key missing");
    return node_.at(key);
  }

  double number(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number()) throw ConfigError(key_path(key), "expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  std::string string(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_string()) throw ConfigError(key_path(key), "expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : fallback;
  }

  std::vector<double> numbers(const std::string& key) {
    const auto& v = raw(key);
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw ConfigError(key_path(key), "expected a number or a list of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw ConfigError(key_path(key), "expected a list of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  Section child(const std::string& key) { return Section(raw(key), key_path(key)); }

  void reject_unknown() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) throw ConfigError(key_path(key), "unknown key");
    }
  }

private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

inline Date date_value(Section& s, const std::string& key, Date fallback) {
  if (!s.has(key)) return fallback;
  const auto text = s.string(key);
  const auto d = parse_date(text);
  if (!d) throw ConfigError(s.key_path(key), "expected an ISO date YYYY-MM-DD, got '" + text + "'");
  return *d;
}

inline std::vector<double> alpha_list(Section& s, const std::string& key) {
  auto list = s.numbers(key);
  if (list.empty()) throw ConfigError(s.key_path(key), "list must not be empty");
  for (double a : list) {
    if (!(a > 0.0 && a <= 1.0)) throw ConfigError(s.key_path(key), "orders must lie in (0, 1]");
  }
  return list;
}

inline ModelParams read_model(Section& s, ModelVariant& variant) {
  ModelParams p;
  p.beta = s.number("beta", p.beta);
  p.beta_prime = s.number("beta_prime", p.beta_prime);
  p.l = s.number("l", p.l);
  p.kappa = s.number("kappa", p.kappa);
  p.rho1 = s.number("rho1", p.rho1);
  p.rho2 = s.number("rho2", p.rho2);
  p.gamma_a = s.number("gamma_a", p.gamma_a);
  p.gamma_i = s.number("gamma_i", p.gamma_i);
  p.gamma_r = s.number("gamma_r", p.gamma_r);
  p.delta_i = s.number("delta_i", p.delta_i);
  p.delta_p = s.number("delta_p", p.delta_p);
  p.delta_h = s.number("delta_h", p.delta_h);
  p.population = s.number("population", p.population);
  const auto v = s.string("variant", "dimension_consistent");
  if (v == "dimension_consistent") {
    variant = ModelVariant::dimension_consistent;
  } else if (v == "original") {
    variant = ModelVariant::original;
  } else {
    throw ConfigError(s.key_path("variant"), "expected 'dimension_consistent' or 'original'");
  }
  s.reject_unknown();
  p.validate();
  return p;
}

inline CompartmentState read_initial_state(Section& root, double population) {
  if (!root.has("initial_conditions")) return portugal_initial_conditions(population);
  Section s = root.child("initial_conditions");
  const auto preset = s.string("preset", "");
  CompartmentState y{};
  if (!preset.empty()) {
    if (preset != "portugal") throw ConfigError(s.key_path("preset"), "unknown preset '" + preset + "'");
    const auto balance = s.string("fatality_balance", "as_published");
    FatalityBalance fb;
    if (balance == "as_published") {
      fb = FatalityBalance::as_published;
    } else if (balance == "closed") {
      fb = FatalityBalance::closed;
    } else {
      throw ConfigError(s.key_path("fatality_balance"), "expected 'as_published' or 'closed'");
    }
    y = portugal_initial_conditions(population, fb);
  } else {
    const auto& names = compartment_names();
    for (std::size_t i = 0; i < kCompartments; ++i) {
      y[i] = s.number(names[i]);
      if (!(y[i] >= 0.0)) throw ConfigError(s.key_path(names[i]), "must be non-negative");
    }
  }
  s.reject_unknown();
  return y;
}

inline ContactReductionSchedule read_schedule(Section& s) {
  const auto interp = s.string("interpolation", "piecewise_linear");
  ContactReductionSchedule::Interpolation mode;
  if (interp == "piecewise_linear") {
    mode = ContactReductionSchedule::Interpolation::piecewise_linear;
  } else if (interp == "piecewise_constant") {
    mode = ContactReductionSchedule::Interpolation::piecewise_constant;
  } else {
    throw ConfigError(s.key_path("interpolation"), "expected 'piecewise_linear' or 'piecewise_constant'");
  }
  std::vector<std::pair<double, double>> points;
  const auto& bps = s.raw("breakpoints");
  if (!bps.is_array()) throw ConfigError(s.key_path("breakpoints"), "expected a list of [time, level] pairs");
  for (const auto& bp : bps) {
    if (!bp.is_array() || bp.size() != 2 || !bp[0].is_number() || !bp[1].is_number()) {
      throw ConfigError(s.key_path("breakpoints"), "expected a list of [time, level] pairs");
    }
    points.emplace_back(bp[0].get<double>(), bp[1].get<double>());
  }
  s.reject_unknown();
  return ContactReductionSchedule(std::move(points), mode);
}

inline RunConfig::Control read_control(Section& s) {
  RunConfig::Control c;
  c.bounds.v_max = s.number("v_max", c.bounds.v_max);
  c.bounds.m_max = s.number("m_max");
  c.bounds.validate();
  if (s.has("weights")) {
    Section w = s.child("weights");
    c.weights.k1 = w.number("k1", c.weights.k1);
    c.weights.k2 = w.number("k2", c.weights.k2);
    c.weights.k3 = w.number("k3", c.weights.k3);
    c.weights.k4 = w.number("k4", c.weights.k4);
    w.reject_unknown();
  }
  c.weights.validate();
  c.relaxation = s.number("relaxation", c.relaxation);
  c.tolerance = s.number("tolerance", c.tolerance);
  const double iters = s.number("max_iterations", static_cast<double>(c.max_iterations));
  if (!(iters >= 1.0 && iters == std::floor(iters))) {
    throw ConfigError(s.key_path("max_iterations"), "expected a positive integer");
  }
  c.max_iterations = static_cast<std::size_t>(iters);
  const auto form = s.string("adjoint_form", "hamiltonian_consistent");
  if (form == "hamiltonian_consistent") {
    c.adjoint_form = AdjointForm::hamiltonian_consistent;
  } else if (form == "as_printed") {
    c.adjoint_form = AdjointForm::as_printed;
  } else {
    throw ConfigError(s.key_path("adjoint_form"), "expected 'hamiltonian_consistent' or 'as_printed'");
  }
  c.c1 = s.number("C1", c.c1);
  c.c2 = s.number("C2", c.c2);
  c.report_scale = s.number("report_scale", c.report_scale);
  if (!(c.report_scale > 0.0)) throw ConfigError(s.key_path("report_scale"), "must be positive");
  s.reject_unknown();
  SweepConfig probe;
  probe.bounds = c.bounds;
  probe.relaxation = c.relaxation;
  probe.tolerance = c.tolerance;
  probe.max_iterations = c.max_iterations;
  probe.validate();
  return c;
}

inline RunConfig::Data read_data(Section& s, const std::filesystem::path& base_dir) {
  RunConfig::Data d;
  const std::filesystem::path cases = s.string("cases");
  d.cases = (cases.is_absolute() ? cases : base_dir / cases).lexically_normal().string();
  d.window_start = date_value(s, "window_start", d.window_start);
  d.window_end = date_value(s, "window_end", d.window_end);
  if (d.window_end < d.window_start) throw ConfigError(s.key_path("window_end"), "fit window is empty");
  d.initial_alpha = s.number("initial_alpha", d.initial_alpha);
  if (!(d.initial_alpha > 0.0 && d.initial_alpha <= 1.0)) {
    throw ConfigError(s.key_path("initial_alpha"), "must lie in (0, 1]");
  }
  d.initial_scale = s.number("initial_scale", d.initial_scale);
  if (!(d.initial_scale > 0.0)) throw ConfigError(s.key_path("initial_scale"), "must be positive");
  if (s.has("restart_alphas")) d.restart_alphas = alpha_list(s, "restart_alphas");
  s.reject_unknown();
  return d;
}

inline RunConfig::Sensitivity read_sensitivity(Section& s) {
  RunConfig::Sensitivity out;
  if (s.has("alphas")) out.alphas = alpha_list(s, "alphas");
  if (s.has("parameters")) {
    const auto& list = s.raw("parameters");
    if (!list.is_array()) throw ConfigError(s.key_path("parameters"), "expected a list of parameter names");
    for (const auto& name : list) {
      if (!name.is_string()) throw ConfigError(s.key_path("parameters"), "expected a list of parameter names");
      const auto text = name.get<std::string>();
      bool known = false;
      for (Parameter p : kAllParameters) known = known || parameter_name(p) == text;
      if (!known) throw ConfigError(s.key_path("parameters"), "unknown parameter '" + text + "'");
      out.parameters.push_back(parse_parameter(text));
    }
  }
  s.reject_unknown();
  return out;
}

}  // namespace config_detail

/// Parses a run configuration. Relative paths resolve against base_dir.
inline RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = ".") {
  using namespace config_detail;
  RunConfig cfg;
  Section root(doc, "");

  if (root.has("model")) {
    Section m = root.child("model");
    cfg.params = read_model(m, cfg.variant);
  }
  cfg.alphas = alpha_list(root, "alpha");

  if (root.has("grid")) {
    Section g = root.child("grid");
    cfg.t0 = g.number("t0", cfg.t0);
    cfg.tf = g.number("tf", cfg.tf);
    cfg.step = g.number("h", cfg.step);
    g.reject_unknown();
    try {
      (void)cfg.grid();
    } catch (const InvalidArgument& e) {
      throw ConfigError("grid", e.what());
    }
  }

  cfg.initial_state = read_initial_state(root, cfg.params.population);

  if (root.has("contact_schedule")) {
    Section s = root.child("contact_schedule");
    cfg.schedule = read_schedule(s);
  }
  if (root.has("control")) {
    Section s = root.child("control");
    cfg.control = read_control(s);
  }
  if (root.has("data")) {
    Section s = root.child("data");
    cfg.data = read_data(s, base_dir);
  }
  if (root.has("sensitivity")) {
    Section s = root.child("sensitivity");
    cfg.sensitivity = read_sensitivity(s);
  }
  cfg.output_dir = root.string("output", cfg.output_dir);
  root.reject_unknown();
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("--config", std::string("malformed JSON: ") + e.what());
  }
  return parse_run_config(doc, std::filesystem::path(path).parent_path());
}

}  // namespace fracepi

#endif  // FRACEPI_CONFIG_HPP
