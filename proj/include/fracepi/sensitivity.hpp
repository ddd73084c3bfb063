#ifndef FRACEPI_SENSITIVITY_HPP
#define FRACEPI_SENSITIVITY_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "fracepi/csv.hpp"
#include "fracepi/error.hpp"
#include "fracepi/model.hpp"

namespace fracepi {

enum class Parameter {
  beta,
  beta_prime,
  l,
  kappa,
  rho1,
  rho2,
  gamma_a,
  gamma_i,
  gamma_r,
  delta_i,
  delta_p,
  delta_h,
  population,
};

inline constexpr std::array<Parameter, 13> kAllParameters{
    Parameter::beta,    Parameter::beta_prime, Parameter::l,       Parameter::kappa,   Parameter::rho1,
    Parameter::rho2,    Parameter::gamma_a,    Parameter::gamma_i, Parameter::gamma_r, Parameter::delta_i,
    Parameter::delta_p, Parameter::delta_h,    Parameter::population};

inline std::string_view parameter_name(Parameter p) {
  switch (p) {
    case Parameter::beta: return "beta";
    case Parameter::beta_prime: return "beta_prime";
    case Parameter::l: return "l";
    case Parameter::kappa: return "kappa";
    case Parameter::rho1: return "rho1";
    case Parameter::rho2: return "rho2";
    case Parameter::gamma_a: return "gamma_a";
    case Parameter::gamma_i: return "gamma_i";
    case Parameter::gamma_r: return "gamma_r";
    case Parameter::delta_i: return "delta_i";
    case Parameter::delta_p: return "delta_p";
    case Parameter::delta_h: return "delta_h";
    case Parameter::population: return "population";
  }
  return "?";
}

inline Parameter parse_parameter(std::string_view name) {
  for (Parameter p : kAllParameters) {
    if (parameter_name(p) == name) return p;
  }
  throw ConfigError("sensitivity.parameters", "unknown parameter '" + std::string(name) + "'");
}

inline double& parameter_ref(ModelParams& params, Parameter p) {
  switch (p) {
    case Parameter::beta: return params.beta;
    case Parameter::beta_prime: return params.beta_prime;
    case Parameter::l: return params.l;
    case Parameter::kappa: return params.kappa;
    case Parameter::rho1: return params.rho1;
    case Parameter::rho2: return params.rho2;
    case Parameter::gamma_a: return params.gamma_a;
    case Parameter::gamma_i: return params.gamma_i;
    case Parameter::gamma_r: return params.gamma_r;
    case Parameter::delta_i: return params.delta_i;
    case Parameter::delta_p: return params.delta_p;
    case Parameter::delta_h: return params.delta_h;
    case Parameter::population: return params.population;
  }
  return params.beta;
}

inline double parameter_value(const ModelParams& params, Parameter p) {
  ModelParams copy = params;
  return parameter_ref(copy, p);
}

/// kappa and N do not enter R0.
inline bool enters_r0(Parameter p) { return p != Parameter::kappa && p != Parameter::population; }

struct SensitivityReport {
  std::string parameter;
  std::vector<double> alphas;
  std::vector<double> indices;
};

namespace detail {
inline double r0_or_throw(const ModelParams& params, FractionalOrder order) {
  const double r0 = basic_reproduction_number(params, order);
  if (r0 == 0.0) throw UndefinedValue("sensitivity index undefined: R0 = 0");
  return r0;
}
}  // namespace detail

/// Normalized forward sensitivity (dR0/dp)(p/R0), central difference with
/// relative step 1e-6. Parameters outside R0's support report exactly 0.
inline double sensitivity_index(Parameter p, const ModelParams& params, FractionalOrder order) {
  const double r0 = detail::r0_or_throw(params, order);
  if (!enters_r0(p)) return 0.0;
  const double value = parameter_value(params, p);
  if (value == 0.0) return 0.0;

  const double step = 1e-6 * value;
  ModelParams up = params;
  ModelParams down = params;
  parameter_ref(up, p) = value + step;
  parameter_ref(down, p) = value - step;
  const double derivative =
      (basic_reproduction_number(up, order) - basic_reproduction_number(down, order)) / (2.0 * step);
  return derivative * value / r0;
}

inline SensitivityReport sensitivity_vs_alpha(Parameter p, const ModelParams& params,
                                              const std::vector<double>& alpha_grid) {
  SensitivityReport report{std::string(parameter_name(p)), alpha_grid, {}};
  report.indices.reserve(alpha_grid.size());
  for (double a : alpha_grid) report.indices.push_back(sensitivity_index(p, params, FractionalOrder(a)));
  return report;
}

/// (dR0/dalpha)(alpha/R0). Central difference with absolute step 1e-6; at
/// alpha = 1 (no room above) the second-order backward stencil is used.
inline double r0_alpha_sensitivity(const ModelParams& params, FractionalOrder order) {
  const double r0 = detail::r0_or_throw(params, order);
  const double a = order.value();
  const double step = 1e-6;
  auto r0_at = [&](double x) { return basic_reproduction_number(params, FractionalOrder(x)); };
  double derivative;
  if (a + step <= 1.0 && a - step > 0.0) {
    derivative = (r0_at(a + step) - r0_at(a - step)) / (2.0 * step);
  } else {
    derivative = (3.0 * r0 - 4.0 * r0_at(a - step) + r0_at(a - 2.0 * step)) / (2.0 * step);
  }
  return derivative * a / r0;
}

inline SensitivityReport r0_alpha_sensitivity_vs_alpha(const ModelParams& params,
                                                       const std::vector<double>& alpha_grid) {
  SensitivityReport report{"alpha", alpha_grid, {}};
  for (double a : alpha_grid) report.indices.push_back(r0_alpha_sensitivity(params, FractionalOrder(a)));
  return report;
}

inline void write_csv(std::ostream& os, const SensitivityReport& report) {
  os << "alpha,index\n";
  for (std::size_t i = 0; i < report.alphas.size(); ++i) {
    const double row[2] = {report.alphas[i], report.indices[i]};
    csv::write_row(os, row);
  }
}

}  // namespace fracepi

#endif  // FRACEPI_SENSITIVITY_HPP
