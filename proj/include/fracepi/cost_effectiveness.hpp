#ifndef FRACEPI_COST_EFFECTIVENESS_HPP
#define FRACEPI_COST_EFFECTIVENESS_HPP

#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <vector>

#include "fracepi/control.hpp"
#include "fracepi/csv.hpp"
#include "fracepi/error.hpp"
#include "fracepi/model.hpp"
#include "fracepi/pece.hpp"

namespace fracepi {

/// i*(t) = I*(t) + P*(t) on the trajectory grid.
inline std::vector<double> infectious_curve(const Trajectory<kCompartments>& traj) {
  std::vector<double> out;
  out.reserve(traj.values.size());
  for (const auto& y : traj.values) out.push_back(y[cmp::I] + y[cmp::P]);
  return out;
}

inline double trapezoid(const std::vector<double>& f, double h) {
  if (f.size() < 2) return 0.0;
  double sum = 0.5 * (f.front() + f.back());
  for (std::size_t k = 1; k + 1 < f.size(); ++k) sum += f[k];
  return sum * h;
}

/// E_f(t) = 1 - i*(t) / i(0).
inline std::vector<double> efficacy(const Trajectory<kCompartments>& controlled, double i0) {
  if (!(i0 > 0.0)) throw UndefinedValue("efficacy undefined: i(0) must be positive");
  std::vector<double> out;
  out.reserve(controlled.values.size());
  for (double i : infectious_curve(controlled)) out.push_back(1.0 - i / i0);
  return out;
}

/// AV = tf i(0) - integral of i*(t) over [0, tf].
inline double averted_cases(const Trajectory<kCompartments>& controlled, double i0, double tf) {
  return tf * i0 - trapezoid(infectious_curve(controlled), controlled.grid.h());
}

/// F = AV / (i(0) tf).
inline double effectiveness(const Trajectory<kCompartments>& controlled, double i0, double tf) {
  if (!(i0 > 0.0 && tf > 0.0)) throw UndefinedValue("effectiveness undefined: i(0) tf must be positive");
  return averted_cases(controlled, i0, tf) / (i0 * tf);
}

/// TC = integral of C1 v* S* + C2 m* i* over [0, tf].
inline double total_cost(const Trajectory<kCompartments>& state, const ControlSchedule& controls, double c1 = 1.0,
                         double c2 = 1.0) {
  if (!(state.grid == controls.grid) || state.values.size() != controls.v.size()) {
    throw AlignmentError("total_cost: state and control grids differ");
  }
  std::vector<double> integrand(state.values.size());
  for (std::size_t k = 0; k < integrand.size(); ++k) {
    const auto& y = state.values[k];
    integrand[k] = c1 * controls.v[k] * y[cmp::S] + c2 * controls.m[k] * (y[cmp::I] + y[cmp::P]);
  }
  return trapezoid(integrand, state.grid.h());
}

inline double acer(double tc, double av) {
  if (av == 0.0) throw UndefinedValue("ACER undefined: no cases averted");
  return tc / av;
}

/// Table-style summary of one controlled run. Raw values are in individuals
/// (AV, individual-days) and cost units. `report_scale` divides AV and TC for
/// the scaled columns; ACER and F are unit-free.
struct EffectivenessReport {
  double alpha = 1.0;
  double i0 = 0.0;
  double tf = 0.0;
  double averted = 0.0;
  double total_cost = 0.0;
  std::optional<double> acer;
  double f_bar = 0.0;
  double report_scale = 1.0;
  std::vector<double> efficacy_curve;

  double averted_scaled() const { return averted / report_scale; }
  double total_cost_scaled() const { return total_cost / report_scale; }
};

inline EffectivenessReport evaluate_effectiveness(double alpha, const Trajectory<kCompartments>& state,
                                                  const ControlSchedule& controls, double c1 = 1.0, double c2 = 1.0,
                                                  double report_scale = 1.0) {
  if (!(report_scale > 0.0)) throw InvalidArgument("report scale must be positive");
  EffectivenessReport r;
  r.alpha = alpha;
  const auto& y0 = state.values.front();
  r.i0 = y0[cmp::I] + y0[cmp::P];
  r.tf = state.grid.tf() - state.grid.t0();
  r.efficacy_curve = efficacy(state, r.i0);
  r.averted = averted_cases(state, r.i0, r.tf);
  r.f_bar = effectiveness(state, r.i0, r.tf);
  r.total_cost = total_cost(state, controls, c1, c2);
  if (r.averted != 0.0) r.acer = acer(r.total_cost, r.averted);
  r.report_scale = report_scale;
  return r;
}

/// Reporting scale that maps this run's i(0) tf onto a reference value.
/// With reference = AV/F read off a published table the scaled AV and TC are
/// expressed in that table's units.
inline double reporting_scale_for(double i0, double tf, double reference_i0_tf) {
  if (!(reference_i0_tf > 0.0)) throw InvalidArgument("reference i(0) tf must be positive");
  return i0 * tf / reference_i0_tf;
}

}  // namespace fracepi

#endif  // FRACEPI_COST_EFFECTIVENESS_HPP
