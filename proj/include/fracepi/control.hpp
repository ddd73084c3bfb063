#ifndef FRACEPI_CONTROL_HPP
#define FRACEPI_CONTROL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "fracepi/csv.hpp"
#include "fracepi/error.hpp"
#include "fracepi/model.hpp"
#include "fracepi/pece.hpp"

namespace fracepi {

/// Weights of the running cost k1 I + k2 P + k3 v^2 + k4 m^2.
struct CostWeights {
  double k1 = 1.0;
  double k2 = 5.0;
  double k3 = 1.0;
  double k4 = 10.0;

  /// k1, k2 may be zero (cost blind to infections); k3, k4 divide the control
  /// characterization and must be positive.
  void validate() const {
    const std::array<std::pair<double, const char*>, 2> infection{{{k1, "k1"}, {k2, "k2"}}};
    for (const auto& [v, name] : infection) {
      if (!(v >= 0.0 && std::isfinite(v))) {
        throw ConfigError(std::string("control.weights.") + name, "must be non-negative");
      }
    }
    const std::array<std::pair<double, const char*>, 2> control{{{k3, "k3"}, {k4, "k4"}}};
    for (const auto& [v, name] : control) {
      if (!(v > 0.0 && std::isfinite(v))) throw ConfigError(std::string("control.weights.") + name, "must be positive");
    }
  }
};

/// Box constraints 0 <= v <= v_max, 0 <= m <= m_max.
struct ControlBounds {
  double v_max = 0.003;
  double m_max = 0.0;

  void validate() const {
    if (!(v_max >= 0.0 && std::isfinite(v_max))) throw ConfigError("control.v_max", "must be non-negative");
    if (!(m_max >= 0.0 && m_max <= 1.0)) throw ConfigError("control.m_max", "must lie in [0, 1]");
  }
};

/// Vaccination rate v and contact reduction m sampled on a grid.
struct ControlSchedule {
  TimeGrid grid;
  std::vector<double> v;
  std::vector<double> m;

  static ControlSchedule zeros(const TimeGrid& grid) {
    return {grid, std::vector<double>(grid.size(), 0.0), std::vector<double>(grid.size(), 0.0)};
  }
  static ControlSchedule constant(const TimeGrid& grid, double v, double m) {
    return {grid, std::vector<double>(grid.size(), v), std::vector<double>(grid.size(), m)};
  }

  bool within(const ControlBounds& b) const {
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!(v[k] >= 0.0 && v[k] <= b.v_max && m[k] >= 0.0 && m[k] <= b.m_max)) return false;
    }
    return true;
  }
};

using AdjointState = std::array<double, kCompartments>;

inline const std::array<std::string, kCompartments>& adjoint_names() {
  static const std::array<std::string, kCompartments> names{"xi1", "xi2", "xi3", "xi4",
                                                            "xi5", "xi6", "xi7", "xi8"};
  return names;
}

/// The published co-state equation for the hospitalized class carries the
/// opposite sign on its transmission term from the Hamiltonian derivative.
/// hamiltonian_consistent uses the derivative; as_printed keeps the published sign.
enum class AdjointForm { hamiltonian_consistent, as_printed };

/// which controls the sweep may use
enum class ControlScenario { both, only_v, only_m };

struct SweepConfig {
  ControlBounds bounds{};
  double relaxation = 0.5;
  double tolerance = 1e-3;
  std::size_t max_iterations = 200;
  double step = 0.1;
  double horizon = 52.0;
  ControlScenario scenario = ControlScenario::both;
  AdjointForm adjoint_form = AdjointForm::hamiltonian_consistent;

  void validate() const {
    bounds.validate();
    if (!(relaxation > 0.0 && relaxation <= 1.0)) throw ConfigError("control.relaxation", "must lie in (0, 1]");
    if (!(tolerance > 0.0)) throw ConfigError("control.tolerance", "must be positive");
    if (max_iterations == 0) throw ConfigError("control.max_iterations", "must be at least 1");
  }

  /// Bounds after the scenario switches a control off.
  ControlBounds effective_bounds() const {
    ControlBounds b = bounds;
    if (scenario == ControlScenario::only_v) b.m_max = 0.0;
    if (scenario == ControlScenario::only_m) b.v_max = 0.0;
    return b;
  }
};

inline CompartmentState rhs_controlled(double t, const CompartmentState& y, const ModelParams& params,
                                       FractionalOrder order, const ControlSchedule& controls) {
  const std::size_t k = controls.grid.nearest_index(t);
  return seipahrf_derivatives(alpha_rates(params, order), params, y, controls.m[k], controls.v[k]);
}

/// Callable controlled dynamics; the schedule is read at the nearest node.
class ControlledModel {
public:
  ControlledModel(const ModelParams& params, FractionalOrder order, const ControlSchedule& controls)
      : params_(params), rates_(alpha_rates(params, order)), controls_(controls) {}

  CompartmentState operator()(double t, const CompartmentState& y) const {
    const std::size_t k = controls_.grid.nearest_index(t);
    return seipahrf_derivatives(rates_, params_, y, controls_.m[k], controls_.v[k]);
  }

private:
  ModelParams params_;
  EffectiveRates rates_;
  const ControlSchedule& controls_;
};

inline double hamiltonian(const CompartmentState& y, const AdjointState& xi, double v, double m,
                          const ModelParams& params, FractionalOrder order, const CostWeights& w) {
  const auto d = seipahrf_derivatives(alpha_rates(params, order), params, y, m, v);
  double h = w.k1 * y[cmp::I] + w.k2 * y[cmp::P] + w.k3 * v * v + w.k4 * m * m;
  for (std::size_t i = 0; i < kCompartments; ++i) h += xi[i] * d[i];
  return h;
}

/// State and controls held fixed while the co-states are integrated.
struct FrozenPath {
  const Trajectory<kCompartments>& state;
  const ControlSchedule& controls;
};

/// Co-state right-hand side in reversed time t' = tf - t; equals dH/d(state)
/// at original time t. Rows 5, 7, 8 (A, R, F) vanish.
class AdjointModel {
public:
  AdjointModel(const ModelParams& params, FractionalOrder order, const CostWeights& weights, FrozenPath path,
               AdjointForm form = AdjointForm::hamiltonian_consistent)
      : params_(params), rates_(alpha_rates(params, order)), weights_(weights), path_(path), form_(form) {}

  AdjointState operator()(double t_prime, const AdjointState& xi) const {
    const auto& grid = path_.state.grid;
    const std::size_t k = grid.nearest_index(grid.tf() - t_prime);
    const auto& y = path_.state.values[k];
    return evaluate(y, path_.controls.v[k], path_.controls.m[k], xi);
  }

  AdjointState evaluate(const CompartmentState& y, double v, double m, const AdjointState& xi) const {
    using namespace cmp;
    const auto& r = rates_;
    const double n = params_.population;
    const double s = y[S];
    const double damp = m - 1.0;
    const double diff12 = xi[0] - xi[1];
    const double hosp_sign = form_ == AdjointForm::hamiltonian_consistent ? 1.0 : -1.0;

    AdjointState d{};
    d[0] = damp * (r.beta * (y[I] + params_.l * y[H]) + r.beta_prime * y[P]) * diff12 / n + (xi[6] - xi[0]) * v;
    d[1] = r.kappa * (-xi[1] + xi[2] * params_.rho1 + xi[3] * params_.rho2 - xi[4] * (params_.rho1 + params_.rho2 - 1.0));
    d[2] = weights_.k1 - (r.gamma_a + r.gamma_i) * xi[2] + r.gamma_a * xi[5] + r.gamma_i * xi[6] +
           r.delta_i * (xi[7] - xi[2]) + r.beta * damp * diff12 * s / n;
    d[3] = weights_.k2 - (r.gamma_a + r.gamma_i) * xi[3] + r.gamma_a * xi[5] + r.gamma_i * xi[6] +
           r.delta_p * (xi[7] - xi[3]) + r.beta_prime * damp * diff12 * s / n;
    d[4] = 0.0;
    d[5] = r.gamma_r * (xi[6] - xi[5]) + r.delta_h * (xi[7] - xi[5]) +
           hosp_sign * params_.l * r.beta * damp * diff12 * s / n;
    d[6] = 0.0;
    d[7] = 0.0;
    return d;
  }

private:
  ModelParams params_;
  EffectiveRates rates_;
  CostWeights weights_;
  FrozenPath path_;
  AdjointForm form_;
};

inline AdjointState adjoint_rhs(double t_prime, const AdjointState& xi, FrozenPath path, const ModelParams& params,
                                FractionalOrder order, const CostWeights& weights,
                                AdjointForm form = AdjointForm::hamiltonian_consistent) {
  return AdjointModel(params, order, weights, path, form)(t_prime, xi);
}

struct ControlPair {
  double v = 0.0;
  double m = 0.0;
};

/// Pointwise minimizer of the Hamiltonian projected onto the box:
///   v* = clamp((xi1 - xi7) S / (2 k3), 0, v_max)
///   m* = clamp((beta^a (I + l H) + beta'^a P)(xi2 - xi1) S / (2 k4 N), 0, m_max)
inline ControlPair optimal_controls(const CompartmentState& y, const AdjointState& xi, const EffectiveRates& r,
                                    const ModelParams& params, const CostWeights& w, const ControlBounds& b) {
  using namespace cmp;
  const double v = (xi[0] - xi[6]) * y[S] / (2.0 * w.k3);
  const double force = r.beta * (y[I] + params.l * y[H]) + r.beta_prime * y[P];
  const double m = force * (xi[1] - xi[0]) * y[S] / (2.0 * w.k4 * params.population);
  return {std::clamp(v, 0.0, b.v_max), std::clamp(m, 0.0, b.m_max)};
}

inline ControlPair optimal_controls(const CompartmentState& y, const AdjointState& xi, const ModelParams& params,
                                    FractionalOrder order, const CostWeights& w, const ControlBounds& b) {
  return optimal_controls(y, xi, alpha_rates(params, order), params, w, b);
}

/// Trapezoidal quadrature of k1 I + k2 P + k3 v^2 + k4 m^2 over the grid.
inline double cost_functional(const Trajectory<kCompartments>& state, const ControlSchedule& controls,
                              const CostWeights& w) {
  if (!(state.grid == controls.grid) || state.values.size() != controls.v.size() ||
      controls.v.size() != controls.m.size()) {
    throw AlignmentError("cost_functional: state and control grids differ");
  }
  const double h = state.grid.h();
  double sum = 0.0;
  const std::size_t n = state.values.size();
  for (std::size_t k = 0; k < n; ++k) {
    const auto& y = state.values[k];
    const double g = w.k1 * y[cmp::I] + w.k2 * y[cmp::P] + w.k3 * controls.v[k] * controls.v[k] +
                     w.k4 * controls.m[k] * controls.m[k];
    sum += (k == 0 || k + 1 == n) ? 0.5 * g : g;
  }
  return sum * h;
}

struct SweepResult {
  Trajectory<kCompartments> state;
  Trajectory<kCompartments> adjoint;
  ControlSchedule controls;
  double cost = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double residual = 0.0;
  std::vector<double> residual_history;
};

namespace detail {
/// sup |new - old| / max(sup |new|, sup |old|); 0 when both vanish.
inline double relative_change(const std::vector<double>& prev, const std::vector<double>& next) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < next.size(); ++k) {
    diff = std::max(diff, std::abs(next[k] - prev[k]));
    scale = std::max({scale, std::abs(next[k]), std::abs(prev[k])});
  }
  return scale == 0.0 ? 0.0 : diff / scale;
}

template <std::size_t Dim>
double relative_change(const Trajectory<Dim>& prev, const Trajectory<Dim>& next) {
  double worst = 0.0;
  for (std::size_t i = 0; i < Dim; ++i) worst = std::max(worst, relative_change(prev.component(i), next.component(i)));
  return worst;
}
}  // namespace detail

/// Forward-backward sweep for the fractional optimal control problem.
///
/// Each iteration: (1) PECE forward solve of the controlled system under the
/// current controls; (2) PECE solve of the co-state system in reversed time
/// from xi(tf) = 0; (3) pointwise optimal controls; (4) relaxation
/// u <- w u_new + (1 - w) u_old followed by projection onto the box.
/// Converged when the largest relative sup-norm change over states, co-states
/// and controls is within tolerance. On the first iteration only the control
/// change is available. The returned controls are the projected
/// characterization from the last iteration (not the relaxed iterate), and
/// the returned state, co-state and cost are recomputed from them.
inline SweepResult forward_backward_sweep(const ModelParams& params, FractionalOrder order,
                                          const CompartmentState& y0, const CostWeights& weights,
                                          const SweepConfig& config,
                                          std::optional<ControlSchedule> initial_guess = std::nullopt) {
  params.validate();
  weights.validate();
  config.validate();
  const TimeGrid grid(0.0, config.horizon, config.step);
  const ControlBounds bounds = config.effective_bounds();
  const auto rates = alpha_rates(params, order);
  const FractionalAdamsSolver<kCompartments> solver(order, grid);

  ControlSchedule controls = initial_guess.value_or(ControlSchedule::zeros(grid));
  if (!(controls.grid == grid)) throw AlignmentError("initial control guess is not on the sweep grid");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    controls.v[k] = std::clamp(controls.v[k], 0.0, bounds.v_max);
    controls.m[k] = std::clamp(controls.m[k], 0.0, bounds.m_max);
  }

  auto forward = [&](const ControlSchedule& u) { return solver.solve(ControlledModel(params, order, u), y0); };
  auto backward = [&](const Trajectory<kCompartments>& x, const ControlSchedule& u) {
    const AdjointState terminal{};
    return pece_solve_reversed(AdjointModel(params, order, weights, FrozenPath{x, u}, config.adjoint_form),
                               terminal, order, grid);
  };

  SweepResult result{forward(controls), Trajectory<kCompartments>{grid, {}, {}}, controls, 0.0, 0, false, 0.0, {}};
  std::optional<Trajectory<kCompartments>> prev_state, prev_adjoint;

  for (std::size_t iter = 1; iter <= config.max_iterations; ++iter) {
    auto state = iter == 1 ? result.state : forward(controls);
    auto adjoint = backward(state, controls);

    ControlSchedule characterized = controls;
    ControlSchedule next = controls;
    const double w = config.relaxation;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const auto u = optimal_controls(state.values[k], adjoint.values[k], rates, params, weights, bounds);
      characterized.v[k] = u.v;
      characterized.m[k] = u.m;
      next.v[k] = std::clamp(w * u.v + (1.0 - w) * controls.v[k], 0.0, bounds.v_max);
      next.m[k] = std::clamp(w * u.m + (1.0 - w) * controls.m[k], 0.0, bounds.m_max);
    }

    double residual = std::max(detail::relative_change(controls.v, next.v), detail::relative_change(controls.m, next.m));
    if (prev_state) {
      residual = std::max({residual, detail::relative_change(*prev_state, state),
                           detail::relative_change(*prev_adjoint, adjoint)});
    }
    result.residual_history.push_back(residual);
    result.iterations = iter;
    result.residual = residual;
    controls = std::move(next);
    result.controls = std::move(characterized);
    prev_state = std::move(state);
    prev_adjoint = std::move(adjoint);
    if (residual <= config.tolerance) {
      result.converged = true;
      break;
    }
  }

  result.state = forward(result.controls);
  result.adjoint = backward(result.state, result.controls);
  result.cost = cost_functional(result.state, result.controls, weights);
  return result;
}

/// CSV with columns t, S..F, xi1..xi8, v, m.
inline void write_sweep_csv(std::ostream& os, const SweepResult& r) {
  os << 't';
  for (const auto& n : compartment_names()) os << ',' << n;
  for (const auto& n : adjoint_names()) os << ',' << n;
  os << ",v,m\n";
  std::array<double, 1 + 2 * kCompartments + 2> row{};
  for (std::size_t k = 0; k < r.state.values.size(); ++k) {
    row[0] = r.state.grid.at(k);
    for (std::size_t i = 0; i < kCompartments; ++i) {
      row[1 + i] = r.state.values[k][i];
      row[1 + kCompartments + i] = r.adjoint.values[k][i];
    }
    row[1 + 2 * kCompartments] = r.controls.v[k];
    row[2 + 2 * kCompartments] = r.controls.m[k];
    csv::write_row(os, row);
  }
}

}  // namespace fracepi

#endif  // FRACEPI_CONTROL_HPP
