#ifndef FRACEPI_FITTING_HPP
#define FRACEPI_FITTING_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "fracepi/case_data.hpp"
#include "fracepi/csv.hpp"
#include "fracepi/error.hpp"
#include "fracepi/model.hpp"
#include "fracepi/nelder_mead.hpp"
#include "fracepi/pece.hpp"

namespace fracepi {

/// Reported-case observable (I + P + H) / s, sampled at whole days from the
/// grid start. s is the only place the scaling factor enters the fit.
inline std::vector<double> predicted_observable(const Trajectory<kCompartments>& traj, double s) {
  if (!(s > 0.0)) throw InvalidArgument("scaling factor must be positive");
  const auto& grid = traj.grid;
  const auto days = static_cast<std::size_t>(std::floor(grid.tf() - grid.t0() + 1e-9));
  std::vector<double> out;
  out.reserve(days + 1);
  for (std::size_t d = 0; d <= days; ++d) {
    const auto& y = traj.values[grid.nearest_index(grid.t0() + static_cast<double>(d))];
    out.push_back((y[cmp::I] + y[cmp::P] + y[cmp::H]) / s);
  }
  return out;
}

struct FitConfig {
  ModelParams params{};
  CompartmentState initial_state = portugal_initial_conditions();
  /// m(t) with t in days since window_start.
  ContactReductionSchedule schedule{};
  double step = 0.1;
  Date window_start = Date{std::chrono::year{2020} / 12 / 27};
  Date window_end = Date{std::chrono::year{2021} / 2 / 16};
  double initial_alpha = 1.0;
  double initial_scale = 20.0;
  std::vector<double> restart_alphas{1.0, 0.99, 0.95, 0.9};
  NelderMeadOptions optimizer{400, 1e-12, 1e-7};
  ModelVariant variant = ModelVariant::dimension_consistent;
};

struct FitErrors {
  double absolute_error = 0.0;  ///< l2 norm of model minus smoothed data, individuals
  double relative_error = 0.0;  ///< absolute_error / l2 norm of the smoothed data
};

struct FitResult {
  double alpha = 1.0;
  double s = 1.0;
  double absolute_error = 0.0;
  double relative_error = 0.0;
  double data_norm = 0.0;
  bool converged = false;
  std::size_t evaluations = 0;
};

/// The slice of a case series covered by the fit window.
struct FitWindow {
  std::size_t first = 0;  ///< index of window_start in the series
  std::size_t days = 0;   ///< number of daily samples

  static FitWindow locate(const CaseSeries& data, const FitConfig& config) {
    if (config.window_end < config.window_start) throw ValidationError("fit window is empty");
    const auto first = data.index_of(config.window_start);
    const auto last = data.index_of(config.window_end);
    if (!first || !last) {
      throw ValidationError("fit window " + format_date(config.window_start) + " .. " +
                            format_date(config.window_end) + " lies outside the case data range");
    }
    FitWindow w{*first, *last - *first + 1};
    if (w.days < 2) throw ValidationError("fit window must span at least two days");
    return w;
  }

  TimeGrid grid(double step) const { return TimeGrid(0.0, static_cast<double>(days - 1), step); }

  std::vector<double> smoothed(const CaseSeries& data) const {
    return {data.smoothed.begin() + static_cast<std::ptrdiff_t>(first),
            data.smoothed.begin() + static_cast<std::ptrdiff_t>(first + days)};
  }
};

inline double l2_norm(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

/// Model infectious pool I + P + H at whole days, unscaled.
inline std::vector<double> infectious_pool(FractionalOrder order, const FitConfig& config, const FitWindow& window) {
  const auto traj =
      simulate(config.params, order, config.initial_state, window.grid(config.step), config.schedule, config.variant);
  return predicted_observable(traj, 1.0);
}

inline FitErrors observable_errors(const std::vector<double>& pool, double s, const std::vector<double>& target) {
  if (!(s > 0.0)) throw InvalidArgument("scaling factor must be positive");
  double diff2 = 0.0;
  for (std::size_t k = 0; k < target.size(); ++k) {
    const double d = pool[k] / s - target[k];
    diff2 += d * d;
  }
  const double absolute = std::sqrt(diff2);
  return {absolute, absolute / l2_norm(target)};
}

inline FitErrors fit_objective(double alpha, double s, const CaseSeries& data, const FitConfig& config) {
  const auto window = FitWindow::locate(data, config);
  const auto pool = infectious_pool(FractionalOrder(alpha), config, window);
  return observable_errors(pool, s, window.smoothed(data));
}

/// Least-squares scale for a fixed order. The observable is linear in 1/s, so
/// the optimum is 1/s = <pool, data> / <pool, pool>.
inline FitResult best_scale_for_order(double alpha, const CaseSeries& data, const FitConfig& config) {
  const auto window = FitWindow::locate(data, config);
  const auto pool = infectious_pool(FractionalOrder(alpha), config, window);
  const auto target = window.smoothed(data);
  double pd = 0.0, pp = 0.0;
  for (std::size_t k = 0; k < target.size(); ++k) {
    pd += pool[k] * target[k];
    pp += pool[k] * pool[k];
  }
  if (!(pd > 0.0)) throw UndefinedValue("least-squares scale undefined: model and data are orthogonal");
  FitResult r;
  r.alpha = alpha;
  r.s = pp / pd;
  const auto err = observable_errors(pool, r.s, target);
  r.absolute_error = err.absolute_error;
  r.relative_error = err.relative_error;
  r.data_norm = l2_norm(target);
  r.converged = true;
  r.evaluations = 1;
  return r;
}

/// Minimizes the l2 mismatch over (alpha, s) in (0, 1] x (0, inf) with a
/// Nelder-Mead simplex from the configured start, then restarts from each
/// alpha in restart_alphas. Returns the best point; converged is false when
/// that run hit the iteration cap.
inline FitResult fit(const CaseSeries& data, const FitConfig& config) {
  const auto window = FitWindow::locate(data, config);
  const auto target = window.smoothed(data);
  const double data_norm = l2_norm(target);
  if (!(config.initial_scale > 0.0)) throw ConfigError("data.initial_scale", "must be positive");

  std::size_t total_evaluations = 0;
  auto objective = [&](const std::array<double, 2>& x) {
    const double alpha = x[0];
    const double s = x[1];
    if (!(alpha > 0.0 && alpha <= 1.0 && s > 0.0)) return std::numeric_limits<double>::infinity();
    try {
      return observable_errors(infectious_pool(FractionalOrder(alpha), config, window), s, target).absolute_error;
    } catch (const IntegrationDiverged&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  std::vector<double> starts{config.initial_alpha};
  for (double a : config.restart_alphas) starts.push_back(a);

  FitResult best;
  best.absolute_error = std::numeric_limits<double>::infinity();
  for (double a0 : starts) {
    if (!(a0 > 0.0 && a0 <= 1.0)) throw ConfigError("data.restart_alphas", "start orders must lie in (0, 1]");
    const double alpha_step = a0 > 0.95 ? -0.02 : 0.02;
    const auto run = nelder_mead<2>(objective, {a0, config.initial_scale}, {alpha_step, 0.1 * config.initial_scale},
                                    config.optimizer);
    total_evaluations += run.evaluations;
    if (run.value < best.absolute_error) {
      best.alpha = run.x[0];
      best.s = run.x[1];
      best.absolute_error = run.value;
      best.converged = run.converged;
    }
  }
  if (!std::isfinite(best.absolute_error)) throw NoConvergence("fit: no finite objective value found");
  best.data_norm = data_norm;
  best.relative_error = best.absolute_error / data_norm;
  best.evaluations = total_evaluations;
  return best;
}

/// Daily counts whose trailing mean reproduces `observable` exactly, starting
/// on `first`. Used to manufacture data from the forward model.
inline CaseSeries synthesize_case_series(const std::vector<double>& observable, Date first, std::size_t window = 5) {
  std::vector<double> daily(observable.size());
  for (std::size_t k = 0; k < observable.size(); ++k) {
    const std::size_t count = std::min(k + 1, window);
    double previous = 0.0;
    for (std::size_t j = k + 1 - count; j < k; ++j) previous += daily[j];
    daily[k] = static_cast<double>(count) * observable[k] - previous;
    if (daily[k] < 0.0) {
      throw ValidationError("observable cannot be produced by non-negative daily counts (day " +
                            std::to_string(k) + ")");
    }
  }
  return CaseSeries::from_daily(first, std::move(daily));
}

/// date, data, smoothed, model over the fit window.
inline void write_overlay_csv(std::ostream& os, const CaseSeries& data, const FitConfig& config, double alpha,
                              double s) {
  const auto window = FitWindow::locate(data, config);
  const auto pool = infectious_pool(FractionalOrder(alpha), config, window);
  os << "date,data,smoothed,model\n";
  for (std::size_t d = 0; d < window.days; ++d) {
    const std::size_t k = window.first + d;
    os << format_date(data.dates[k]) << ',' << csv::format(data.daily_cases[k]) << ','
       << csv::format(data.smoothed[k]) << ',' << csv::format(pool[d] / s) << '\n';
  }
}

}  // namespace fracepi

#endif  // FRACEPI_FITTING_HPP
