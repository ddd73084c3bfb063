#ifndef FRACEPI_MODEL_HPP
#define FRACEPI_MODEL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "fracepi/csv.hpp"
#include "fracepi/error.hpp"
#include "fracepi/pece.hpp"

namespace fracepi {

inline constexpr std::size_t kCompartments = 8;

/// Population counts in the fixed order S, E, I, P, A, H, R, F.
using CompartmentState = std::array<double, kCompartments>;

namespace cmp {
enum : std::size_t { S, E, I, P, A, H, R, F };
}

inline const std::array<std::string, kCompartments>& compartment_names() {
  static const std::array<std::string, kCompartments> names{"S", "E", "I", "P", "A", "H", "R", "F"};
  return names;
}

inline double total_population(const CompartmentState& y) {
  double sum = 0.0;
  for (double v : y) sum += v;
  return sum;
}

/// Epidemiological constants. Rates are per day; l, rho1, rho2 are dimensionless.
/// Defaults are the first-wave values used for the Portugal third wave.
struct ModelParams {
  double beta = 2.55;
  double beta_prime = 7.65;
  double l = 1.56;
  double kappa = 0.25;
  double rho1 = 0.58;
  double rho2 = 0.001;
  double gamma_a = 0.94;
  double gamma_i = 0.27;
  double gamma_r = 0.5;
  double delta_i = 1.0 / 23.0;
  double delta_p = 1.0 / 23.0;
  double delta_h = 1.0 / 23.0;
  double population = 10'280'000.0;

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0 && std::isfinite(v))) throw ConfigError(std::string("model.") + name, "must be positive");
    };
    positive(beta, "beta");
    positive(beta_prime, "beta_prime");
    positive(l, "l");
    positive(kappa, "kappa");
    positive(gamma_a, "gamma_a");
    positive(gamma_i, "gamma_i");
    positive(gamma_r, "gamma_r");
    positive(delta_i, "delta_i");
    positive(delta_p, "delta_p");
    positive(delta_h, "delta_h");
    positive(population, "population");
    if (!(rho1 >= 0.0 && rho2 >= 0.0 && rho1 + rho2 <= 1.0)) {
      throw ConfigError("model.rho1", "require rho1, rho2 >= 0 and rho1 + rho2 <= 1");
    }
  }
};

/// Which right-hand side to build. The original fractional system uses the raw
/// rates, so its two sides carry different time dimensions unless alpha = 1.
/// It is kept only for comparison runs.
enum class ModelVariant { dimension_consistent, original };

/// Rates after alpha-exponentiation. l, rho1, rho2 are dimensionless and are not included.
struct EffectiveRates {
  double beta, beta_prime, kappa, gamma_a, gamma_i, gamma_r, delta_i, delta_p, delta_h;
};

inline EffectiveRates alpha_rates(const ModelParams& p, FractionalOrder order,
                                  ModelVariant variant = ModelVariant::dimension_consistent) {
  const double a = variant == ModelVariant::dimension_consistent ? order.value() : 1.0;
  auto pw = [a](double x) { return a == 1.0 ? x : std::pow(x, a); };
  return {pw(p.beta),    pw(p.beta_prime), pw(p.kappa),   pw(p.gamma_a), pw(p.gamma_i),
          pw(p.gamma_r), pw(p.delta_i),    pw(p.delta_p), pw(p.delta_h)};
}

/// Right-hand side shared by the uncontrolled and controlled systems.
/// contact_reduction multiplies every beta/beta' transmission term by (1 - m);
/// vaccination moves v S per unit time from S to R.
inline CompartmentState seipahrf_derivatives(const EffectiveRates& r, const ModelParams& p,
                                             const CompartmentState& y, double contact_reduction,
                                             double vaccination) {
  using namespace cmp;
  const double n = p.population;
  const double damp = 1.0 - contact_reduction;
  const double infection =
      damp * (r.beta * y[I] * y[S] + p.l * r.beta * y[H] * y[S] + r.beta_prime * y[P] * y[S]) / n;
  const double vaccinated = vaccination * y[S];
  const double leave_i = (r.gamma_a + r.gamma_i + r.delta_i) * y[I];
  const double leave_p = (r.gamma_a + r.gamma_i + r.delta_p) * y[P];
  const double leave_h = (r.gamma_r + r.delta_h) * y[H];
  const double progression = r.kappa * y[E];

  CompartmentState d{};
  d[S] = -infection - vaccinated;
  d[E] = infection - progression;
  d[I] = p.rho1 * progression - leave_i;
  d[P] = p.rho2 * progression - leave_p;
  d[A] = (1.0 - p.rho1 - p.rho2) * progression;
  d[H] = r.gamma_a * (y[I] + y[P]) - leave_h;
  d[R] = r.gamma_i * (y[I] + y[P]) + r.gamma_r * y[H] + vaccinated;
  d[F] = r.delta_i * y[I] + r.delta_p * y[P] + r.delta_h * y[H];
  return d;
}

/// Time-varying proportional reduction of contacts m(t), given as breakpoints.
/// Outside the breakpoint range the nearest endpoint level is used.
class ContactReductionSchedule {
public:
  enum class Interpolation { piecewise_constant, piecewise_linear };

  ContactReductionSchedule() = default;

  ContactReductionSchedule(std::vector<std::pair<double, double>> breakpoints, Interpolation interp)
      : points_(std::move(breakpoints)), interp_(interp) {
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const auto [t, level] = points_[i];
      if (!std::isfinite(t)) throw ConfigError("contact_schedule.breakpoints", "times must be finite");
      if (!(level >= 0.0 && level <= 1.0)) {
        throw ConfigError("contact_schedule.breakpoints", "levels must lie in [0, 1]");
      }
      if (i > 0 && !(t > points_[i - 1].first)) {
        throw ConfigError("contact_schedule.breakpoints", "times must be strictly increasing");
      }
    }
  }

  /// m(t) = 0 everywhere.
  static ContactReductionSchedule none() { return {}; }

  static ContactReductionSchedule constant(double level) {
    return ContactReductionSchedule({{0.0, level}}, Interpolation::piecewise_constant);
  }

  double operator()(double t) const {
    if (points_.empty()) return 0.0;
    if (t <= points_.front().first) return points_.front().second;
    if (t >= points_.back().first) return points_.back().second;
    const auto it = std::upper_bound(points_.begin(), points_.end(), t,
                                     [](double v, const auto& bp) { return v < bp.first; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    if (interp_ == Interpolation::piecewise_constant) return lo.second;
    const double w = (t - lo.first) / (hi.first - lo.first);
    return lo.second + w * (hi.second - lo.second);
  }

  double max_level() const {
    double m = 0.0;
    for (const auto& bp : points_) m = std::max(m, bp.second);
    return m;
  }

  const std::vector<std::pair<double, double>>& breakpoints() const noexcept { return points_; }
  Interpolation interpolation() const noexcept { return interp_; }

private:
  std::vector<std::pair<double, double>> points_;
  Interpolation interp_ = Interpolation::piecewise_linear;
};

/// Uncontrolled system with contact reduction m(t) on the transmission terms;
/// an all-zero schedule gives the plain corrected model.
inline CompartmentState rhs_uncontrolled(double t, const CompartmentState& y, const ModelParams& params,
                                         FractionalOrder order, const ContactReductionSchedule& m,
                                         ModelVariant variant = ModelVariant::dimension_consistent) {
  return seipahrf_derivatives(alpha_rates(params, order, variant), params, y, m(t), 0.0);
}

/// Callable form of rhs_uncontrolled with the rates evaluated once.
class UncontrolledModel {
public:
  UncontrolledModel(ModelParams params, FractionalOrder order, ContactReductionSchedule schedule,
                    ModelVariant variant = ModelVariant::dimension_consistent)
      : params_(params), rates_(alpha_rates(params, order, variant)), schedule_(std::move(schedule)) {}

  CompartmentState operator()(double t, const CompartmentState& y) const {
    return seipahrf_derivatives(rates_, params_, y, schedule_(t), 0.0);
  }

private:
  ModelParams params_;
  EffectiveRates rates_;
  ContactReductionSchedule schedule_;
};

inline Trajectory<kCompartments> simulate(const ModelParams& params, FractionalOrder order,
                                          const CompartmentState& y0, const TimeGrid& grid,
                                          const ContactReductionSchedule& schedule = {},
                                          ModelVariant variant = ModelVariant::dimension_consistent) {
  return pece_solve(UncontrolledModel(params, order, schedule, variant), y0, order, grid);
}

/// R0 = beta^a rho1 (gamma_a^a l + a_h) / (a_i a_h) + (beta^a gamma_a^a l + beta'^a a_h) rho2 / (a_p a_h)
/// with a_i = gamma_a^a + gamma_i^a + delta_i^a, a_p = gamma_a^a + gamma_i^a + delta_p^a,
/// a_h = gamma_r^a + delta_h^a.
inline double basic_reproduction_number(const ModelParams& p, FractionalOrder order,
                                        ModelVariant variant = ModelVariant::dimension_consistent) {
  const auto r = alpha_rates(p, order, variant);
  const double a_i = r.gamma_a + r.gamma_i + r.delta_i;
  const double a_p = r.gamma_a + r.gamma_i + r.delta_p;
  const double a_h = r.gamma_r + r.delta_h;
  return r.beta * p.rho1 * (r.gamma_a * p.l + a_h) / (a_i * a_h) +
         (r.beta * r.gamma_a * p.l + r.beta_prime * a_h) * p.rho2 / (a_p * a_h);
}

/// The published controlled reproduction number carries (m - 1) factors and
/// divides by v. sign_corrected substitutes (1 - m).
enum class ControlledR0Form { as_printed, sign_corrected };

inline double controlled_r0(const ModelParams& p, FractionalOrder order, double v, double m,
                            ControlledR0Form form = ControlledR0Form::as_printed) {
  if (v == 0.0) throw UndefinedValue("controlled_r0: singular at v = 0");
  if (!(m >= 0.0 && m <= 1.0)) throw InvalidArgument("controlled_r0: m must lie in [0, 1]");
  const auto r = alpha_rates(p, order);
  const double a_i = r.gamma_a + r.gamma_i + r.delta_i;
  const double a_p = r.gamma_a + r.gamma_i + r.delta_p;
  const double a_h = r.gamma_r + r.delta_h;
  const double factor = form == ControlledR0Form::as_printed ? (m - 1.0) : (1.0 - m);
  return (a_h + r.gamma_a * p.l) * r.beta * factor * p.rho1 / (a_h * a_i * v) +
         (a_h * r.beta_prime + r.beta * r.gamma_a * p.l) * factor * p.rho2 / (a_h * a_p * v);
}

/// How S(0) is balanced. as_published leaves the 34 initial fatalities out of
/// the residual, so the compartments sum to N + 34. closed includes them so the
/// sum is exactly N.
enum class FatalityBalance { as_published, closed };

struct PortugalInitialCounts {
  double recovered_initial = 278'776.0;
  double exposed = 92'069.0;
  double active_infected = 68'208.0;
  double superspreader_share = 0.1;
  double asymptomatic_ratio = 0.15;
  double fatalities = 34.0;
  double hospitalized = 2'366.0;
};

/// Initial state on 27 December 2020. Active infections split 10% / 90% into
/// P and I, and A = (I + P) / 0.15.
inline CompartmentState portugal_initial_conditions(double population = 10'280'000.0,
                                                    FatalityBalance balance = FatalityBalance::as_published,
                                                    const PortugalInitialCounts& c = {}) {
  using namespace cmp;
  if (!(population > 0.0)) throw InvalidPopulation("population must be positive");
  CompartmentState y{};
  y[R] = c.recovered_initial;
  y[E] = c.exposed;
  y[P] = c.active_infected * c.superspreader_share;
  y[I] = c.active_infected * (1.0 - c.superspreader_share);
  y[A] = c.active_infected / c.asymptomatic_ratio;
  y[F] = c.fatalities;
  y[H] = c.hospitalized;
  double s = population - y[R] - y[E] - y[P] - y[I] - y[A] - y[H];
  if (balance == FatalityBalance::closed) s -= y[F];
  if (s < 0.0) {
    throw InvalidPopulation("population " + csv::format(population) +
                            " is smaller than the initial non-susceptible compartments");
  }
  y[S] = s;
  return y;
}

}  // namespace fracepi

#endif  // FRACEPI_MODEL_HPP
