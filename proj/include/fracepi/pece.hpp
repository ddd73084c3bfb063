#ifndef FRACEPI_PECE_HPP
#define FRACEPI_PECE_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fracepi/csv.hpp"
#include "fracepi/error.hpp"

namespace fracepi {

/// Order of the Caputo derivative, 0 < alpha <= 1.
class FractionalOrder {
public:
  explicit FractionalOrder(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
      throw InvalidArgument("fractional order must lie in (0, 1], got " + csv::format(alpha));
    }
  }
  double value() const noexcept { return alpha_; }
  bool is_classical() const noexcept { return alpha_ == 1.0; }

  friend bool operator==(FractionalOrder, FractionalOrder) = default;

private:
  double alpha_;
};

/// Uniform grid t_k = t0 + k h, k = 0..n_steps.
class TimeGrid {
public:
  TimeGrid(double t0, double tf, double h) : t0_(t0), tf_(tf), h_(h) {
    if (!(std::isfinite(t0) && std::isfinite(tf) && tf > t0)) {
      throw InvalidArgument("time grid requires finite t0 < tf");
    }
    if (!(h > 0.0 && std::isfinite(h))) throw InvalidArgument("time grid requires a positive step");
    const double steps = (tf - t0) / h;
    n_steps_ = static_cast<std::size_t>(std::llround(steps));
    if (n_steps_ == 0 || std::abs(steps - static_cast<double>(n_steps_)) > 1e-9 * std::max(1.0, steps)) {
      throw InvalidArgument("time grid step " + csv::format(h) + " does not divide [" + csv::format(t0) +
                            ", " + csv::format(tf) + "]");
    }
  }

  double t0() const noexcept { return t0_; }
  double tf() const noexcept { return tf_; }
  double h() const noexcept { return h_; }
  std::size_t n_steps() const noexcept { return n_steps_; }
  std::size_t size() const noexcept { return n_steps_ + 1; }
  double at(std::size_t k) const noexcept { return k == n_steps_ ? tf_ : t0_ + static_cast<double>(k) * h_; }

  /// Index of the node closest to t; throws OutOfRange when t lies off the grid.
  std::size_t nearest_index(double t) const {
    const double pos = (t - t0_) / h_;
    if (!(pos > -0.5 && pos < static_cast<double>(n_steps_) + 0.5)) {
      throw OutOfRange("time " + csv::format(t) + " outside grid [" + csv::format(t0_) + ", " +
                       csv::format(tf_) + "]");
    }
    return static_cast<std::size_t>(std::llround(pos));
  }

  friend bool operator==(const TimeGrid& a, const TimeGrid& b) {
    return a.n_steps_ == b.n_steps_ && a.t0_ == b.t0_ && a.tf_ == b.tf_ && a.h_ == b.h_;
  }

private:
  double t0_;
  double tf_;
  double h_;
  std::size_t n_steps_ = 0;
};

struct SolveStats {
  std::size_t rhs_evaluations = 0;
  /// Stored right-hand-side samples read by the predictor and corrector sums.
  std::size_t history_reads = 0;
};

template <std::size_t Dim>
struct Trajectory {
  using State = std::array<double, Dim>;

  TimeGrid grid;
  std::vector<State> values;
  SolveStats stats{};

  const State& at(std::size_t k) const { return values.at(k); }
  const State& back() const { return values.back(); }

  std::vector<double> component(std::size_t i) const {
    std::vector<double> out;
    out.reserve(values.size());
    for (const auto& row : values) out.push_back(row[i]);
    return out;
  }
};

/// Fractional Adams-Bashforth-Moulton predictor-corrector (PECE) for the Caputo
/// initial value problem  D^alpha y = f(t, y), y(t0) = y0, with 0 < alpha <= 1.
///
/// Full memory: step n+1 convolves over every earlier right-hand-side sample.
/// Predictor (product rectangle rule):
///   y^P_{n+1} = y0 + h^alpha / Gamma(alpha+1) * sum_j ((n+1-j)^alpha - (n-j)^alpha) f_j
/// Corrector (product trapezoid rule), one pass:
///   y_{n+1} = y0 + h^alpha / Gamma(alpha+2) * (a_{0,n+1} f_0 + sum_{j=1..n} a_{j,n+1} f_j + f(t_{n+1}, y^P))
/// with a_{0,n+1} = n^{alpha+1} - (n-alpha)(n+1)^alpha and
///      a_{j,n+1} = (n-j+2)^{alpha+1} + (n-j)^{alpha+1} - 2(n-j+1)^{alpha+1}.
/// For alpha = 1 the corrector is the classical trapezoidal rule.
///
/// The solver is immutable after construction; solve() may be called concurrently.
template <std::size_t Dim>
class FractionalAdamsSolver {
public:
  using State = std::array<double, Dim>;

  FractionalAdamsSolver(FractionalOrder order, TimeGrid grid) : order_(order), grid_(grid) {
    const double a = order.value();
    const std::size_t n = grid.n_steps();
    const double ha = std::pow(grid.h(), a);
    predictor_scale_ = ha / std::tgamma(a + 1.0);
    corrector_scale_ = ha / std::tgamma(a + 2.0);

    // Weights depend only on the lag k = n - j.
    predictor_w_.resize(n + 1);
    corrector_w_.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
      const double kd = static_cast<double>(k);
      predictor_w_[k] = std::pow(kd + 1.0, a) - std::pow(kd, a);
      corrector_w_[k] = std::pow(kd + 2.0, a + 1.0) + std::pow(kd, a + 1.0) - 2.0 * std::pow(kd + 1.0, a + 1.0);
    }
    first_w_.resize(n + 1);
    for (std::size_t m = 0; m <= n; ++m) {
      const double md = static_cast<double>(m);
      first_w_[m] = std::pow(md, a + 1.0) - (md - a) * std::pow(md + 1.0, a);
    }
  }

  FractionalOrder order() const noexcept { return order_; }
  const TimeGrid& grid() const noexcept { return grid_; }

  template <class Rhs>
  Trajectory<Dim> solve(Rhs&& rhs, const State& y0) const {
    for (double v : y0) {
      if (!std::isfinite(v)) throw InvalidArgument("initial state must be finite");
    }
    const std::size_t n_steps = grid_.n_steps();
    Trajectory<Dim> out{grid_, {}, {}};
    out.values.reserve(n_steps + 1);
    out.values.push_back(y0);

    std::vector<State> f;
    f.reserve(n_steps + 1);
    f.push_back(rhs(grid_.at(0), y0));
    ++out.stats.rhs_evaluations;
    check_finite(f.back(), 0);

    for (std::size_t n = 0; n < n_steps; ++n) {
      const double t_next = grid_.at(n + 1);

      State pred_sum{};
      for (std::size_t j = 0; j <= n; ++j) axpy(pred_sum, predictor_w_[n - j], f[j]);
      out.stats.history_reads += n + 1;
      State predicted = y0;
      axpy(predicted, predictor_scale_, pred_sum);
      check_finite(predicted, n + 1);

      const State f_pred = rhs(t_next, predicted);
      ++out.stats.rhs_evaluations;

      State corr_sum{};
      axpy(corr_sum, first_w_[n], f[0]);
      for (std::size_t j = 1; j <= n; ++j) axpy(corr_sum, corrector_w_[n - j], f[j]);
      axpy(corr_sum, 1.0, f_pred);
      out.stats.history_reads += n + 1;
      State corrected = y0;
      axpy(corrected, corrector_scale_, corr_sum);
      check_finite(corrected, n + 1);

      out.values.push_back(corrected);
      f.push_back(rhs(t_next, corrected));
      ++out.stats.rhs_evaluations;
      check_finite(f.back(), n + 1);
    }
    return out;
  }

private:
  static void axpy(State& acc, double w, const State& x) noexcept {
    for (std::size_t i = 0; i < Dim; ++i) acc[i] += w * x[i];
  }
  static void check_finite(const State& s, std::size_t step) {
    for (double v : s) {
      if (!std::isfinite(v)) throw IntegrationDiverged(step);
    }
  }

  FractionalOrder order_;
  TimeGrid grid_;
  double predictor_scale_ = 0.0;
  double corrector_scale_ = 0.0;
  std::vector<double> predictor_w_;
  std::vector<double> corrector_w_;
  std::vector<double> first_w_;
};

template <std::size_t Dim, class Rhs>
Trajectory<Dim> pece_solve(Rhs&& rhs, const std::array<double, Dim>& y0, FractionalOrder order,
                           const TimeGrid& grid) {
  return FractionalAdamsSolver<Dim>(order, grid).solve(std::forward<Rhs>(rhs), y0);
}

/// Terminal value problem solved through t' = tf - t: the caller's rhs takes the
/// reversed time t' and the state; the Caputo IVP in t' starts from
/// terminal_value at t' = 0. The result is indexed by original time, so its
/// last row equals terminal_value.
template <std::size_t Dim, class Rhs>
Trajectory<Dim> pece_solve_reversed(Rhs&& rhs, const std::array<double, Dim>& terminal_value,
                                    FractionalOrder order, const TimeGrid& grid) {
  const TimeGrid reversed(0.0, grid.tf() - grid.t0(), grid.h());
  auto fwd = FractionalAdamsSolver<Dim>(order, reversed).solve(std::forward<Rhs>(rhs), terminal_value);
  Trajectory<Dim> out{grid, {}, fwd.stats};
  out.values.assign(fwd.values.rbegin(), fwd.values.rend());
  return out;
}

/// CSV with header "t,<names...>" and one row per grid node.
template <std::size_t Dim>
void write_csv(std::ostream& os, const Trajectory<Dim>& traj, std::span<const std::string> names) {
  if (names.size() != Dim) throw InvalidArgument("write_csv: expected one column name per component");
  os << 't';
  for (const auto& n : names) os << ',' << n;
  os << '\n';
  std::array<double, Dim + 1> row{};
  for (std::size_t k = 0; k < traj.values.size(); ++k) {
    row[0] = traj.grid.at(k);
    for (std::size_t i = 0; i < Dim; ++i) row[i + 1] = traj.values[k][i];
    csv::write_row(os, row);
  }
}

}  // namespace fracepi

#endif  // FRACEPI_PECE_HPP
