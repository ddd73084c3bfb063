#ifndef FRACEPI_TESTS_ORACLES_CLASSICAL_SWEEP_HPP
#define FRACEPI_TESTS_ORACLES_CLASSICAL_SWEEP_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "next_generation.hpp"
#include "quadrature.hpp"
#include "rk4.hpp"

namespace oracle {

using State8 = std::array<double, 8>;

struct SweepProblem {
  Rates r = default_rates();
  double population = 10'280'000.0;
  State8 y0{};
  double k1 = 1, k2 = 5, k3 = 1, k4 = 10;
  double v_max = 0.003, m_max = 0.0;
  double horizon = 52.0;
  double h = 0.1;
  double relaxation = 0.5;
  double tolerance = 1e-3;
  int max_iterations = 200;
};

struct SweepOutcome {
  std::vector<State8> x;
  std::vector<double> v, m;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Classical (integer-order) optimal control of the eight-compartment model:
// RK4 forward, RK4 backward for the co-states, controls from minimizing the
// Hamiltonian over the box. The co-state field is -dH/dx by central
// differences of the Hamiltonian below, so no hand-derived adjoint is used.
class ClassicalSweep {
public:
  explicit ClassicalSweep(SweepProblem p) : p_(p) {}

  State8 field(const State8& x, double v, double m) const {
    const auto& r = p_.r;
    const double s = x[0], e = x[1], i = x[2], pp = x[3], h = x[5];
    const double force = (1 - m) * (r.beta * i + r.beta_prime * pp + r.l * r.beta * h) * s / p_.population;
    return {-force - v * s,
            force - r.kappa * e,
            r.rho1 * r.kappa * e - (r.gamma_a + r.gamma_i + r.delta_i) * i,
            r.rho2 * r.kappa * e - (r.gamma_a + r.gamma_i + r.delta_p) * pp,
            (1 - r.rho1 - r.rho2) * r.kappa * e,
            r.gamma_a * (i + pp) - (r.gamma_r + r.delta_h) * h,
            r.gamma_i * (i + pp) + r.gamma_r * h + v * s,
            r.delta_i * i + r.delta_p * pp + r.delta_h * h};
  }

  double hamiltonian(const State8& x, const State8& lambda, double v, double m) const {
    const auto f = field(x, v, m);
    double value = p_.k1 * x[2] + p_.k2 * x[3] + p_.k3 * v * v + p_.k4 * m * m;
    for (int k = 0; k < 8; ++k) value += lambda[k] * f[k];
    return value;
  }

  State8 costate_field(const State8& x, const State8& lambda, double v, double m) const {
    State8 d{};
    for (int k = 0; k < 8; ++k) {
      const double step = 1e-6 * std::max(1.0, std::abs(x[k]));
      State8 up = x, down = x;
      up[k] += step;
      down[k] -= step;
      d[k] = -(hamiltonian(up, lambda, v, m) - hamiltonian(down, lambda, v, m)) / (2 * step);
    }
    return d;
  }

  // Minimizer over [0, bound] of the quadratic c u^2 + g u, where g is the
  // slope of lambda . f in the control, taken numerically (f is affine in u).
  double minimize(double weight, double slope, double bound) const {
    return std::clamp(-slope / (2 * weight), 0.0, bound);
  }

  SweepOutcome solve() const {
    const std::size_t n = static_cast<std::size_t>(std::llround(p_.horizon / p_.h));
    std::vector<double> v(n + 1, 0.0), m(n + 1, 0.0);
    std::vector<State8> x, lambda;
    SweepOutcome out;

    auto mid = [](const std::vector<double>& u, double t, double h) {
      const double pos = t / h;
      const auto k = static_cast<std::size_t>(std::floor(pos + 1e-9));
      if (k + 1 >= u.size()) return u.back();
      const double w = pos - static_cast<double>(k);
      return (1 - w) * u[k] + w * u[k + 1];
    };
    auto mid_state = [](const std::vector<State8>& u, double t, double h) {
      const double pos = t / h;
      auto k = static_cast<std::size_t>(std::floor(pos + 1e-9));
      if (k + 1 >= u.size()) return u.back();
      const double w = pos - static_cast<double>(k);
      State8 s;
      for (int i = 0; i < 8; ++i) s[i] = (1 - w) * u[k][i] + w * u[k + 1][i];
      return s;
    };
    auto sup = [](auto&& get, std::size_t count) {
      double s = 0.0;
      for (std::size_t k = 0; k < count; ++k) s = std::max(s, std::abs(get(k)));
      return s;
    };

    for (int iter = 1; iter <= p_.max_iterations; ++iter) {
      const auto old_v = v, old_m = m;
      const auto old_x = x, old_lambda = lambda;

      x = rk4<8>([&](double t, const State8& y) { return field(y, mid(v, t, p_.h), mid(m, t, p_.h)); }, p_.y0, 0.0,
                 p_.h, n);
      auto backward = rk4<8>(
          [&](double t, const State8& l) {
            return costate_field(mid_state(x, t, p_.h), l, mid(v, t, p_.h), mid(m, t, p_.h));
          },
          State8{}, p_.horizon, -p_.h, n);
      std::reverse(backward.begin(), backward.end());
      lambda = std::move(backward);

      for (std::size_t k = 0; k <= n; ++k) {
        const double dv = 1e-3, dm = 1e-3;
        auto coupling = [&](double vv, double mm) {
          const auto f = field(x[k], vv, mm);
          double s = 0.0;
          for (int i = 0; i < 8; ++i) s += lambda[k][i] * f[i];
          return s;
        };
        const double slope_v = (coupling(dv, 0) - coupling(-dv, 0)) / (2 * dv);
        const double slope_m = (coupling(0, dm) - coupling(0, -dm)) / (2 * dm);
        const double v_star = minimize(p_.k3, slope_v, p_.v_max);
        const double m_star = minimize(p_.k4, slope_m, p_.m_max);
        v[k] = p_.relaxation * v_star + (1 - p_.relaxation) * old_v[k];
        m[k] = p_.relaxation * m_star + (1 - p_.relaxation) * old_m[k];
      }

      auto rel = [&](auto&& diff, auto&& cur) {
        const double c = sup(cur, n + 1);
        return c == 0.0 ? 0.0 : sup(diff, n + 1) / c;
      };
      double change = std::max(rel([&](std::size_t k) { return v[k] - old_v[k]; }, [&](std::size_t k) { return v[k]; }),
                               rel([&](std::size_t k) { return m[k] - old_m[k]; }, [&](std::size_t k) { return m[k]; }));
      if (!old_x.empty()) {
        for (int i = 0; i < 8; ++i) {
          change = std::max(change, rel([&](std::size_t k) { return x[k][i] - old_x[k][i]; },
                                        [&](std::size_t k) { return x[k][i]; }));
          change = std::max(change, rel([&](std::size_t k) { return lambda[k][i] - old_lambda[k][i]; },
                                        [&](std::size_t k) { return lambda[k][i]; }));
        }
      }
      out.iterations = iter;
      if (change <= p_.tolerance) {
        out.converged = true;
        break;
      }
    }

    x = rk4<8>([&](double t, const State8& y) { return field(y, mid(v, t, p_.h), mid(m, t, p_.h)); }, p_.y0, 0.0,
               p_.h, n);
    std::vector<double> running(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
      running[k] = p_.k1 * x[k][2] + p_.k2 * x[k][3] + p_.k3 * v[k] * v[k] + p_.k4 * m[k] * m[k];
    }
    // Simpson over the node samples; needs an even step count
    if (n % 2 != 0) throw std::invalid_argument("classical sweep oracle needs an even number of steps");
    double sum = running.front() + running.back();
    for (std::size_t k = 1; k < n; ++k) sum += (k % 2 ? 4.0 : 2.0) * running[k];
    out.cost = sum * p_.h / 3;
    out.x = std::move(x);
    out.v = std::move(v);
    out.m = std::move(m);
    return out;
  }

private:
  SweepProblem p_;
};

}  // namespace oracle

#endif
