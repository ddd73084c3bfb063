#ifndef FRACEPI_TESTS_ORACLES_RK4_HPP
#define FRACEPI_TESTS_ORACLES_RK4_HPP

#include <array>
#include <cstddef>
#include <vector>

namespace oracle {

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
Vec<N> axpy(const Vec<N>& y, double a, const Vec<N>& k) {
  Vec<N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + a * k[i];
  return out;
}

// Classical fourth-order Runge-Kutta with a fixed step. A negative h integrates
// backward in time. Returns n + 1 samples starting at (t0, y0).
template <std::size_t N, class F>
std::vector<Vec<N>> rk4(F&& f, Vec<N> y, double t0, double h, std::size_t n) {
  std::vector<Vec<N>> out;
  out.reserve(n + 1);
  out.push_back(y);
  double t = t0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto k1 = f(t, y);
    const auto k2 = f(t + h / 2, axpy(y, h / 2, k1));
    const auto k3 = f(t + h / 2, axpy(y, h / 2, k2));
    const auto k4 = f(t + h, axpy(y, h, k3));
    for (std::size_t i = 0; i < N; ++i) y[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    t = t0 + static_cast<double>(k + 1) * h;
    out.push_back(y);
  }
  return out;
}

}  // namespace oracle

#endif
