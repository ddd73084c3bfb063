#ifndef FRACEPI_TESTS_ORACLES_RICHARDSON_HPP
#define FRACEPI_TESTS_ORACLES_RICHARDSON_HPP

#include <cmath>
#include <vector>

namespace oracle {

// Derivative of f at x by Richardson extrapolation of central differences,
// halving the step from h0 over `levels` rows of the Neville tableau.
template <class F>
double richardson_derivative(F&& f, double x, double h0, int levels = 6) {
  std::vector<std::vector<double>> table(levels);
  double h = h0;
  for (int i = 0; i < levels; ++i, h /= 2) {
    table[i].push_back((f(x + h) - f(x - h)) / (2 * h));
    double factor = 4.0;
    for (int j = 1; j <= i; ++j, factor *= 4.0) {
      table[i].push_back(table[i][j - 1] + (table[i][j - 1] - table[i - 1][j - 1]) / (factor - 1.0));
    }
  }
  return table.back().back();
}

// One-sided version: differences of f at x, x - h, x - 2h (second order),
// extrapolated the same way. For points where f is not defined above x.
template <class F>
double richardson_backward_derivative(F&& f, double x, double h0, int levels = 6) {
  std::vector<std::vector<double>> table(levels);
  double h = h0;
  const double fx = f(x);
  for (int i = 0; i < levels; ++i, h /= 2) {
    table[i].push_back((3 * fx - 4 * f(x - h) + f(x - 2 * h)) / (2 * h));
    double factor = 4.0;
    for (int j = 1; j <= i; ++j, factor *= 2.0) {
      // error expansion of the one-sided stencil has every power from h^2 on
      table[i].push_back(table[i][j - 1] + (table[i][j - 1] - table[i - 1][j - 1]) / (factor - 1.0));
    }
  }
  return table.back().back();
}

}  // namespace oracle

#endif
