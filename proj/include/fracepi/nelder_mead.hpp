#ifndef FRACEPI_NELDER_MEAD_HPP
#define FRACEPI_NELDER_MEAD_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace fracepi {

struct NelderMeadOptions {
  std::size_t max_iterations = 500;
  /// Stop when the simplex values agree to f_tolerance (absolute plus relative to |f_best|)
  /// and the vertices are within x_tolerance of the best one in every coordinate.
  double f_tolerance = 1e-10;
  double x_tolerance = 1e-8;
};

template <std::size_t Dim>
struct NelderMeadResult {
  std::array<double, Dim> x{};
  double value = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
};

/// Downhill simplex minimization with the standard coefficients
/// (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
/// The objective may return +inf to mark infeasible points.
template <std::size_t Dim, class Objective>
NelderMeadResult<Dim> nelder_mead(Objective&& f, const std::array<double, Dim>& start,
                                  const std::array<double, Dim>& initial_step, const NelderMeadOptions& opts = {}) {
  using Point = std::array<double, Dim>;
  struct Vertex {
    Point x;
    double fx;
  };

  NelderMeadResult<Dim> result;
  auto eval = [&](const Point& x) {
    ++result.evaluations;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  std::array<Vertex, Dim + 1> simplex;
  simplex[0] = {start, eval(start)};
  for (std::size_t i = 0; i < Dim; ++i) {
    Point x = start;
    x[i] += initial_step[i];
    simplex[i + 1] = {x, eval(x)};
  }
  auto by_value = [](const Vertex& a, const Vertex& b) { return a.fx < b.fx; };

  auto along = [](const Point& from, const Point& to, double t) {
    Point p;
    for (std::size_t i = 0; i < Dim; ++i) p[i] = from[i] + t * (to[i] - from[i]);
    return p;
  };

  for (result.iterations = 0; result.iterations < opts.max_iterations; ++result.iterations) {
    std::sort(simplex.begin(), simplex.end(), by_value);
    const Vertex& best = simplex.front();
    const Vertex& worst = simplex.back();

    double x_spread = 0.0;
    for (std::size_t v = 1; v <= Dim; ++v) {
      for (std::size_t i = 0; i < Dim; ++i) x_spread = std::max(x_spread, std::abs(simplex[v].x[i] - best.x[i]));
    }
    const bool finite = std::isfinite(worst.fx);
    if (finite && std::abs(worst.fx - best.fx) <= opts.f_tolerance * (1.0 + std::abs(best.fx)) &&
        x_spread <= opts.x_tolerance) {
      result.converged = true;
      break;
    }

    Point centroid{};
    for (std::size_t v = 0; v < Dim; ++v) {
      for (std::size_t i = 0; i < Dim; ++i) centroid[i] += simplex[v].x[i] / static_cast<double>(Dim);
    }

    const Point reflected = along(centroid, worst.x, -1.0);
    const double f_reflected = eval(reflected);
    if (f_reflected < best.fx) {
      const Point expanded = along(centroid, worst.x, -2.0);
      const double f_expanded = eval(expanded);
      simplex.back() = f_expanded < f_reflected ? Vertex{expanded, f_expanded} : Vertex{reflected, f_reflected};
      continue;
    }
    if (f_reflected < simplex[Dim - 1].fx) {
      simplex.back() = {reflected, f_reflected};
      continue;
    }
    const bool outside = f_reflected < worst.fx;
    const Point contracted = outside ? along(centroid, reflected, 0.5) : along(centroid, worst.x, 0.5);
    const double f_contracted = eval(contracted);
    if (f_contracted < std::min(f_reflected, worst.fx)) {
      simplex.back() = {contracted, f_contracted};
      continue;
    }
    for (std::size_t v = 1; v <= Dim; ++v) {
      simplex[v].x = along(simplex[0].x, simplex[v].x, 0.5);
      simplex[v].fx = eval(simplex[v].x);
    }
  }

  std::sort(simplex.begin(), simplex.end(), by_value);
  result.x = simplex.front().x;
  result.value = simplex.front().fx;
  return result;
}

}  // namespace fracepi

#endif  // FRACEPI_NELDER_MEAD_HPP
