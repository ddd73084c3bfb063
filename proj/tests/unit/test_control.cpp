#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "classical_sweep.hpp"
#include "fracepi/control.hpp"
#include "fracepi/cost_effectiveness.hpp"
#include "fracepi/error.hpp"
#include "quadrature.hpp"

using namespace fracepi;
using namespace fracepi::cmp;

namespace {

struct Fixture {
  ModelParams params;
  CostWeights weights;
  std::mt19937 gen{7};

  CompartmentState state() {
    std::uniform_real_distribution<double> u(1e3, 1e6);
    CompartmentState y{};
    for (auto& x : y) x = u(gen);
    return y;
  }
  AdjointState costate() {
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    AdjointState xi{};
    for (auto& x : xi) x = u(gen);
    return xi;
  }
};

SweepConfig default_sweep() {
  SweepConfig c;
  c.bounds.m_max = 0.735;
  return c;
}

}  // namespace

TEST(ControlledRhs, ZeroControlsMatchUncontrolled) {
  Fixture fx;
  const auto grid = TimeGrid(0.0, 1.0, 0.1);
  const auto zero = ControlSchedule::zeros(grid);
  const auto y = fx.state();
  const auto a = rhs_controlled(0.3, y, fx.params, FractionalOrder(0.9), zero);
  const auto b = rhs_uncontrolled(0.3, y, fx.params, FractionalOrder(0.9), {});
  for (std::size_t i = 0; i < kCompartments; ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(ControlledRhs, ConservesAndFullLockdownStopsInfection) {
  Fixture fx;
  const auto grid = TimeGrid(0.0, 1.0, 0.1);
  const auto y = fx.state();
  const auto d = rhs_controlled(0.5, y, fx.params, FractionalOrder(0.95), ControlSchedule::constant(grid, 0.002, 0.4));
  double total = 0.0;
  for (double x : d) total += x;
  EXPECT_NEAR(total, 0.0, 1e-9);
  const auto locked = rhs_controlled(0.5, y, fx.params, FractionalOrder(0.95), ControlSchedule::constant(grid, 0.0, 1.0));
  EXPECT_NEAR(locked[E], -std::pow(fx.params.kappa, 0.95) * y[E], 1e-9);
}

TEST(Hamiltonian, ZeroCostateIsRunningCost) {
  Fixture fx;
  const auto y = fx.state();
  const double h = hamiltonian(y, AdjointState{}, 0.002, 0.3, fx.params, FractionalOrder(0.9), fx.weights);
  EXPECT_NEAR(h, y[I] + 5 * y[P] + 0.002 * 0.002 + 10 * 0.09, 1e-9);
}

TEST(Hamiltonian, StationaryInVaccinationAtCharacterization) {
  Fixture fx;
  const auto y = fx.state();
  const auto xi = fx.costate();
  const double v = (xi[0] - xi[6]) * y[S] / (2 * fx.weights.k3);
  const double dv = 1e-4 * std::max(1.0, std::abs(v));
  auto h = [&](double vv) { return hamiltonian(y, xi, vv, 0.1, fx.params, FractionalOrder(0.9), fx.weights); };
  EXPECT_NEAR((h(v + dv) - h(v - dv)) / (2 * dv), 0.0, 1e-6 * std::abs(h(v)));
}

TEST(AdjointRhs, HomogeneousWithoutInfectionCosts) {
  const ModelParams p;
  const CostWeights w{0.0, 0.0, 1.0, 10.0};
  const TimeGrid grid(0.0, 1.0, 0.1);
  const Trajectory<kCompartments> x{grid, std::vector<CompartmentState>(grid.size(), portugal_initial_conditions()), {}};
  const auto u = ControlSchedule::constant(grid, 0.001, 0.2);
  for (double d : adjoint_rhs(0.5, AdjointState{}, FrozenPath{x, u}, p, FractionalOrder(0.9), w)) EXPECT_EQ(d, 0.0);
  const auto src = adjoint_rhs(0.5, AdjointState{}, FrozenPath{x, u}, p, FractionalOrder(0.9), CostWeights{});
  for (std::size_t i = 0; i < kCompartments; ++i) EXPECT_EQ(src[i], i == I ? 1.0 : i == P ? 5.0 : 0.0);
}

TEST(AdjointRhs, RowsMatchHamiltonianGradient) {
  Fixture fx;
  const TimeGrid grid(0.0, 2.0, 0.5);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<CompartmentState> rows;
    for (std::size_t k = 0; k < grid.size(); ++k) rows.push_back(fx.state());
    const Trajectory<kCompartments> x{grid, rows, {}};
    const auto u = ControlSchedule::constant(grid, 0.0015, 0.35);
    const auto xi = fx.costate();
    const double t = 0.5;  // original time, node 1
    const auto d = adjoint_rhs(grid.tf() - t, xi, FrozenPath{x, u}, fx.params, FractionalOrder(0.93), fx.weights);
    for (std::size_t i = 0; i < kCompartments; ++i) {
      auto h = [&](double value) {
        auto y = rows[1];
        y[i] = value;
        return hamiltonian(y, xi, 0.0015, 0.35, fx.params, FractionalOrder(0.93), fx.weights);
      };
      const double step = 1e-4 * rows[1][i];
      const double grad = (h(rows[1][i] + step) - h(rows[1][i] - step)) / (2 * step);
      EXPECT_NEAR(d[i], grad, 1e-6 * std::max(1.0, std::abs(grad))) << "row " << i + 1;
    }
  }
}

TEST(AdjointRhs, PrintedFormFlipsOnlyTheHospitalTransmissionTerm) {
  Fixture fx;
  const TimeGrid grid(0.0, 1.0, 0.5);
  const Trajectory<kCompartments> x{grid, std::vector<CompartmentState>(grid.size(), fx.state()), {}};
  const auto u = ControlSchedule::constant(grid, 0.001, 0.2);
  const auto xi = fx.costate();
  const auto a = adjoint_rhs(0.5, xi, FrozenPath{x, u}, fx.params, FractionalOrder(0.9), fx.weights);
  const auto b = adjoint_rhs(0.5, xi, FrozenPath{x, u}, fx.params, FractionalOrder(0.9), fx.weights, AdjointForm::as_printed);
  for (std::size_t i = 0; i < kCompartments; ++i) {
    if (i != H) {
      EXPECT_EQ(a[i], b[i]);
    }
  }
  EXPECT_NE(a[H], b[H]);
}

TEST(AdjointRhs, OutsideFrozenPathIsRangeError) {
  Fixture fx;
  const TimeGrid grid(0.0, 1.0, 0.5);
  const Trajectory<kCompartments> x{grid, std::vector<CompartmentState>(grid.size(), fx.state()), {}};
  const auto u = ControlSchedule::zeros(grid);
  EXPECT_THROW(adjoint_rhs(3.0, AdjointState{}, FrozenPath{x, u}, fx.params, FractionalOrder(0.9), fx.weights),
               OutOfRange);
}

TEST(OptimalControls, Characterization) {
  ModelParams p;
  p.population = 1.0;
  const CostWeights w;
  ControlBounds b;
  b.m_max = 0.5;
  CompartmentState y{};
  y[S] = p.population;
  AdjointState xi{};
  EXPECT_EQ(optimal_controls(y, xi, p, FractionalOrder(1.0), w, b).v, 0.0);

  xi[0] = 2 * w.k3 * b.v_max * 10 / y[S];
  EXPECT_EQ(optimal_controls(y, xi, p, FractionalOrder(1.0), w, b).v, b.v_max);

  xi = {};
  y[I] = p.population / 10;
  xi[1] = 1.0;
  EXPECT_NEAR(optimal_controls(y, xi, p, FractionalOrder(1.0), w, b).m, 0.01275, 1e-12);
  b.m_max = 0.01;
  EXPECT_EQ(optimal_controls(y, xi, p, FractionalOrder(1.0), w, b).m, 0.01);
  xi[1] = -1.0;
  EXPECT_EQ(optimal_controls(y, xi, p, FractionalOrder(1.0), w, b).m, 0.0);
}

TEST(CostFunctional, ZeroAndRectangle) {
  const TimeGrid grid(0.0, 10.0, 0.1);
  const CostWeights w;
  std::vector<CompartmentState> rows(grid.size(), CompartmentState{});
  EXPECT_EQ(cost_functional(Trajectory<kCompartments>{grid, rows, {}}, ControlSchedule::zeros(grid), w), 0.0);
  for (auto& y : rows) y[I] = 42.0;
  EXPECT_NEAR(cost_functional(Trajectory<kCompartments>{grid, rows, {}}, ControlSchedule::zeros(grid), w), 420.0,
              1e-10);
}

TEST(CostFunctional, MatchesRefinedSimpson) {
  const TimeGrid grid(0.0, 5.0, 0.001);
  const CostWeights w;
  auto i_of = [](double t) { return 100 + 30 * std::sin(t); };
  auto p_of = [](double t) { return 20 * std::exp(-0.3 * t); };
  auto v_of = [](double t) { return 0.001 * (1 + std::cos(t)); };
  auto m_of = [](double t) { return 0.5 * t / 5.0; };
  std::vector<CompartmentState> rows(grid.size());
  auto u = ControlSchedule::zeros(grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid.at(k);
    rows[k] = {};
    rows[k][I] = i_of(t);
    rows[k][P] = p_of(t);
    u.v[k] = v_of(t);
    u.m[k] = m_of(t);
  }
  const double j = cost_functional(Trajectory<kCompartments>{grid, rows, {}}, u, w);
  const double ref = oracle::simpson(
      [&](double t) {
        return w.k1 * i_of(t) + w.k2 * p_of(t) + w.k3 * v_of(t) * v_of(t) + w.k4 * m_of(t) * m_of(t);
      },
      0.0, 5.0, 50000);
  EXPECT_NEAR(j, ref, 1e-4 * ref);
}

TEST(CostFunctional, MisalignedGridsRejected) {
  const TimeGrid a(0.0, 1.0, 0.1), b(0.0, 1.0, 0.05);
  const Trajectory<kCompartments> x{a, std::vector<CompartmentState>(a.size()), {}};
  EXPECT_THROW(cost_functional(x, ControlSchedule::zeros(b), CostWeights{}), AlignmentError);
}

TEST(CostWeights, Validation) {
  EXPECT_NO_THROW((CostWeights{0, 0, 1, 10}.validate()));
  EXPECT_THROW((CostWeights{1, 5, 0, 10}.validate()), ConfigError);
  EXPECT_THROW((CostWeights{-1, 5, 1, 10}.validate()), ConfigError);
}

TEST(Sweep, NoInfectionCostGivesZeroControlsInOneIteration) {
  const ModelParams p;
  const auto r = forward_backward_sweep(p, FractionalOrder(0.95), portugal_initial_conditions(), CostWeights{0, 0, 1, 10},
                                        default_sweep());
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 1u);
  for (std::size_t k = 0; k < r.controls.v.size(); ++k) {
    EXPECT_EQ(r.controls.v[k], 0.0);
    EXPECT_EQ(r.controls.m[k], 0.0);
  }
}

TEST(Sweep, DefaultRunProperties) {
  const ModelParams p;
  const auto y0 = portugal_initial_conditions();
  const auto config = default_sweep();
  for (double alpha : {1.0, 0.99}) {
    const auto r = forward_backward_sweep(p, FractionalOrder(alpha), y0, CostWeights{}, config);
    ASSERT_TRUE(r.converged);
    EXPECT_LE(r.iterations, 200u);
    EXPECT_TRUE(r.controls.within(config.bounds));
    for (double x : r.adjoint.back()) EXPECT_EQ(x, 0.0);
    for (const auto& xi : r.adjoint.values) {
      EXPECT_EQ(xi[A], 0.0);
      EXPECT_EQ(xi[R], 0.0);
      EXPECT_EQ(xi[F], 0.0);
    }
    const auto zero = ControlSchedule::zeros(r.state.grid);
    const auto free_run = pece_solve(ControlledModel(p, FractionalOrder(alpha), zero), y0, FractionalOrder(alpha),
                                     r.state.grid);
    EXPECT_LE(r.cost, cost_functional(free_run, zero, CostWeights{}));
    // The unmitigated epidemic burns out late in the horizon, so dominance is
    // checked up to its peak and in the integral.
    auto burden = [](const CompartmentState& y) { return y[I] + y[P] + y[H]; };
    std::vector<double> ctrl, free;
    for (const auto& y : r.state.values) ctrl.push_back(burden(y));
    for (const auto& y : free_run.values) free.push_back(burden(y));
    const auto peak = std::max_element(free.begin(), free.end()) - free.begin();
    for (std::ptrdiff_t k = 0; k <= peak; ++k) EXPECT_LE(ctrl[k], free[k] + 1e-9) << "node " << k;
    EXPECT_LT(trapezoid(ctrl, r.state.grid.h()), trapezoid(free, r.state.grid.h()));
  }
}

TEST(Sweep, ScenarioSwitchesControlOff) {
  const ModelParams p;
  auto config = default_sweep();
  config.scenario = ControlScenario::only_v;
  const auto r = forward_backward_sweep(p, FractionalOrder(1.0), portugal_initial_conditions(), CostWeights{}, config);
  for (double m : r.controls.m) EXPECT_EQ(m, 0.0);
  config.scenario = ControlScenario::only_m;
  const auto s = forward_backward_sweep(p, FractionalOrder(1.0), portugal_initial_conditions(), CostWeights{}, config);
  for (double v : s.controls.v) EXPECT_EQ(v, 0.0);
}

TEST(Sweep, IterationCapReportsNonConvergence) {
  auto config = default_sweep();
  config.max_iterations = 2;
  config.tolerance = 1e-12;
  const auto r =
      forward_backward_sweep(ModelParams{}, FractionalOrder(1.0), portugal_initial_conditions(), CostWeights{}, config);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 2u);
  EXPECT_GT(r.residual, 1e-12);
}

TEST(Sweep, ClassicalOrderAgreesWithRungeKuttaSweep) {
  const ModelParams p;
  const auto config = default_sweep();
  const auto y0 = portugal_initial_conditions();
  const auto r = forward_backward_sweep(p, FractionalOrder(1.0), y0, CostWeights{}, config);
  oracle::SweepProblem problem;
  problem.y0 = y0;
  problem.m_max = config.bounds.m_max;
  const auto ref = oracle::ClassicalSweep(problem).solve();
  ASSERT_TRUE(ref.converged);
  EXPECT_NEAR(r.cost, ref.cost, 0.01 * ref.cost);
}

TEST(SweepCsv, Header) {
  const auto r = forward_backward_sweep(ModelParams{}, FractionalOrder(1.0), portugal_initial_conditions(),
                                        CostWeights{0, 0, 1, 10}, default_sweep());
  std::ostringstream os;
  write_sweep_csv(os, r);
  const auto text = os.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "t,S,E,I,P,A,H,R,F,xi1,xi2,xi3,xi4,xi5,xi6,xi7,xi8,v,m");
}
