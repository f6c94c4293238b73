#pragma once

// Reference flows shared by the unit tests and the acceptance binary.

#include <cmath>
#include <numbers>

#include "urbanflow/ins.hpp"

namespace urbanflow::testing {

inline constexpr double kPi = std::numbers::pi;

// Divergence-free Taylor-Green-type field on the unit square, with a
// mean-free pressure.
inline Point mms_velocity(Point x) {
  return {std::sin(kPi * x.x) * std::cos(kPi * x.y), -std::cos(kPi * x.x) * std::sin(kPi * x.y)};
}
inline double mms_pressure(Point x) { return std::cos(kPi * x.x) * std::cos(kPi * x.y); }

// f = -nu lap u + (u . grad) u + grad p, worked out by hand.
inline Point mms_forcing(Point x, double nu) {
  const double a = kPi * x.x, b = kPi * x.y;
  const Point u = mms_velocity(x);
  const Point conv{kPi * std::sin(a) * std::cos(a), kPi * std::sin(b) * std::cos(b)};
  const Point grad_p{-kPi * std::sin(a) * std::cos(b), -kPi * std::cos(a) * std::sin(b)};
  return 2.0 * kPi * kPi * nu * u + conv + grad_p;
}

struct MmsErrors {
  double velocity_l2 = 0.0;
  double pressure_l2 = 0.0;
  int newton_iterations = 0;
};

// Solves the manufactured problem on an n x n structured mesh of the unit
// square with exact Dirichlet data everywhere and pressure pinned at node 0.
inline MmsErrors solve_manufactured(int n, double nu) {
  const mesh::TriMesh m = mesh::structured_rectangle({0, 0, 1, 1}, n, n);
  const ins::TaylorHood th(m);
  fem::DirichletConstraints bc;
  const fem::Vector exact_u = fem::interpolate(th.velocity, mms_velocity);
  for (std::size_t node = 0; node < th.velocity.node_count(); ++node) {
    const Point p = th.velocity.node_point(static_cast<int>(node));
    if (p.x == 0.0 || p.x == 1.0 || p.y == 0.0 || p.y == 1.0) {
      for (int c = 0; c < 2; ++c) {
        const int d = th.velocity.dof(static_cast<int>(node), c);
        bc.add(d, exact_u[d]);
      }
    }
  }
  const fem::Vector f = fem::load_vector(th.velocity, [nu](Point x) { return mms_forcing(x, nu); });
  const ins::InsSystem system(th, nu, bc, f, 0);
  const ins::WindField w =
      ins::newton_solve(system, fem::Vector::Zero(static_cast<Eigen::Index>(th.size())), {1e-12, 1e-13, 25});
  MmsErrors e;
  e.newton_iterations = w.newton_iterations;
  e.velocity_l2 = fem::l2_error(th.velocity, w.velocity, mms_velocity);
  const double mean = fem::integral(th.pressure, w.pressure);
  const fem::Vector shifted = w.pressure - fem::Vector::Constant(w.pressure.size(), mean);
  e.pressure_l2 = fem::l2_error(th.pressure, shifted, mms_pressure);
  return e;
}

}  // namespace urbanflow::testing
