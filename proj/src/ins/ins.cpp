#include "urbanflow/ins.hpp"

#include <algorithm>
#include <cmath>

#include "urbanflow/error.hpp"

namespace urbanflow::ins {

using fem::DirichletConstraints;
using mesh::BoundaryTag;

void InsParams::validate() const {
  if (!(nu > 0.0)) throw Error(ErrorKind::Config, "nu must be positive");
  if (!(mu >= 0.0)) throw Error(ErrorKind::Config, "mu must be non-negative");
  if (!(newton_tol > 0.0 && newton_tol < 1.0)) throw Error(ErrorKind::Config, "newton_tol must lie in (0, 1)");
  if (newton_max_iter < 1) throw Error(ErrorKind::Config, "newton_max_iter must be at least 1");
}

Vector stack(const Vector& u, const Vector& p) {
  Vector x(u.size() + p.size());
  x << u, p;
  return x;
}

namespace {

double smoothstep(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

// Distance from p to the nearer end of the inflow side, measured along it.
double lateral_distance(const geo::DomainSpec& domain, Point p) {
  const Box& b = domain.bounds;
  if (domain.inflow == geo::Side::Bottom || domain.inflow == geo::Side::Top) {
    return std::min(p.x - b.xmin, b.xmax - p.x);
  }
  return std::min(p.y - b.ymin, b.ymax - p.y);
}

}  // namespace

DirichletConstraints velocity_dirichlet(const TaylorHood& spaces, const geo::DomainSpec& domain,
                                        const InflowProfile& profile) {
  const fem::DofMap& v = spaces.velocity;
  const Point dir = geo::inward_normal(domain.inflow);
  DirichletConstraints bc;
  for (int n : v.boundary_nodes(BoundaryTag::Inflow)) {
    double s = profile.speed;
    if (profile.ramp_width > 0.0) s *= smoothstep(lateral_distance(domain, v.node_point(n)) / profile.ramp_width);
    bc.add(v.dof(n, 0), s * dir.x);
    bc.add(v.dof(n, 1), s * dir.y);
  }
  for (BoundaryTag tag : {BoundaryTag::NoSlipWall, BoundaryTag::BuildingWall}) {
    for (int n : v.boundary_nodes(tag)) {
      bc.set(v.dof(n, 0), 0.0);
      bc.set(v.dof(n, 1), 0.0);
    }
  }
  return bc;
}

LiftingFunction build_lifting(const TaylorHood& spaces, const geo::DomainSpec& domain,
                              const InflowProfile& profile) {
  if (spaces.velocity.boundary_nodes(BoundaryTag::Inflow).empty()) {
    throw Error(ErrorKind::Topology, "mesh has no INFLOW edges; cannot build the lifting function");
  }
  LiftingFunction lift;
  lift.dirichlet = velocity_dirichlet(spaces, domain, profile);
  const InsSystem stokes(spaces, 1.0, lift.dirichlet, {}, std::nullopt, true);
  // Linear problem: one Newton step from zero is exact.
  Vector x = stokes.impose(Vector::Zero(static_cast<Eigen::Index>(spaces.size())));
  const Vector r = stokes.residual(x);
  x += fem::solve_sparse(stokes.jacobian(x), -r);
  const auto nu = static_cast<Eigen::Index>(spaces.nu_dofs());
  lift.velocity = x.head(nu);
  lift.pressure = x.tail(x.size() - nu);
  return lift;
}

// --- InsSystem ------------------------------------------------------------------

InsSystem::InsSystem(const TaylorHood& spaces, double nu, DirichletConstraints velocity_bc, Vector forcing,
                     std::optional<int> pinned_pressure, bool stokes)
    : spaces_(&spaces), nu_(nu), bc_(std::move(velocity_bc)), forcing_(std::move(forcing)),
      pinned_(pinned_pressure), stokes_(stokes) {
  const auto nu_dofs = static_cast<Eigen::Index>(spaces.nu_dofs());
  const auto n = static_cast<Eigen::Index>(spaces.size());
  if (forcing_.size() == 0) forcing_ = Vector::Zero(nu_dofs);
  if (forcing_.size() != nu_dofs) throw Error(ErrorKind::Internal, "forcing has the wrong length");

  viscous_ = fem::assemble(fem::Viscous{nu}, spaces.velocity, spaces.velocity);
  divergence_ = fem::assemble(fem::Divergence{}, spaces.velocity, spaces.pressure);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(viscous_.nonZeros() + 2 * divergence_.nonZeros()));
  for (Eigen::Index r = 0; r < viscous_.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(viscous_, r); it; ++it) trip.emplace_back(r, it.col(), it.value());
  }
  for (Eigen::Index r = 0; r < divergence_.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(divergence_, r); it; ++it) {
      trip.emplace_back(nu_dofs + r, it.col(), it.value());
      trip.emplace_back(it.col(), nu_dofs + r, it.value());
    }
  }
  linear_.resize(n, n);
  linear_.setFromTriplets(trip.begin(), trip.end());
  linear_.makeCompressed();

  fixed_.assign(static_cast<std::size_t>(n), 0);
  for (const auto& [dof, value] : bc_.values()) {
    if (dof < 0 || dof >= nu_dofs) throw Error(ErrorKind::Internal, "velocity Dirichlet dof out of range");
    fixed_[static_cast<std::size_t>(dof)] = 1;
    zero_bc_.add(dof, 0.0);
  }
  if (pinned_) {
    if (*pinned_ < 0 || *pinned_ >= static_cast<int>(spaces.pressure.size())) {
      throw Error(ErrorKind::Internal, "pinned pressure dof out of range");
    }
    const int dof = static_cast<int>(nu_dofs) + *pinned_;
    fixed_[static_cast<std::size_t>(dof)] = 1;
    zero_bc_.add(dof, 0.0);
  }
}

Vector InsSystem::impose(const Vector& x) const {
  Vector out = x;
  for (const auto& [dof, value] : bc_.values()) out[dof] = value;
  return out;
}

Vector InsSystem::residual(const Vector& x) const {
  const auto nu_dofs = static_cast<Eigen::Index>(spaces_->nu_dofs());
  if (stokes_) return residual(x, Vector::Zero(nu_dofs));
  return residual(x, fem::convection_vector(spaces_->velocity, x.head(nu_dofs)));
}

Vector InsSystem::residual(const Vector& x, const Vector& convection) const {
  const auto nu_dofs = static_cast<Eigen::Index>(spaces_->nu_dofs());
  Vector r = linear_ * x;
  r.head(nu_dofs) += convection - forcing_;
  for (std::size_t i = 0; i < fixed_.size(); ++i) {
    if (fixed_[i]) r[static_cast<Eigen::Index>(i)] = 0.0;
  }
  return r;
}

SparseMatrix InsSystem::jacobian(const Vector& x) const {
  SparseMatrix J = linear_;
  if (!stokes_) {
    const auto nu_dofs = static_cast<Eigen::Index>(spaces_->nu_dofs());
    const Vector u = x.head(nu_dofs);
    SparseMatrix C = fem::assemble(fem::Convection{&u, true}, spaces_->velocity, spaces_->velocity);
    C.conservativeResize(J.rows(), J.cols());
    J += C;
  }
  Vector dummy = Vector::Zero(J.rows());
  fem::apply_dirichlet(J, dummy, zero_bc_);
  return J;
}

// --- Newton -----------------------------------------------------------------------

double newton_step(const InsSystem& system, Vector& x, double current_residual) {
  const Vector r = system.residual(x);
  const Vector delta = fem::solve_sparse(system.jacobian(x), -r);
  double step = 1.0;
  Vector trial = x + delta;
  double r_new = system.residual(trial).norm();
  for (int halving = 0; halving < 4 && !(r_new <= current_residual); ++halving) {
    step *= 0.5;
    trial = x + step * delta;
    r_new = system.residual(trial).norm();
  }
  if (!std::isfinite(r_new)) throw NonConvergenceError("Newton produced a non-finite residual", {current_residual});
  x = std::move(trial);
  return r_new;
}

WindField newton_solve(const InsSystem& system, Vector x, const NewtonOptions& options) {
  x = system.impose(x);
  double r = system.residual(x).norm();
  WindField out;
  out.residual_history.push_back(r);
  const double target = std::max(options.tol * r, options.abs_tol);
  int increases = 0;
  int iter = 0;
  while (r > target) {
    if (iter == options.max_iter) {
      throw NonConvergenceError("Newton did not converge in " + std::to_string(options.max_iter) + " iterations",
                                out.residual_history);
    }
    const double r_new = newton_step(system, x, r);
    ++iter;
    out.residual_history.push_back(r_new);
    increases = r_new > r ? increases + 1 : 0;
    r = r_new;
    if (increases >= 3) {
      throw NonConvergenceError("Newton diverged: residual grew in 3 consecutive steps", out.residual_history);
    }
  }
  const auto nu_dofs = static_cast<Eigen::Index>(system.spaces().nu_dofs());
  out.velocity = x.head(nu_dofs);
  out.pressure = x.tail(x.size() - nu_dofs);
  out.newton_iterations = iter;
  return out;
}

namespace {

DirichletConstraints scaled(const DirichletConstraints& bc, double factor) {
  DirichletConstraints out;
  for (const auto& [dof, value] : bc.values()) out.add(dof, factor * value);
  return out;
}

WindField solve_at(const TaylorHood& spaces, const LiftingFunction& lifting, const InsParams& p, double mu,
                   const Vector& start) {
  const InsSystem system(spaces, p.nu, scaled(lifting.dirichlet, mu), {}, std::nullopt, p.stokes);
  WindField w = newton_solve(system, start, {p.newton_tol, p.newton_abs_tol, p.newton_max_iter});
  w.mu = mu;
  return w;
}

}  // namespace

WindField solve_steady_ins(const TaylorHood& spaces, const LiftingFunction& lifting, const InsParams& params,
                           const Vector* initial) {
  params.validate();
  const double mu = params.mu;
  const Vector start = initial != nullptr
                           ? *initial
                           : stack(mu * lifting.velocity, (mu * params.nu) * lifting.pressure);
  if (start.size() != static_cast<Eigen::Index>(spaces.size())) {
    throw Error(ErrorKind::Internal, "initial state has the wrong length");
  }
  try {
    return solve_at(spaces, lifting, params, mu, start);
  } catch (const NonConvergenceError& first) {
    if (!params.continuation || mu == 0.0) throw;
    std::vector<double> history = first.residual_history();
    Vector x = stack(0.25 * mu * lifting.velocity, (0.25 * mu * params.nu) * lifting.pressure);
    WindField w;
    int iterations = 0;
    for (double f : {0.25, 0.5, 1.0}) {
      try {
        w = solve_at(spaces, lifting, params, f * mu, x);
      } catch (const NonConvergenceError& e) {
        history.insert(history.end(), e.residual_history().begin(), e.residual_history().end());
        throw NonConvergenceError("Newton failed with continuation at mu = " + std::to_string(f * mu), history);
      }
      iterations += w.newton_iterations;
      history.insert(history.end(), w.residual_history.begin(), w.residual_history.end());
      x = stack(w.velocity, w.pressure);
    }
    w.newton_iterations = iterations;
    w.residual_history = std::move(history);
    return w;
  }
}

double max_speed(const fem::DofMap& velocity, const Vector& u) {
  double m = 0.0;
  for (std::size_t n = 0; n < velocity.node_count(); ++n) {
    const int i = static_cast<int>(n);
    m = std::max(m, std::hypot(u[velocity.dof(i, 0)], u[velocity.dof(i, 1)]));
  }
  return m;
}

double reynolds_number(const WindField& wind, const TaylorHood& spaces, const geo::DomainSpec& domain, double nu) {
  return max_speed(spaces.velocity, wind.velocity) * domain.characteristic_length / nu;
}

}  // namespace urbanflow::ins
