#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "urbanflow/fem.hpp"
#include "urbanflow/geo.hpp"

namespace urbanflow::ins {

using fem::SparseMatrix;
using fem::Vector;

struct InsParams {
  double nu = 0.1;                ///< kinematic viscosity, m^2/s
  double mu = 1.0;                ///< inflow multiplier
  double base_inflow_speed = 1.0; ///< m/s at mu = 1
  double newton_tol = 1e-10;      ///< relative residual
  int newton_max_iter = 25;
  /// Absolute residual floor, so that an already-converged start stops.
  double newton_abs_tol = 1e-13;
  /// Retry through mu/4, mu/2, mu after a nonconvergence.
  bool continuation = true;
  /// Drop the convective term (Stokes).
  bool stokes = false;

  void validate() const;
};

/// Inflow speed along the inflow side: base speed, multiplied by a smoothstep
/// ramp of width `ramp_width` next to the lateral walls (0 = uniform).
struct InflowProfile {
  double speed = 1.0;
  double ramp_width = 0.0;
};

/// Taylor-Hood pair on one mesh.
struct TaylorHood {
  explicit TaylorHood(const mesh::TriMesh& mesh)
      : velocity(mesh, fem::SpaceKind::VelocityP2Vector), pressure(mesh, fem::SpaceKind::PressureP1) {}

  fem::DofMap velocity;
  fem::DofMap pressure;

  std::size_t nu_dofs() const { return velocity.size(); }
  std::size_t size() const { return velocity.size() + pressure.size(); }
};

/// Unit-parameter Dirichlet data extended by a Stokes solve.
struct LiftingFunction {
  Vector velocity;
  Vector pressure;  ///< Stokes pressure at nu = 1
  /// Velocity Dirichlet dofs (inflow, walls, buildings) and their unit values.
  fem::DirichletConstraints dirichlet;
};

struct WindField {
  Vector velocity;
  Vector pressure;
  double mu = 0.0;
  int newton_iterations = 0;
  std::vector<double> residual_history;
};

/// Velocity Dirichlet data at mu = 1: the profile on INFLOW, zero on
/// NOSLIP_WALL and BUILDING_WALL (walls win at shared vertices).
fem::DirichletConstraints velocity_dirichlet(const TaylorHood& spaces, const geo::DomainSpec& domain,
                                             const InflowProfile& profile);

LiftingFunction build_lifting(const TaylorHood& spaces, const geo::DomainSpec& domain,
                              const InflowProfile& profile);

/// The discrete steady Navier-Stokes system on [u; p]:
///   F(u, p) = [nu K u + N(u) + B^T p - f;  B u]
/// with velocity Dirichlet rows removed (and one pressure row when pinned).
class InsSystem {
 public:
  InsSystem(const TaylorHood& spaces, double nu, fem::DirichletConstraints velocity_bc,
            Vector forcing = {}, std::optional<int> pinned_pressure = std::nullopt, bool stokes = false);

  const TaylorHood& spaces() const { return *spaces_; }
  double nu() const { return nu_; }
  const fem::DirichletConstraints& velocity_bc() const { return bc_; }
  const SparseMatrix& viscous() const { return viscous_; }
  const SparseMatrix& divergence() const { return divergence_; }

  /// Full-length vector with the Dirichlet values written in (others from x).
  Vector impose(const Vector& x) const;
  /// Residual with zeros at constrained rows.
  Vector residual(const Vector& x) const;
  Vector residual(const Vector& x, const Vector& convection) const;
  /// Jacobian with identity rows and columns at constrained dofs.
  SparseMatrix jacobian(const Vector& x) const;
  bool constrained(int dof) const { return fixed_[static_cast<std::size_t>(dof)] != 0; }

 private:
  const TaylorHood* spaces_;
  double nu_;
  fem::DirichletConstraints bc_;
  Vector forcing_;
  std::optional<int> pinned_;
  bool stokes_;
  SparseMatrix viscous_;
  SparseMatrix divergence_;
  SparseMatrix linear_;  ///< [nu K, B^T; B, 0]
  std::vector<char> fixed_;
  fem::DirichletConstraints zero_bc_;
};

struct NewtonOptions {
  double tol = 1e-10;
  double abs_tol = 1e-13;
  int max_iter = 25;
};

/// One Newton update x <- x + delta with halving backtracking (up to 4
/// halvings) when the residual grows. Returns the new residual norm.
double newton_step(const InsSystem& system, Vector& x, double current_residual);

/// Newton iteration from x (Dirichlet values are imposed first). Throws
/// NonConvergenceError on 3 consecutive residual increases or max_iter.
WindField newton_solve(const InsSystem& system, Vector x, const NewtonOptions& options);

/// Solves for u = mu * lifting + correction. `initial` (full [u; p]) replaces
/// the default start mu * lifting.
WindField solve_steady_ins(const TaylorHood& spaces, const LiftingFunction& lifting, const InsParams& params,
                           const Vector* initial = nullptr);

/// max |u| over velocity nodes times the characteristic length over nu.
double reynolds_number(const WindField& wind, const TaylorHood& spaces, const geo::DomainSpec& domain,
                       double nu);
double max_speed(const fem::DofMap& velocity, const Vector& u);

/// Concatenates velocity and pressure.
Vector stack(const Vector& u, const Vector& p);

}  // namespace urbanflow::ins
