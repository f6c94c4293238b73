#include "urbanflow/advect.hpp"

#include <algorithm>
#include <cmath>

#include "urbanflow/error.hpp"

namespace urbanflow::advect {

void AdParams::validate() const {
  if (!(k >= 0.0)) throw Error(ErrorKind::Config, "diffusion coefficient k must be non-negative");
  if (!(dt > 0.0)) throw Error(ErrorKind::Config, "dt must be positive");
  if (!(t_final >= dt)) throw Error(ErrorKind::Config, "t_final must be at least dt");
  if (dirichlet_inflow && !std::isfinite(*dirichlet_inflow)) {
    throw Error(ErrorKind::Config, "inflow Dirichlet value must be finite");
  }
}

std::size_t AdParams::step_count() const {
  return static_cast<std::size_t>(std::ceil(t_final / dt - 1e-9));
}

void InitialPlume::validate() const {
  if (!(amplitude > 0.0)) throw Error(ErrorKind::Config, "plume amplitude must be positive");
  if (!(width > 0.0)) throw Error(ErrorKind::Config, "plume width must be positive");
  if (!(radius >= width)) throw Error(ErrorKind::Config, "plume radius must be at least its width");
}

double InitialPlume::operator()(Point x) const {
  const double d2 = dot(x - center, x - center);
  if (d2 > radius * radius) return 0.0;
  return amplitude * std::exp(-d2 / (2.0 * width * width));
}

ConcentrationField gaussian_initial(const fem::DofMap& space, const InitialPlume& plume) {
  plume.validate();
  if (space.kind() == fem::SpaceKind::VelocityP2Vector) {
    throw Error(ErrorKind::Internal, "concentration needs a scalar P1 space");
  }
  const mesh::PointLocator locator(space.mesh());
  if (!locator.locate(plume.center)) {
    throw Error(ErrorKind::Constraint, "plume center (" + std::to_string(plume.center.x) + ", " +
                                           std::to_string(plume.center.y) +
                                           ") lies outside the fluid domain or inside a building");
  }
  ConcentrationField c;
  c.values = fem::interpolate(space, [&](Point x) { return plume(x); });
  return c;
}

double supg_tau(Point a, Point b, Point c, Point u, double k, double dt) {
  return fem::supg_tau(fem::streamline_length(a, b, c, u), norm(u), k, dt);
}

AdSystem assemble_ad_system(const fem::DofMap& space, const fem::DofMap& wind_space, const Vector& velocity,
                            const AdParams& params) {
  params.validate();
  if (space.mesh_hash() != wind_space.mesh_hash()) {
    throw Error(ErrorKind::Topology, "wind field and concentration space live on different meshes");
  }
  if (wind_space.kind() != fem::SpaceKind::VelocityP2Vector ||
      velocity.size() != static_cast<Eigen::Index>(wind_space.size())) {
    throw Error(ErrorKind::Internal, "wind must be a P2 vector field");
  }
  const fem::AdCoefficients coeff{params.k, params.dt, &wind_space, &velocity, params.tau_scale};
  AdSystem s;
  s.dt = params.dt;
  s.lhs = fem::assemble(fem::AdLhs{coeff}, space, space);
  s.rhs_op = fem::assemble(fem::AdRhsOp{coeff}, space, space);
  s.weights = fem::assemble(fem::Mass{}, space, space) * Vector::Ones(static_cast<Eigen::Index>(space.size()));

  if (params.dirichlet_inflow) {
    for (int n : space.boundary_nodes(mesh::BoundaryTag::Inflow)) s.dirichlet.add(n, *params.dirichlet_inflow);
  }
  Vector g = Vector::Zero(static_cast<Eigen::Index>(space.size()));
  for (const auto& [dof, value] : s.dirichlet.values()) g[dof] = value;
  s.dirichlet_shift = s.lhs * g;
  SparseMatrix constrained = s.lhs;
  Vector dummy = Vector::Zero(constrained.rows());
  fem::apply_dirichlet(constrained, dummy, s.dirichlet);
  s.factor = std::make_shared<const fem::SparseLu>(constrained);
  return s;
}

ConcentrationField step(const ConcentrationField& c, const AdSystem& system) {
  if (c.values.size() != system.rhs_op.cols()) throw Error(ErrorKind::Internal, "concentration size mismatch");
  Vector b = system.rhs_op * c.values;
  if (system.dirichlet.size() != 0) {
    b -= system.dirichlet_shift;
    for (const auto& [dof, value] : system.dirichlet.values()) b[dof] = value;
  }
  ConcentrationField out;
  out.values = system.factor->solve(b);
  out.time = c.time + system.dt;
  return out;
}

double total_mass(const AdSystem& system, const Vector& c) { return system.weights.dot(c); }

TransientResult run_transient(const fem::DofMap& space, const ConcentrationField& initial, const AdSystem& system,
                              const AdParams& params, const std::vector<Point>& probes, std::size_t save_interval,
                              const std::function<void(std::size_t, const ConcentrationField&)>& on_save) {
  params.validate();
  const std::size_t steps = params.step_count();
  TransientResult out;

  // Probe interpolation weights are fixed for the run.
  struct ProbeWeights {
    std::array<int, 3> nodes;
    std::array<double, 3> bary;
  };
  std::vector<ProbeWeights> pw;
  if (!probes.empty()) {
    const mesh::PointLocator locator(space.mesh());
    for (std::size_t i = 0; i < probes.size(); ++i) {
      const auto hit = locator.locate(probes[i]);
      if (!hit) {
        throw Error(ErrorKind::Constraint, "probe " + std::to_string(i) + " lies outside the fluid domain");
      }
      pw.push_back({space.mesh().triangles()[hit->triangle], hit->barycentric});
    }
  }
  auto sample = [&](const ConcentrationField& c) {
    for (std::size_t i = 0; i < pw.size(); ++i) {
      double v = 0.0;
      for (int j = 0; j < 3; ++j) v += pw[i].bary[j] * c.values[pw[i].nodes[j]];
      out.probes.push_back({c.time, i, probes[i], v});
    }
  };

  auto record = [&](std::size_t k, const ConcentrationField& c) {
    if (!c.values.allFinite()) {
      throw InstabilityError("non-finite concentration at step " + std::to_string(k), k);
    }
    StepRecord r;
    r.step = k;
    r.time = c.time;
    r.min = c.values.minCoeff();
    r.max = c.values.maxCoeff();
    r.mass = total_mass(system, c.values);
    out.min_undershoot = std::min(out.min_undershoot, r.min);
    if (k == 0) {
      out.initial = r;
    } else {
      out.records.push_back(r);
    }
  };

  ConcentrationField c = initial;
  record(0, c);
  sample(c);
  if (on_save) on_save(0, c);
  for (std::size_t k = 1; k <= steps; ++k) {
    try {
      c = step(c, system);
    } catch (const SingularMatrixError&) {
      throw InstabilityError("non-finite concentration at step " + std::to_string(k), k);
    }
    record(k, c);
    sample(c);
    if (on_save && ((save_interval > 0 && k % save_interval == 0) || k == steps)) on_save(k, c);
  }
  out.final = std::move(c);
  return out;
}

}  // namespace urbanflow::advect
