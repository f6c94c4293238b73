#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "urbanflow/fem.hpp"

namespace urbanflow::advect {

using fem::SparseMatrix;
using fem::Vector;

struct AdParams {
  double k = 0.0;        ///< diffusion, m^2/s
  double dt = 0.05;      ///< s
  double t_final = 5.0;  ///< s
  /// Dirichlet value (ppm) on INFLOW; absent = homogeneous Neumann everywhere.
  std::optional<double> dirichlet_inflow;
  /// Multiplies the SUPG parameter; 0 turns stabilization off.
  double tau_scale = 1.0;

  void validate() const;
  std::size_t step_count() const;
};

struct InitialPlume {
  Point center;
  double amplitude = 1e4;  ///< ppm
  double radius = 10.0;    ///< truncation radius, m
  double width = 3.0;      ///< standard deviation, m

  void validate() const;
  double operator()(Point x) const;
};

struct ConcentrationField {
  Vector values;  ///< ppm, P1 nodal
  double time = 0.0;
};

/// Nodal interpolation of the truncated Gaussian. Throws Error(Constraint)
/// when the center lies outside the meshed fluid region.
ConcentrationField gaussian_initial(const fem::DofMap& space, const InitialPlume& plume);

/// The SUPG parameter for one element, with h the streamline length.
double supg_tau(Point a, Point b, Point c, Point u, double k, double dt);

/// Operators of one implicit Euler step, assembled once.
struct AdSystem {
  SparseMatrix lhs;
  SparseMatrix rhs_op;
  fem::DirichletConstraints dirichlet;
  /// Factorization of lhs with the Dirichlet rows applied.
  std::shared_ptr<const fem::SparseLu> factor;
  /// lhs applied to the Dirichlet values (zero elsewhere).
  Vector dirichlet_shift;
  /// Integration weights: mass(c) = weights . c.
  Vector weights;
  double dt = 0.0;
};

/// Assembles lhs / rhs_op for wind `velocity` on the P2 space `wind_space`.
/// Throws when the two spaces live on different meshes.
AdSystem assemble_ad_system(const fem::DofMap& space, const fem::DofMap& wind_space, const Vector& velocity,
                            const AdParams& params);

/// Solves lhs c_{n+1} = rhs_op c_n with the Dirichlet rows applied.
ConcentrationField step(const ConcentrationField& c, const AdSystem& system);

struct StepRecord {
  std::size_t step = 0;
  double time = 0.0;
  double min = 0.0;
  double max = 0.0;
  double mass = 0.0;
};

struct ProbeSample {
  double time;
  std::size_t probe;
  Point position;
  double value;
};

struct TransientResult {
  StepRecord initial;               ///< step 0
  std::vector<StepRecord> records;  ///< one per executed step
  std::vector<ProbeSample> probes;
  ConcentrationField final;
  double min_undershoot = 0.0;      ///< most negative value seen (0 if none)
};

/// Runs ceil(t_final / dt) steps on the P1 space the system was built on. `on_save(step, field)` fires for step 0
/// and every `save_interval` steps (and the last step). Non-finite values
/// throw InstabilityError with the step index.
TransientResult run_transient(const fem::DofMap& space, const ConcentrationField& initial, const AdSystem& system,
                              const AdParams& params, const std::vector<Point>& probes, std::size_t save_interval = 0,
                              const std::function<void(std::size_t, const ConcentrationField&)>& on_save = {});

/// Integral of c using the P1 mass matrix weights.
double total_mass(const AdSystem& system, const Vector& c);

}  // namespace urbanflow::advect
