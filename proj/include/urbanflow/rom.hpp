#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "urbanflow/ins.hpp"

namespace urbanflow::rom {

using Matrix = Eigen::MatrixXd;
using fem::SparseMatrix;
using fem::Vector;

// --- Sampling -----------------------------------------------------------------

struct Sampler {
  double mu_min = 0.0;
  double mu_max = 1.0;
  int count = 50;
};

/// count equispaced values over [mu_min, mu_max], sorted and deduplicated.
std::vector<double> equispaced(const Sampler& s);
/// count uniform random values over the range avoiding `exclude` (seeded).
std::vector<double> random_samples(const Sampler& s, std::uint64_t seed, const std::vector<double>& exclude = {});

// --- Full-order context -----------------------------------------------------

/// Everything needed to run FOM solves at any mu.
class FomContext {
 public:
  FomContext(const ins::TaylorHood& spaces, ins::LiftingFunction lifting, ins::InsParams params);

  const ins::TaylorHood& spaces() const { return *spaces_; }
  const ins::LiftingFunction& lifting() const { return lifting_; }
  const ins::InsParams& params() const { return params_; }
  /// P2 vector mass matrix.
  const SparseMatrix& mass() const { return mass_; }
  /// nu K on the velocity space.
  const SparseMatrix& viscous() const { return viscous_; }
  /// True for velocity dofs carrying Dirichlet data.
  bool constrained(int dof) const { return fixed_[static_cast<std::size_t>(dof)] != 0; }

  ins::WindField solve(double mu, const Vector* initial = nullptr) const;
  /// Convection vector N(u) with constrained rows zeroed.
  Vector nonlinearity(const Vector& u) const;
  /// Mass-weighted norm.
  double norm(const Vector& u) const;

 private:
  const ins::TaylorHood* spaces_;
  ins::LiftingFunction lifting_;
  ins::InsParams params_;
  SparseMatrix mass_;
  SparseMatrix viscous_;
  std::vector<char> fixed_;
};

// --- Snapshots ----------------------------------------------------------------

struct SnapshotSet {
  std::vector<double> mu;
  Matrix velocity;      ///< columns u_i - mu_i * u_lift
  Matrix nonlinearity;  ///< columns N(u_i)
  std::vector<double> failed;
  std::vector<std::string> warnings;
};

/// FOM solves over `mus` (sorted, deduplicated with a warning), each warm
/// started from the previous solution. Fewer than 2 successes is fatal.
SnapshotSet collect_snapshots(const FomContext& fom, std::vector<double> mus);

// --- POD ----------------------------------------------------------------------

struct ReducedBasis {
  Matrix V;                     ///< dofs x N_r
  std::vector<double> eigenvalues;  ///< all N_s, divided by the largest
  double lambda_1 = 0.0;
  int n_r() const { return static_cast<int>(V.cols()); }
};

/// Method of snapshots in the inner product of `mass` (identity when null).
/// Modes are re-orthonormalized by two Gram-Schmidt passes.
ReducedBasis pod(const Matrix& snapshots, int n_r, const SparseMatrix* mass);

// --- DEIM ---------------------------------------------------------------------

struct DeimData {
  Matrix U;                  ///< dofs x N_m, orthonormal
  std::vector<int> indices;  ///< N_m distinct rows
  Matrix sampled_inverse;    ///< (P^T U)^{-1}
  double condition = 0.0;    ///< ||(P^T U)^{-1}||_2
  std::vector<double> singular_values;

  int n_m() const { return static_cast<int>(U.cols()); }
  /// U (P^T U)^{-1} P^T f.
  Vector interpolate(const Vector& f) const;
};

/// Greedy DEIM on the leading N_m left singular vectors of `snapshots`.
DeimData deim(const Matrix& snapshots, int n_m);

// --- Projected operators and online solve ----------------------------------------

/// Offline quantities in the coordinates x = [mu; u_hat]:
///   R(u_hat) = A u_hat + mu a + E n(x),  n_i(x) = x^T H_i x.
struct RomOperators {
  Matrix A;                  ///< V^T nu K V
  Vector a;                  ///< V^T nu K u_lift
  Matrix E;                  ///< V^T U (P^T U)^{-1}
  std::vector<Matrix> H;     ///< N_m matrices of size (N_r+1)^2
  Matrix V;
  Vector lifting;
  double mu_min = 0.0;  ///< training range
  double mu_max = 0.0;

  int n_r() const { return static_cast<int>(A.rows()); }
  /// Operators restricted to the first n modes.
  RomOperators truncated(int n) const;
};

RomOperators project_operators(const FomContext& fom, const ReducedBasis& basis, const DeimData& deim);

struct RomSolution {
  double mu = 0.0;
  Vector u_hat;
  int iterations = 0;
  std::vector<double> residual_history;
  bool extrapolated = false;

  /// mu * u_lift + V u_hat.
  Vector reconstruct(const RomOperators& ops) const;
};

/// Reduced residual and Jacobian at (mu, u_hat).
Vector rom_residual(const RomOperators& ops, double mu, const Vector& u_hat);
Matrix rom_jacobian(const RomOperators& ops, double mu, const Vector& u_hat);

/// Dense Newton on the reduced system from u_hat = 0.
RomSolution solve_rom(double mu, const RomOperators& ops, double tol = 1e-12, int max_iter = 30);

// --- Benchmark -------------------------------------------------------------------

struct BenchmarkRow {
  double mu = 0.0;
  int n_r = 0;
  double error_rel = 0.0;
  double t_fom_s = 0.0;
  double t_rom_s = 0.0;
  double speedup = 0.0;
};

struct RomBenchmark {
  std::vector<BenchmarkRow> rows;
  std::vector<double> failed;
  double max_error(int n_r) const;
  double min_speedup(int n_r) const;
};

/// For each test mu: FOM solve and ROM solves at every N_r in `n_r_values`,
/// each timed as the median of `repetitions` runs.
RomBenchmark benchmark(const FomContext& fom, const RomOperators& ops, const std::vector<double>& test_mu,
                       const std::vector<int>& n_r_values, int repetitions = 5);

// --- Artifact container ----------------------------------------------------------

struct RomArtifact {
  std::uint64_t mesh_hash = 0;
  RomOperators ops;
  std::vector<int> deim_indices;
  Matrix deim_basis;
  std::vector<double> eigenvalues;
  std::vector<double> training_mu;
};

inline constexpr std::uint32_t kArtifactVersion = 1;

void save_artifact(const std::string& path, const RomArtifact& artifact);
/// Throws Error(Io) on unreadable / malformed files and when
/// `expected_mesh_hash` (if nonzero) does not match.
RomArtifact load_artifact(const std::string& path, std::uint64_t expected_mesh_hash = 0);

}  // namespace urbanflow::rom
