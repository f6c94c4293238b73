#include "urbanflow/rom.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/SVD>

#include "urbanflow/error.hpp"

namespace urbanflow::rom {

// --- Sampling -----------------------------------------------------------------

namespace {

void check_sampler(const Sampler& s) {
  if (s.count < 2) throw Error(ErrorKind::Config, "a parameter sampler needs at least 2 samples");
  if (!(s.mu_max > s.mu_min) || !(s.mu_min >= 0.0)) {
    throw Error(ErrorKind::Config, "parameter range must satisfy 0 <= mu_min < mu_max");
  }
}

}  // namespace

std::vector<double> equispaced(const Sampler& s) {
  check_sampler(s);
  std::vector<double> out;
  for (int i = 0; i < s.count; ++i) {
    out.push_back(s.mu_min + (s.mu_max - s.mu_min) * i / (s.count - 1));
  }
  return out;
}

std::vector<double> random_samples(const Sampler& s, std::uint64_t seed, const std::vector<double>& exclude) {
  check_sampler(s);
  std::mt19937_64 rng(seed);
  // Map the raw 53 random bits ourselves; std distributions differ between
  // standard libraries.
  auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const double gap = 1e-9 * (s.mu_max - s.mu_min);
  std::vector<double> out;
  while (static_cast<int>(out.size()) < s.count) {
    const double mu = s.mu_min + (s.mu_max - s.mu_min) * uniform();
    auto clash = [&](double v) { return std::fabs(v - mu) <= gap; };
    if (std::any_of(exclude.begin(), exclude.end(), clash) || std::any_of(out.begin(), out.end(), clash)) continue;
    out.push_back(mu);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// --- FomContext -------------------------------------------------------------------

FomContext::FomContext(const ins::TaylorHood& spaces, ins::LiftingFunction lifting, ins::InsParams params)
    : spaces_(&spaces), lifting_(std::move(lifting)), params_(params) {
  params_.validate();
  mass_ = fem::assemble(fem::Mass{}, spaces.velocity, spaces.velocity);
  viscous_ = fem::assemble(fem::Viscous{params_.nu}, spaces.velocity, spaces.velocity);
  fixed_.assign(spaces.nu_dofs(), 0);
  for (const auto& [dof, value] : lifting_.dirichlet.values()) fixed_[static_cast<std::size_t>(dof)] = 1;
}

ins::WindField FomContext::solve(double mu, const Vector* initial) const {
  ins::InsParams p = params_;
  p.mu = mu;
  return ins::solve_steady_ins(*spaces_, lifting_, p, initial);
}

Vector FomContext::nonlinearity(const Vector& u) const {
  Vector n = fem::convection_vector(spaces_->velocity, u);
  for (std::size_t i = 0; i < fixed_.size(); ++i) {
    if (fixed_[i]) n[static_cast<Eigen::Index>(i)] = 0.0;
  }
  return n;
}

double FomContext::norm(const Vector& u) const { return std::sqrt(std::max(0.0, u.dot(mass_ * u))); }

// --- Snapshots ----------------------------------------------------------------

SnapshotSet collect_snapshots(const FomContext& fom, std::vector<double> mus) {
  if (mus.size() < 2) throw Error(ErrorKind::Config, "at least 2 snapshot parameters are required");
  SnapshotSet out;
  std::sort(mus.begin(), mus.end());
  const std::size_t before = mus.size();
  mus.erase(std::unique(mus.begin(), mus.end()), mus.end());
  if (mus.size() != before) {
    out.warnings.push_back("removed " + std::to_string(before - mus.size()) + " duplicate parameter values");
  }
  const auto n = static_cast<Eigen::Index>(fom.spaces().nu_dofs());
  std::vector<Vector> vel, nonlin;
  Vector warm;
  for (double mu : mus) {
    try {
      const ins::WindField w = fom.solve(mu, warm.size() ? &warm : nullptr);
      vel.push_back(w.velocity - mu * fom.lifting().velocity);
      nonlin.push_back(fom.nonlinearity(w.velocity));
      out.mu.push_back(mu);
      warm = ins::stack(w.velocity, w.pressure);
    } catch (const NonConvergenceError&) {
      out.failed.push_back(mu);
    } catch (const SingularMatrixError&) {
      out.failed.push_back(mu);
    }
  }
  if (out.mu.size() < 2) {
    throw Error(ErrorKind::NonConvergence, "only " + std::to_string(out.mu.size()) +
                                               " snapshot solves succeeded; at least 2 are required");
  }
  out.velocity.resize(n, static_cast<Eigen::Index>(vel.size()));
  out.nonlinearity.resize(n, static_cast<Eigen::Index>(vel.size()));
  for (std::size_t i = 0; i < vel.size(); ++i) {
    out.velocity.col(static_cast<Eigen::Index>(i)) = vel[i];
    out.nonlinearity.col(static_cast<Eigen::Index>(i)) = nonlin[i];
  }
  return out;
}

// --- POD ----------------------------------------------------------------------

ReducedBasis pod(const Matrix& snapshots, int n_r, const SparseMatrix* mass) {
  const auto ns = static_cast<int>(snapshots.cols());
  if (n_r < 1 || n_r > ns) {
    throw Error(ErrorKind::Config, "N_r = " + std::to_string(n_r) + " must lie in [1, " + std::to_string(ns) + "]");
  }
  const Matrix MS = mass != nullptr ? Matrix(*mass * snapshots) : snapshots;
  Matrix C = snapshots.transpose() * MS;
  C = 0.5 * (C + C.transpose());
  const Eigen::SelfAdjointEigenSolver<Matrix> es(C);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::Internal, "eigendecomposition failed");

  ReducedBasis out;
  // Eigen returns ascending order.
  const Vector lam = es.eigenvalues().reverse();
  const Matrix vec = es.eigenvectors().rowwise().reverse();
  out.lambda_1 = lam[0];
  if (!(out.lambda_1 > 0.0)) throw Error(ErrorKind::Config, "all snapshots are zero");
  for (int k = 0; k < ns; ++k) out.eigenvalues.push_back(std::max(0.0, lam[k]) / out.lambda_1);
  for (int k = 0; k < n_r; ++k) {
    if (lam[k] < 1e-14 * out.lambda_1) {
      throw Error(ErrorKind::Config, "snapshot set is rank deficient at mode " + std::to_string(k + 1) +
                                         "; use N_r <= " + std::to_string(k));
    }
  }
  out.V.resize(snapshots.rows(), n_r);
  for (int k = 0; k < n_r; ++k) out.V.col(k) = snapshots * vec.col(k) / std::sqrt(lam[k]);

  // Two passes of modified Gram-Schmidt in the chosen inner product.
  auto ip = [&](const Vector& x, const Vector& y) { return mass != nullptr ? x.dot(*mass * y) : x.dot(y); };
  for (int pass = 0; pass < 2; ++pass) {
    for (int k = 0; k < n_r; ++k) {
      Vector v = out.V.col(k);
      for (int j = 0; j < k; ++j) v -= ip(out.V.col(j), v) * out.V.col(j);
      out.V.col(k) = v / std::sqrt(ip(v, v));
    }
  }
  return out;
}

// --- DEIM ---------------------------------------------------------------------

namespace {

int argmax_abs(const Vector& v) {
  int best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::fabs(v[i]) > std::fabs(v[best])) best = static_cast<int>(i);
  }
  return best;
}

Matrix sampled_rows(const Matrix& U, const std::vector<int>& idx, int cols) {
  Matrix S(static_cast<Eigen::Index>(idx.size()), cols);
  for (std::size_t r = 0; r < idx.size(); ++r) S.row(static_cast<Eigen::Index>(r)) = U.row(idx[r]).head(cols);
  return S;
}

}  // namespace

Vector DeimData::interpolate(const Vector& f) const {
  Vector pf(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t i = 0; i < indices.size(); ++i) pf[static_cast<Eigen::Index>(i)] = f[indices[i]];
  return U * (sampled_inverse * pf);
}

DeimData deim(const Matrix& snapshots, int n_m) {
  const auto ns = static_cast<int>(snapshots.cols());
  if (n_m < 1 || n_m > ns) {
    throw Error(ErrorKind::Config, "N_m = " + std::to_string(n_m) + " must lie in [1, " + std::to_string(ns) + "]");
  }
  const Eigen::BDCSVD<Matrix> svd(snapshots, Eigen::ComputeThinU);
  const Vector& sigma = svd.singularValues();
  DeimData d;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) d.singular_values.push_back(sigma[i]);
  if (!(sigma[0] > 0.0)) throw Error(ErrorKind::Config, "all nonlinearity snapshots are zero");
  if (sigma[n_m - 1] < 1e-14 * sigma[0]) {
    throw Error(ErrorKind::Config, "nonlinearity snapshots are rank deficient; reduce N_m");
  }
  d.U = svd.matrixU().leftCols(n_m);

  d.indices.push_back(argmax_abs(d.U.col(0)));
  for (int l = 1; l < n_m; ++l) {
    const Matrix PU = sampled_rows(d.U, d.indices, l);
    Vector rhs(l);
    for (int i = 0; i < l; ++i) rhs[i] = d.U(d.indices[static_cast<std::size_t>(i)], l);
    const Vector c = PU.fullPivLu().solve(rhs);
    const Vector r = d.U.col(l) - d.U.leftCols(l) * c;
    d.indices.push_back(argmax_abs(r));
  }
  std::vector<int> sorted = d.indices;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorKind::Singular, "DEIM selected a duplicate index; the basis is degenerate");
  }
  const Matrix PU = sampled_rows(d.U, d.indices, n_m);
  const Eigen::JacobiSVD<Matrix> small(PU);
  const double smin = small.singularValues()[n_m - 1];
  if (!(smin > 1e-13 * small.singularValues()[0])) {
    throw Error(ErrorKind::Singular, "DEIM sampled matrix is singular");
  }
  d.condition = 1.0 / smin;
  d.sampled_inverse = PU.fullPivLu().inverse();
  return d;
}

// --- Projection ------------------------------------------------------------------

RomOperators project_operators(const FomContext& fom, const ReducedBasis& basis, const DeimData& deim) {
  const auto n = static_cast<Eigen::Index>(fom.spaces().nu_dofs());
  if (basis.V.rows() != n || deim.U.rows() != n) throw Error(ErrorKind::Internal, "ROM dimension mismatch");
  const int nr = basis.n_r();
  RomOperators ops;
  ops.V = basis.V;
  ops.lifting = fom.lifting().velocity;
  const Matrix KV = fom.viscous() * basis.V;
  ops.A = basis.V.transpose() * KV;
  ops.a = basis.V.transpose() * (fom.viscous() * ops.lifting);
  ops.E = basis.V.transpose() * deim.U * deim.sampled_inverse;

  Matrix W(n, nr + 1);
  W.col(0) = ops.lifting;
  W.rightCols(nr) = basis.V;
  ops.H.assign(deim.indices.size(), Matrix::Zero(nr + 1, nr + 1));
  for (int a = 0; a <= nr; ++a) {
    const Vector wa = W.col(a);
    const SparseMatrix C = fem::assemble(fem::Convection{&wa, false}, fom.spaces().velocity, fom.spaces().velocity);
    // Only the DEIM rows of C W are needed.
    for (std::size_t i = 0; i < deim.indices.size(); ++i) {
      const int row = deim.indices[i];
      for (SparseMatrix::InnerIterator it(C, row); it; ++it) {
        ops.H[i].row(a) += it.value() * W.row(it.col());
      }
    }
  }
  return ops;
}

RomOperators RomOperators::truncated(int n) const {
  if (n < 1 || n > n_r()) throw Error(ErrorKind::Config, "cannot truncate the ROM to " + std::to_string(n) + " modes");
  RomOperators out;
  out.A = A.topLeftCorner(n, n);
  out.a = a.head(n);
  out.E = E.topRows(n);
  for (const Matrix& h : H) out.H.push_back(h.topLeftCorner(n + 1, n + 1));
  out.V = V.leftCols(n);
  out.lifting = lifting;
  out.mu_min = mu_min;
  out.mu_max = mu_max;
  return out;
}

// --- Online ------------------------------------------------------------------------

namespace {

Vector coordinates(double mu, const Vector& u_hat) {
  Vector x(u_hat.size() + 1);
  x << mu, u_hat;
  return x;
}

}  // namespace

Vector rom_residual(const RomOperators& ops, double mu, const Vector& u_hat) {
  const Vector x = coordinates(mu, u_hat);
  Vector nl(static_cast<Eigen::Index>(ops.H.size()));
  for (std::size_t i = 0; i < ops.H.size(); ++i) nl[static_cast<Eigen::Index>(i)] = x.dot(ops.H[i] * x);
  return ops.A * u_hat + mu * ops.a + ops.E * nl;
}

Matrix rom_jacobian(const RomOperators& ops, double mu, const Vector& u_hat) {
  const Vector x = coordinates(mu, u_hat);
  const auto nr = u_hat.size();
  Matrix D(static_cast<Eigen::Index>(ops.H.size()), nr);
  for (std::size_t i = 0; i < ops.H.size(); ++i) {
    const Vector g = ops.H[i] * x + ops.H[i].transpose() * x;
    D.row(static_cast<Eigen::Index>(i)) = g.tail(nr).transpose();
  }
  return ops.A + ops.E * D;
}

Vector RomSolution::reconstruct(const RomOperators& ops) const { return mu * ops.lifting + ops.V * u_hat; }

RomSolution solve_rom(double mu, const RomOperators& ops, double tol, int max_iter) {
  RomSolution s;
  s.mu = mu;
  const double span = ops.mu_max - ops.mu_min;
  s.extrapolated = span > 0.0 && (mu < ops.mu_min - 0.1 * span || mu > ops.mu_max + 0.1 * span);
  s.u_hat = Vector::Zero(ops.n_r());
  Vector r = rom_residual(ops, mu, s.u_hat);
  double rn = r.norm();
  s.residual_history.push_back(rn);
  const double target = std::max(tol * rn, 1e-15);
  while (rn > target) {
    if (s.iterations == max_iter) {
      throw NonConvergenceError("reduced Newton did not converge", s.residual_history);
    }
    s.u_hat -= rom_jacobian(ops, mu, s.u_hat).partialPivLu().solve(r);
    r = rom_residual(ops, mu, s.u_hat);
    rn = r.norm();
    ++s.iterations;
    s.residual_history.push_back(rn);
    if (!std::isfinite(rn)) throw NonConvergenceError("reduced Newton diverged", s.residual_history);
  }
  return s;
}

// --- Benchmark -------------------------------------------------------------------

namespace {

template <typename F>
double median_seconds(int reps, F&& f) {
  std::vector<double> t;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    t.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

}  // namespace

double RomBenchmark::max_error(int n_r) const {
  double m = 0.0;
  for (const auto& r : rows) {
    if (r.n_r == n_r) m = std::max(m, r.error_rel);
  }
  return m;
}

double RomBenchmark::min_speedup(int n_r) const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    if (r.n_r == n_r) m = std::min(m, r.speedup);
  }
  return m;
}

RomBenchmark benchmark(const FomContext& fom, const RomOperators& ops, const std::vector<double>& test_mu,
                       const std::vector<int>& n_r_values, int repetitions) {
  if (repetitions < 1) throw Error(ErrorKind::Config, "benchmark repetitions must be positive");
  std::vector<RomOperators> reduced;
  for (int n : n_r_values) reduced.push_back(ops.truncated(n));
  RomBenchmark out;
  for (double mu : test_mu) {
    ins::WindField w;
    double t_fom = 0.0;
    try {
      t_fom = median_seconds(repetitions, [&] { w = fom.solve(mu); });
    } catch (const NonConvergenceError&) {
      out.failed.push_back(mu);
      continue;
    } catch (const SingularMatrixError&) {
      out.failed.push_back(mu);
      continue;
    }
    const double ref = fom.norm(w.velocity);
    for (std::size_t k = 0; k < reduced.size(); ++k) {
      Vector u;
      const double t_rom = median_seconds(repetitions, [&] { u = solve_rom(mu, reduced[k]).reconstruct(reduced[k]); });
      BenchmarkRow row;
      row.mu = mu;
      row.n_r = n_r_values[k];
      const double err = fom.norm(w.velocity - u);
      row.error_rel = ref > 0.0 ? err / ref : err;
      row.t_fom_s = t_fom;
      row.t_rom_s = t_rom;
      row.speedup = t_fom / t_rom;
      out.rows.push_back(row);
    }
  }
  return out;
}

}  // namespace urbanflow::rom
