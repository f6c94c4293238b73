#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "urbanflow/error.hpp"
#include "urbanflow/rom.hpp"

using namespace urbanflow;
using namespace urbanflow::rom;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0, 1);
  Matrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j) {
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = n(rng);
  }
  return m;
}

// Random SPD sparse matrix: tridiagonal, diagonally dominant.
SparseMatrix spd(int n) {
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, 3.0 + 0.01 * i);
    if (i + 1 < n) {
      t.emplace_back(i, i + 1, -1.0);
      t.emplace_back(i + 1, i, -1.0);
    }
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

struct RomCase {
  mesh::TriMesh mesh;
  geo::DomainSpec domain;
  std::unique_ptr<ins::TaylorHood> th;
  std::unique_ptr<FomContext> fom;
};

RomCase small_case() {
  RomCase c;
  c.domain = geo::make_domain({0, 0, 20, 30}, {0, 1});
  geo::BuildingSet b;
  b.coordinates = geo::CoordinateKind::LocalMeters;
  b.polygons = {{{{7, 10}, {11, 10}, {11, 13}, {7, 13}}, "b"}};
  c.mesh = mesh::triangulate(c.domain, b, {1.2, 1.2, 3.0, 3.0});
  c.th = std::make_unique<ins::TaylorHood>(c.mesh);
  ins::InsParams p;
  p.nu = 2.0;
  c.fom = std::make_unique<FomContext>(*c.th, ins::build_lifting(*c.th, c.domain, {1.0, 0.0}), p);
  return c;
}

}  // namespace

TEST_CASE("parameter samplers") {
  const auto eq = equispaced({1.0, 2.0, 5});
  CHECK(eq == std::vector<double>{1.0, 1.25, 1.5, 1.75, 2.0});
  const auto r1 = random_samples({1.0, 2.0, 20}, 7, eq);
  const auto r2 = random_samples({1.0, 2.0, 20}, 7, eq);
  CHECK(r1 == r2);
  CHECK(r1.size() == 20);
  CHECK(std::is_sorted(r1.begin(), r1.end()));
  for (double m : r1) {
    CHECK(m >= 1.0);
    CHECK(m < 2.0);
    CHECK(std::find(eq.begin(), eq.end(), m) == eq.end());
  }
  CHECK(random_samples({1.0, 2.0, 20}, 8) != r1);
  CHECK_THROWS_AS(equispaced({1.0, 2.0, 1}), Error);
  CHECK_THROWS_AS(equispaced({2.0, 1.0, 5}), Error);
}

TEST_CASE("POD spectra") {
  SUBCASE("two identical snapshots are rank one") {
    Matrix s(30, 2);
    s.col(0) = random_matrix(30, 1, 1);
    s.col(1) = s.col(0);
    const ReducedBasis b = pod(s, 1, nullptr);
    CHECK(b.eigenvalues[0] == 1.0);
    CHECK(b.eigenvalues[1] <= 1e-14);
    CHECK_THROWS_AS(pod(s, 2, nullptr), Error);
  }
  SUBCASE("identity snapshots") {
    const Matrix s = Matrix::Identity(12, 5);
    const ReducedBasis b = pod(s, 5, nullptr);
    for (double l : b.eigenvalues) CHECK(l == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((b.V.transpose() * b.V - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("random rank 5 against a dense SVD oracle") {
    const Matrix s = random_matrix(60, 5, 2) * random_matrix(5, 20, 3);
    const ReducedBasis b = pod(s, 5, nullptr);
    int above = 0;
    for (double l : b.eigenvalues) above += l > 1e-12;
    CHECK(above == 5);
    const Eigen::JacobiSVD<Matrix> svd(s);
    const double s0 = svd.singularValues()[0];
    for (int k = 0; k < 5; ++k) {
      CHECK(b.eigenvalues[k] == doctest::Approx(std::pow(svd.singularValues()[k] / s0, 2)).epsilon(1e-10));
    }
    for (std::size_t k = 1; k < b.eigenvalues.size(); ++k) CHECK(b.eigenvalues[k] <= b.eigenvalues[k - 1]);
  }
  SUBCASE("mass-weighted spectrum against a Cholesky factor") {
    const int n = 40;
    const SparseMatrix M = spd(n);
    const Matrix s = random_matrix(n, 8, 4);
    const ReducedBasis b = pod(s, 6, &M);
    // <x, y>_M = (L^T x) . (L^T y), so the spectrum is that of L^T S.
    const Matrix Md = Matrix(M);
    const Eigen::LLT<Matrix> llt(Md);
    const Matrix LtS = llt.matrixU() * s;
    const Eigen::JacobiSVD<Matrix> svd(LtS);
    const double s0 = svd.singularValues()[0];
    CHECK(b.lambda_1 == doctest::Approx(s0 * s0).epsilon(1e-10));
    for (int k = 0; k < 8; ++k) {
      CHECK(b.eigenvalues[k] == doctest::Approx(std::pow(svd.singularValues()[k] / s0, 2)).epsilon(1e-9));
    }
    CHECK((b.V.transpose() * M * b.V - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-10);
    // Modes lie in the snapshot span.
    const Matrix proj = s * s.completeOrthogonalDecomposition().solve(b.V);
    CHECK((proj - b.V).cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK_THROWS_AS(pod(Matrix::Zero(5, 3), 1, nullptr), Error);
  CHECK_THROWS_AS(pod(Matrix::Identity(5, 3), 4, nullptr), Error);
}

TEST_CASE("DEIM") {
  SUBCASE("single mode picks its largest entry") {
    Matrix s = Matrix::Zero(8, 1);
    s(3, 0) = 2.0;
    const DeimData d = deim(s, 1);
    REQUIRE(d.indices.size() == 1);
    CHECK(d.indices[0] == 3);
  }
  SUBCASE("exact on the span and bounded outside") {
    const Matrix s = random_matrix(200, 12, 5);
    const DeimData d = deim(s, 8);
    std::vector<int> idx = d.indices;
    std::sort(idx.begin(), idx.end());
    CHECK(std::adjacent_find(idx.begin(), idx.end()) == idx.end());
    CHECK((d.U.transpose() * d.U - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-12);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n(0, 1);
    for (int t = 0; t < 20; ++t) {
      Vector c(8);
      for (auto& x : c) x = n(rng);
      const Vector f = d.U * c;
      CHECK((d.interpolate(f) - f).norm() <= 1e-10 * f.norm());
    }
    // Oracle: orthogonal projection through the pseudo-inverse of U.
    const Matrix pinv = d.U.completeOrthogonalDecomposition().pseudoInverse();
    for (int t = 0; t < 20; ++t) {
      const Vector f = random_matrix(200, 1, 100 + t);
      const double proj_err = (f - d.U * (pinv * f)).norm();
      CHECK((f - d.interpolate(f)).norm() <= d.condition * proj_err * (1 + 1e-10));
    }
    const Eigen::JacobiSVD<Matrix> svd(Matrix(d.U(d.indices, Eigen::all)));
    CHECK(d.condition == doctest::Approx(1.0 / svd.singularValues()[7]).epsilon(1e-10));
  }
  CHECK_THROWS_AS(deim(Matrix::Identity(5, 2), 3), Error);
}

TEST_CASE("projected operators and the reduced solve") {
  RomCase c = small_case();
  const FomContext& fom = *c.fom;
  const auto mus = equispaced({0.5, 2.0, 6});
  const SnapshotSet snaps = collect_snapshots(fom, mus);
  REQUIRE(snaps.mu.size() == 6);
  CHECK(snaps.failed.empty());
  // Homogenized snapshots vanish on Dirichlet dofs.
  for (Eigen::Index i = 0; i < snaps.velocity.rows(); ++i) {
    if (fom.constrained(static_cast<int>(i))) CHECK(snaps.velocity.row(i).cwiseAbs().maxCoeff() <= 1e-12);
  }

  const ReducedBasis basis = pod(snaps.velocity, 6, &fom.mass());
  const DeimData d = deim(snaps.nonlinearity, 6);
  RomOperators ops = project_operators(fom, basis, d);
  ops.mu_min = 0.5;
  ops.mu_max = 2.0;

  CHECK((basis.V.transpose() * fom.mass() * basis.V - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((ops.A - ops.A.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * ops.A.cwiseAbs().maxCoeff());

  SUBCASE("reduced residual matches the FOM-side DEIM residual") {
    const double mu = snaps.mu[2];
    const Vector u_hat = basis.V.transpose() * (fom.mass() * snaps.velocity.col(2));
    const Vector u = mu * fom.lifting().velocity + basis.V * u_hat;
    const Vector fom_side =
        basis.V.transpose() * (fom.viscous() * u + d.interpolate(fom.nonlinearity(u)));
    const Vector reduced = rom_residual(ops, mu, u_hat);
    CHECK((reduced - fom_side).norm() <= 1e-8 * (fom.viscous() * u).norm());
    // Jacobian against central differences of the quadratic residual.
    const Matrix J = rom_jacobian(ops, mu, u_hat);
    for (int k = 0; k < 6; ++k) {
      Vector e = Vector::Zero(6);
      e[k] = 1e-4;
      const Vector fd = (rom_residual(ops, mu, u_hat + e) - rom_residual(ops, mu, u_hat - e)) / 2e-4;
      CHECK((fd - J.col(k)).norm() <= 1e-8 * (1 + J.col(k).norm()));
    }
  }

  SUBCASE("null and exact-subspace solutions") {
    const RomSolution zero = solve_rom(0.0, ops);
    CHECK(zero.u_hat.cwiseAbs().maxCoeff() == 0.0);
    // N_r and N_m equal the snapshot rank: training solutions are recovered.
    for (std::size_t i = 0; i < snaps.mu.size(); ++i) {
      const double mu = snaps.mu[i];
      const Vector u_fom = snaps.velocity.col(static_cast<Eigen::Index>(i)) + mu * fom.lifting().velocity;
      const Vector u_rom = solve_rom(mu, ops).reconstruct(ops);
      CHECK(fom.norm(u_fom - u_rom) / fom.norm(u_fom) <= 1e-8);
    }
    CHECK(solve_rom(3.0, ops).extrapolated);
    CHECK_FALSE(solve_rom(1.0, ops).extrapolated);
  }

  SUBCASE("truncation and benchmark bookkeeping") {
    const RomOperators t = ops.truncated(3);
    CHECK(t.n_r() == 3);
    CHECK(t.H[0].rows() == 4);
    CHECK((t.A - ops.A.topLeftCorner(3, 3)).norm() == 0.0);
    CHECK_THROWS_AS(ops.truncated(7), Error);
    const RomBenchmark bm = benchmark(fom, ops, {0.8, 1.7}, {2, 6}, 1);
    CHECK(bm.rows.size() == 4);
    CHECK(bm.max_error(6) <= bm.max_error(2));
    for (const auto& r : bm.rows) {
      CHECK(r.t_fom_s > 0);
      CHECK(r.t_rom_s > 0);
      CHECK(r.error_rel >= 0);
    }
  }

  SUBCASE("artifact round trip") {
    const std::string path = (std::filesystem::temp_directory_path() / "urbanflow_rom_test.bin").string();
    RomArtifact a;
    a.mesh_hash = c.mesh.content_hash();
    a.ops = ops;
    a.deim_indices = d.indices;
    a.deim_basis = d.U;
    a.eigenvalues = basis.eigenvalues;
    a.training_mu = snaps.mu;
    save_artifact(path, a);
    const RomArtifact b = load_artifact(path, a.mesh_hash);
    CHECK(b.ops.A == a.ops.A);
    CHECK(b.ops.V == a.ops.V);
    CHECK(b.ops.H.size() == a.ops.H.size());
    CHECK(b.ops.H.back() == a.ops.H.back());
    CHECK(b.deim_indices == a.deim_indices);
    CHECK(b.training_mu == a.training_mu);
    CHECK(b.ops.mu_max == 2.0);
    CHECK(solve_rom(1.1, b.ops).u_hat == solve_rom(1.1, a.ops).u_hat);
    CHECK_THROWS_AS(load_artifact(path, a.mesh_hash ^ 1), Error);
    std::filesystem::resize_file(path, std::filesystem::file_size(path) / 2);
    CHECK_THROWS_AS(load_artifact(path), Error);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_artifact(path), Error);
  }
}

TEST_CASE("snapshot collection edge cases") {
  RomCase c = small_case();
  CHECK_THROWS_AS(collect_snapshots(*c.fom, {1.0}), Error);
  const SnapshotSet s = collect_snapshots(*c.fom, {1.0, 0.5, 1.0});
  CHECK(s.mu == std::vector<double>{0.5, 1.0});
  CHECK(s.warnings.size() == 1);
}
