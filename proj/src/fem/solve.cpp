#include <cmath>
#include <string>

#include <Eigen/SparseLU>

#include "urbanflow/error.hpp"
#include "urbanflow/fem.hpp"

namespace urbanflow::fem {

void DirichletConstraints::add(int dof, double value) {
  if (!std::isfinite(value)) throw Error(ErrorKind::Internal, "non-finite Dirichlet value");
  auto [it, inserted] = values_.emplace(dof, value);
  if (!inserted && std::fabs(it->second - value) > 1e-12) {
    throw Error(ErrorKind::Constraint, "conflicting Dirichlet values on dof " + std::to_string(dof) +
                                           ": " + std::to_string(it->second) + " vs " +
                                           std::to_string(value));
  }
}

void DirichletConstraints::set(int dof, double value) {
  if (!std::isfinite(value)) throw Error(ErrorKind::Internal, "non-finite Dirichlet value");
  values_[dof] = value;
}

void apply_dirichlet(SparseMatrix& A, Vector& b, const DirichletConstraints& constraints) {
  if (constraints.size() == 0) return;
  const Eigen::Index n = A.rows();
  if (A.cols() != n || b.size() != n) throw Error(ErrorKind::Internal, "apply_dirichlet needs a square system");
  std::vector<char> fixed(static_cast<std::size_t>(n), 0);
  Vector g = Vector::Zero(n);
  for (const auto& [dof, value] : constraints.values()) {
    if (dof < 0 || dof >= n) throw Error(ErrorKind::Internal, "Dirichlet dof out of range");
    fixed[static_cast<std::size_t>(dof)] = 1;
    g[dof] = value;
  }
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(A.nonZeros()));
  for (Eigen::Index r = 0; r < n; ++r) {
    if (fixed[static_cast<std::size_t>(r)]) {
      trip.emplace_back(r, r, 1.0);
      continue;
    }
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) {
      if (fixed[static_cast<std::size_t>(it.col())]) {
        b[r] -= it.value() * g[it.col()];
      } else {
        trip.emplace_back(r, it.col(), it.value());
      }
    }
  }
  for (const auto& [dof, value] : constraints.values()) b[dof] = value;
  SparseMatrix out(n, n);
  out.setFromTriplets(trip.begin(), trip.end());
  out.makeCompressed();
  A = std::move(out);
}

struct SparseLu::Impl {
  Eigen::SparseLU<Eigen::SparseMatrix<double, Eigen::ColMajor>, Eigen::COLAMDOrdering<int>> lu;
};

namespace {

long failing_column(const std::string& message, const Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int>& perm) {
  const std::string marker = "ZERO COLUMN AT ";
  const auto pos = message.find(marker);
  if (pos == std::string::npos) return -1;
  // Eigen reports the permuted column 1-based.
  const long permuted = std::stol(message.substr(pos + marker.size())) - 1;
  // Map the permuted column back to the caller's numbering.
  const auto& idx = perm.indices();
  for (Eigen::Index i = 0; i < idx.size(); ++i) {
    if (idx[i] == permuted) return static_cast<long>(i);
  }
  return permuted;
}

}  // namespace

SparseLu::SparseLu(const SparseMatrix& A) : impl_(std::make_unique<Impl>()) {
  if (A.rows() != A.cols()) throw Error(ErrorKind::Internal, "sparse solve needs a square matrix");
  Eigen::SparseMatrix<double, Eigen::ColMajor> C = A;
  C.makeCompressed();
  impl_->lu.analyzePattern(C);
  impl_->lu.factorize(C);
  if (impl_->lu.info() != Eigen::Success) {
    const std::string msg = impl_->lu.lastErrorMessage();
    const long pivot = failing_column(msg, impl_->lu.colsPermutation());
    throw SingularMatrixError("singular matrix (pivot " + std::to_string(pivot) + ")", pivot);
  }
}

SparseLu::~SparseLu() = default;
SparseLu::SparseLu(SparseLu&&) noexcept = default;
SparseLu& SparseLu::operator=(SparseLu&&) noexcept = default;

Vector SparseLu::solve(const Vector& b) const {
  Vector x = impl_->lu.solve(b);
  if (impl_->lu.info() != Eigen::Success || !x.allFinite()) {
    throw SingularMatrixError("sparse solve produced a non-finite result", -1);
  }
  return x;
}

Vector solve_sparse(const SparseMatrix& A, const Vector& b) {
  if (b.size() != A.rows()) throw Error(ErrorKind::Internal, "right-hand side size mismatch");
  return SparseLu(A).solve(b);
}

}  // namespace urbanflow::fem
