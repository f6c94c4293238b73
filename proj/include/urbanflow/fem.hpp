#pragma once

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <type_traits>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "urbanflow/mesh.hpp"

namespace urbanflow::fem {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// --- Quadrature -------------------------------------------------------------

struct QuadPoint {
  std::array<double, 3> bary;  ///< barycentric coordinates
  double weight;               ///< weights sum to 1; multiply by the area
};

/// Symmetric triangle rules, exact for polynomials up to `degree`
/// (supported: 1, 2, 4, 6).
std::span<const QuadPoint> triangle_rule(int degree);

// --- Reference basis --------------------------------------------------------

/// Gradients of the barycentric coordinates of triangle (a, b, c).
std::array<Point, 3> barycentric_gradients(Point a, Point b, Point c);

/// P2 node k < 3 is vertex k; node 3 + k is the midpoint of the edge
/// opposite vertex k.
std::array<double, 6> p2_values(const std::array<double, 3>& l);
std::array<Point, 6> p2_gradients(const std::array<double, 3>& l, const std::array<Point, 3>& dl);

// --- Spaces -----------------------------------------------------------------

enum class SpaceKind { VelocityP2Vector, PressureP1, ScalarP1 };

/// Degree-of-freedom numbering. Scalar nodes are the mesh vertices (P1) or
/// vertices followed by edges (P2), so P1 node v and P2 node v coincide.
/// Vector spaces are blocked by component: dof = comp * node_count + node.
class DofMap {
 public:
  DofMap(const mesh::TriMesh& mesh, SpaceKind kind);

  SpaceKind kind() const { return kind_; }
  const mesh::TriMesh& mesh() const { return *mesh_; }
  std::uint64_t mesh_hash() const { return mesh_hash_; }

  int degree() const { return kind_ == SpaceKind::VelocityP2Vector ? 2 : 1; }
  int components() const { return kind_ == SpaceKind::VelocityP2Vector ? 2 : 1; }
  int nodes_per_element() const { return degree() == 2 ? 6 : 3; }
  std::size_t node_count() const { return node_count_; }
  std::size_t size() const { return node_count_ * static_cast<std::size_t>(components()); }

  std::span<const int> element_nodes(std::size_t t) const {
    const auto n = static_cast<std::size_t>(nodes_per_element());
    return {element_nodes_.data() + t * n, n};
  }
  int dof(int node, int comp) const { return comp * static_cast<int>(node_count_) + node; }
  Point node_point(int node) const { return node_points_[static_cast<std::size_t>(node)]; }
  const std::vector<Point>& node_points() const { return node_points_; }

  /// Nodes on edges carrying `tag` (vertices shared by two tags appear in both).
  const std::vector<int>& boundary_nodes(mesh::BoundaryTag tag) const;
  /// All component dofs of boundary_nodes(tag), sorted.
  std::vector<int> boundary_dofs(mesh::BoundaryTag tag) const;

 private:
  const mesh::TriMesh* mesh_;
  std::uint64_t mesh_hash_;
  SpaceKind kind_;
  std::size_t node_count_ = 0;
  std::vector<int> element_nodes_;
  std::vector<Point> node_points_;
  std::map<mesh::BoundaryTag, std::vector<int>> boundary_nodes_;
};

DofMap build_space(const mesh::TriMesh& mesh, SpaceKind kind);

/// Coefficient vector on a DofMap.
struct Field {
  const DofMap* space = nullptr;
  Vector values;
};

/// Nodal interpolation of a scalar (components == 1) or vector function.
template <typename F>
Vector interpolate(const DofMap& space, F&& f) {
  Vector out(static_cast<Eigen::Index>(space.size()));
  for (std::size_t n = 0; n < space.node_count(); ++n) {
    const auto value = f(space.node_point(static_cast<int>(n)));
    if constexpr (std::is_arithmetic_v<std::decay_t<decltype(value)>>) {
      out[static_cast<Eigen::Index>(n)] = value;
    } else {
      out[space.dof(static_cast<int>(n), 0)] = value.x;
      out[space.dof(static_cast<int>(n), 1)] = value.y;
    }
  }
  return out;
}

/// Evaluates component `comp` of a field inside triangle t at barycentric l.
double evaluate(const DofMap& space, const Vector& values, std::size_t t,
                const std::array<double, 3>& l, int comp = 0);

/// Evaluates a field at an arbitrary point; nullopt outside the mesh.
std::optional<Point> evaluate_vector(const DofMap& space, const Vector& values,
                                     const mesh::PointLocator& locator, Point p);
std::optional<double> evaluate_scalar(const DofMap& space, const Vector& values,
                                      const mesh::PointLocator& locator, Point p);

// --- Forms ------------------------------------------------------------------

/// nu * (grad u, grad v), componentwise on vector spaces.
struct Viscous {
  double nu = 1.0;
};
/// -(q, div u): trial P2 vector, test P1 pressure.
struct Divergence {};
/// ((w . grad) u, v); with `newton` also ((u . grad) w, v), i.e. the
/// Jacobian of the convective term at w.
struct Convection {
  const Vector* w = nullptr;
  bool newton = false;
};
/// (u, v).
struct Mass {};

/// Coefficients of the implicit-Euler SUPG transport step.
struct AdCoefficients {
  double k = 0.0;
  double dt = 1.0;
  const DofMap* wind_space = nullptr;  ///< P2 vector space of the wind
  const Vector* wind = nullptr;
  /// Multiplies tau; 0 gives the plain Galerkin operators.
  double tau_scale = 1.0;
};
/// Mass + dt*advection + dt*diffusion + SUPG mass + dt*SUPG advection.
struct AdLhs {
  AdCoefficients c;
};
/// Mass + SUPG mass, applied to the previous step.
struct AdRhsOp {
  AdCoefficients c;
};

using Form = std::variant<Viscous, Divergence, Convection, Mass, AdLhs, AdRhsOp>;

/// Element-wise quadrature and scatter into a global matrix (rows = test
/// dofs, columns = trial dofs). Elements are visited in index order, so
/// identical inputs give bit-identical matrices.
SparseMatrix assemble(const Form& form, const DofMap& trial, const DofMap& test);

/// The convection residual vector N(u) = ((u . grad) u, v) for all test
/// functions v of the P2 vector space.
Vector convection_vector(const DofMap& space, const Vector& u);

/// (f, v) for a vector source f on the P2 vector space (degree-6 rule).
template <typename F>
Vector load_vector(const DofMap& space, F&& f);

/// L2 norm of (field - exact) over the mesh (degree-6 rule). `exact`
/// returns a Point on vector spaces and a double on scalar spaces.
template <typename F>
double l2_error(const DofMap& space, const Vector& values, F&& exact);

/// Integral of a scalar field.
double integral(const DofMap& space, const Vector& values);

/// Boundary integral of u . n over all boundary edges (outward normal),
/// for the discrete divergence theorem.
double boundary_flux(const DofMap& space, const Vector& u);

/// SUPG parameter: [(2/dt)^2 + (2|u|/h)^2 + (4k/h^2)^2]^(-1/2).
double supg_tau(double h, double speed, double k, double dt);

/// Element length in the direction of u: 2|u| / sum_a |u . grad N_a|, or the
/// circumdiameter when |u| < 1e-12.
double streamline_length(Point a, Point b, Point c, Point u);

// --- Dirichlet constraints and solving ---------------------------------------

class DirichletConstraints {
 public:
  /// Adds dof = value; a second add with a different value (beyond 1e-12)
  /// is a conflict.
  void add(int dof, double value);
  /// Adds or overrides.
  void set(int dof, double value);
  bool contains(int dof) const { return values_.count(dof) != 0; }
  std::size_t size() const { return values_.size(); }
  const std::map<int, double>& values() const { return values_; }

 private:
  std::map<int, double> values_;
};

/// Replaces constrained rows by identity rows and eliminates the constrained
/// columns, moving their contribution to the right-hand side.
void apply_dirichlet(SparseMatrix& A, Vector& b, const DirichletConstraints& constraints);

/// Sparse LU solve. Throws SingularMatrixError with the failing pivot.
Vector solve_sparse(const SparseMatrix& A, const Vector& b);

/// Reusable factorization for repeated solves with one matrix.
class SparseLu {
 public:
  explicit SparseLu(const SparseMatrix& A);
  ~SparseLu();
  SparseLu(SparseLu&&) noexcept;
  SparseLu& operator=(SparseLu&&) noexcept;
  Vector solve(const Vector& b) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// --- template implementations -------------------------------------------------

template <typename F>
Vector load_vector(const DofMap& space, F&& f) {
  const mesh::TriMesh& m = space.mesh();
  Vector out = Vector::Zero(static_cast<Eigen::Index>(space.size()));
  const auto rule = triangle_rule(6);
  for (std::size_t t = 0; t < m.triangle_count(); ++t) {
    const auto& tri = m.triangles()[t];
    const Point a = m.vertices()[tri[0]], b = m.vertices()[tri[1]], c = m.vertices()[tri[2]];
    const double area = m.triangle_area(t);
    const auto nodes = space.element_nodes(t);
    for (const QuadPoint& q : rule) {
      const Point x = q.bary[0] * a + q.bary[1] * b + q.bary[2] * c;
      const Point fx = f(x);
      const auto phi = p2_values(q.bary);
      for (int i = 0; i < 6; ++i) {
        out[space.dof(nodes[i], 0)] += q.weight * area * fx.x * phi[i];
        out[space.dof(nodes[i], 1)] += q.weight * area * fx.y * phi[i];
      }
    }
  }
  return out;
}

template <typename F>
double l2_error(const DofMap& space, const Vector& values, F&& exact) {
  const mesh::TriMesh& m = space.mesh();
  const auto rule = triangle_rule(6);
  double s = 0.0;
  for (std::size_t t = 0; t < m.triangle_count(); ++t) {
    const auto& tri = m.triangles()[t];
    const Point a = m.vertices()[tri[0]], b = m.vertices()[tri[1]], c = m.vertices()[tri[2]];
    const double area = m.triangle_area(t);
    for (const QuadPoint& q : rule) {
      const Point x = q.bary[0] * a + q.bary[1] * b + q.bary[2] * c;
      const auto e = exact(x);
      double d2 = 0.0;
      if constexpr (std::is_arithmetic_v<std::decay_t<decltype(e)>>) {
        const double d = evaluate(space, values, t, q.bary, 0) - e;
        d2 = d * d;
      } else {
        const double dx = evaluate(space, values, t, q.bary, 0) - e.x;
        const double dy = evaluate(space, values, t, q.bary, 1) - e.y;
        d2 = dx * dx + dy * dy;
      }
      s += q.weight * area * d2;
    }
  }
  return std::sqrt(s);
}

}  // namespace urbanflow::fem
