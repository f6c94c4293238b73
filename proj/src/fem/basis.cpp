#include <cmath>

#include "urbanflow/error.hpp"
#include "urbanflow/fem.hpp"

namespace urbanflow::fem {

namespace {

std::vector<QuadPoint> make_rule(int degree) {
  std::vector<QuadPoint> out;
  auto orbit3 = [&](double a, double w) {
    const double b = 1.0 - 2.0 * a;
    out.push_back({{a, a, b}, w});
    out.push_back({{a, b, a}, w});
    out.push_back({{b, a, a}, w});
  };
  auto orbit6 = [&](double a, double b, double w) {
    const double c = 1.0 - a - b;
    out.push_back({{a, b, c}, w});
    out.push_back({{b, a, c}, w});
    out.push_back({{a, c, b}, w});
    out.push_back({{c, a, b}, w});
    out.push_back({{b, c, a}, w});
    out.push_back({{c, b, a}, w});
  };
  switch (degree) {
    case 1:
      out.push_back({{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 1.0});
      break;
    case 2:
      orbit3(1.0 / 6.0, 1.0 / 3.0);
      break;
    case 4:
      // Dunavant, 6 points.
      orbit3(0.44594849091596488632, 0.22338158967801146570);
      orbit3(0.09157621350977074346, 0.10995174365532186764);
      break;
    case 6:
      // Dunavant, 12 points.
      orbit3(0.24928674517091042129, 0.11678627572637936603);
      orbit3(0.06308901449150222834, 0.05084490637020681692);
      orbit6(0.05314504984481694735, 0.31035245103378440542, 0.08285107561837357519);
      break;
    default:
      throw Error(ErrorKind::Internal, "unsupported quadrature degree " + std::to_string(degree));
  }
  return out;
}

}  // namespace

std::span<const QuadPoint> triangle_rule(int degree) {
  static const std::vector<QuadPoint> r1 = make_rule(1), r2 = make_rule(2), r4 = make_rule(4),
                                      r6 = make_rule(6);
  switch (degree) {
    case 1: return r1;
    case 2: return r2;
    case 4: return r4;
    case 6: return r6;
    default: return make_rule(degree);  // throws
  }
}

std::array<Point, 3> barycentric_gradients(Point a, Point b, Point c) {
  const double area2 = cross(b - a, c - a);
  const std::array<Point, 3> p = {a, b, c};
  std::array<Point, 3> out{};
  for (int i = 0; i < 3; ++i) {
    const Point& q = p[(i + 1) % 3];
    const Point& r = p[(i + 2) % 3];
    out[i] = {(q.y - r.y) / area2, (r.x - q.x) / area2};
  }
  return out;
}

std::array<double, 6> p2_values(const std::array<double, 3>& l) {
  return {l[0] * (2 * l[0] - 1), l[1] * (2 * l[1] - 1), l[2] * (2 * l[2] - 1),
          4 * l[1] * l[2],       4 * l[2] * l[0],       4 * l[0] * l[1]};
}

std::array<Point, 6> p2_gradients(const std::array<double, 3>& l, const std::array<Point, 3>& dl) {
  std::array<Point, 6> g{};
  for (int k = 0; k < 3; ++k) {
    g[k] = (4 * l[k] - 1) * dl[k];
    const int i = (k + 1) % 3, j = (k + 2) % 3;
    g[3 + k] = 4.0 * (l[i] * dl[j] + l[j] * dl[i]);
  }
  return g;
}

// --- DofMap -------------------------------------------------------------------

DofMap::DofMap(const mesh::TriMesh& mesh, SpaceKind kind)
    : mesh_(&mesh), mesh_hash_(mesh.content_hash()), kind_(kind) {
  if (mesh.triangle_count() == 0) throw Error(ErrorKind::Topology, "cannot build a space on an empty mesh");
  const std::size_t nv = mesh.vertex_count();
  const bool p2 = degree() == 2;
  node_count_ = nv + (p2 ? mesh.edges().size() : 0);
  node_points_ = mesh.vertices();
  if (p2) {
    for (const auto& e : mesh.edges()) {
      node_points_.push_back(0.5 * (mesh.vertices()[e[0]] + mesh.vertices()[e[1]]));
    }
  }
  const auto npe = static_cast<std::size_t>(nodes_per_element());
  element_nodes_.reserve(mesh.triangle_count() * npe);
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    for (int v : mesh.triangles()[t]) element_nodes_.push_back(v);
    if (p2) {
      for (int e : mesh.triangle_edges(t)) element_nodes_.push_back(static_cast<int>(nv) + e);
    }
  }

  std::map<std::pair<int, int>, int> edge_index;
  if (p2) {
    for (std::size_t e = 0; e < mesh.edges().size(); ++e) {
      edge_index[{mesh.edges()[e][0], mesh.edges()[e][1]}] = static_cast<int>(e);
    }
  }
  for (const mesh::BoundaryEdge& be : mesh.boundary_edges()) {
    auto& nodes = boundary_nodes_[be.tag];
    nodes.push_back(be.v[0]);
    nodes.push_back(be.v[1]);
    if (p2) {
      const auto it = edge_index.find({std::min(be.v[0], be.v[1]), std::max(be.v[0], be.v[1])});
      if (it == edge_index.end()) throw Error(ErrorKind::Topology, "boundary edge missing from mesh");
      nodes.push_back(static_cast<int>(nv) + it->second);
    }
  }
  for (auto& [tag, nodes] : boundary_nodes_) {
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  }
}

const std::vector<int>& DofMap::boundary_nodes(mesh::BoundaryTag tag) const {
  static const std::vector<int> empty;
  const auto it = boundary_nodes_.find(tag);
  return it == boundary_nodes_.end() ? empty : it->second;
}

std::vector<int> DofMap::boundary_dofs(mesh::BoundaryTag tag) const {
  std::vector<int> out;
  for (int c = 0; c < components(); ++c) {
    for (int n : boundary_nodes(tag)) out.push_back(dof(n, c));
  }
  std::sort(out.begin(), out.end());
  return out;
}

DofMap build_space(const mesh::TriMesh& mesh, SpaceKind kind) { return DofMap(mesh, kind); }

// --- Evaluation -----------------------------------------------------------------

double evaluate(const DofMap& space, const Vector& values, std::size_t t,
                const std::array<double, 3>& l, int comp) {
  const auto nodes = space.element_nodes(t);
  double s = 0.0;
  if (space.degree() == 1) {
    for (int k = 0; k < 3; ++k) s += l[k] * values[space.dof(nodes[k], comp)];
  } else {
    const auto phi = p2_values(l);
    for (int k = 0; k < 6; ++k) s += phi[k] * values[space.dof(nodes[k], comp)];
  }
  return s;
}

std::optional<Point> evaluate_vector(const DofMap& space, const Vector& values,
                                     const mesh::PointLocator& locator, Point p) {
  const auto hit = locator.locate(p);
  if (!hit) return std::nullopt;
  return Point{evaluate(space, values, hit->triangle, hit->barycentric, 0),
               evaluate(space, values, hit->triangle, hit->barycentric, 1)};
}

std::optional<double> evaluate_scalar(const DofMap& space, const Vector& values,
                                      const mesh::PointLocator& locator, Point p) {
  const auto hit = locator.locate(p);
  if (!hit) return std::nullopt;
  return evaluate(space, values, hit->triangle, hit->barycentric, 0);
}

double boundary_flux(const DofMap& space, const Vector& u) {
  if (space.kind() != SpaceKind::VelocityP2Vector) {
    throw Error(ErrorKind::Internal, "boundary_flux needs a P2 vector field");
  }
  const mesh::TriMesh& m = space.mesh();
  std::map<std::pair<int, int>, int> edge_index;
  for (std::size_t e = 0; e < m.edges().size(); ++e) {
    edge_index[{m.edges()[e][0], m.edges()[e][1]}] = static_cast<int>(e);
  }
  const int nv = static_cast<int>(m.vertex_count());
  double flux = 0.0;
  for (const mesh::BoundaryEdge& be : m.boundary_edges()) {
    const Point p = m.vertices()[be.v[0]], q = m.vertices()[be.v[1]];
    const Point d = q - p;
    const Point n{d.y, -d.x};  // outward normal scaled by the edge length
    const int mid = nv + edge_index.at({std::min(be.v[0], be.v[1]), std::max(be.v[0], be.v[1])});
    auto un = [&](int node) { return u[space.dof(node, 0)] * n.x + u[space.dof(node, 1)] * n.y; };
    // Simpson's rule is exact for the quadratic trace.
    flux += (un(be.v[0]) + 4.0 * un(mid) + un(be.v[1])) / 6.0;
  }
  return flux;
}

double integral(const DofMap& space, const Vector& values) {
  const mesh::TriMesh& m = space.mesh();
  const auto rule = triangle_rule(space.degree() == 2 ? 2 : 1);
  double s = 0.0;
  for (std::size_t t = 0; t < m.triangle_count(); ++t) {
    for (const QuadPoint& q : rule) s += q.weight * m.triangle_area(t) * evaluate(space, values, t, q.bary, 0);
  }
  return s;
}

double supg_tau(double h, double speed, double k, double dt) {
  const double a = 2.0 / dt;
  const double b = 2.0 * speed / h;
  const double c = 4.0 * k / (h * h);
  return 1.0 / std::sqrt(a * a + b * b + c * c);
}

double streamline_length(Point a, Point b, Point c, Point u) {
  const double speed = norm(u);
  if (speed < 1e-12) return 2.0 * mesh::circumradius(a, b, c);
  const auto dl = barycentric_gradients(a, b, c);
  double s = 0.0;
  for (const Point& g : dl) s += std::fabs(dot(u, g));
  return 2.0 * speed / s;
}

}  // namespace urbanflow::fem
