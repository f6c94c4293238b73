#include "urbanflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <unordered_map>

#include "urbanflow/error.hpp"
#include "urbanflow/hash.hpp"

namespace urbanflow {

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace urbanflow

namespace urbanflow::mesh {

namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

}  // namespace

const char* tag_name(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::Untagged: return "untagged";
    case BoundaryTag::Inflow: return "inflow";
    case BoundaryTag::Outflow: return "outflow";
    case BoundaryTag::NoSlipWall: return "noslip_wall";
    case BoundaryTag::BuildingWall: return "building_wall";
  }
  return "?";
}

// --- TriMesh ----------------------------------------------------------------

TriMesh::TriMesh(std::vector<Point> vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  build_topology();
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      if (edge_mult_[tri_edges_[t][k]] == 1) {
        boundary_.push_back({{triangles_[t][(k + 1) % 3], triangles_[t][(k + 2) % 3]},
                             BoundaryTag::Untagged});
      }
    }
  }
}

TriMesh::TriMesh(std::vector<Point> vertices, std::vector<Triangle> triangles,
                 std::vector<BoundaryEdge> boundary)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      boundary_(std::move(boundary)) {
  build_topology();
  std::unordered_map<std::uint64_t, int> lookup;
  for (std::size_t e = 0; e < edges_.size(); ++e) lookup.emplace(edge_key(edges_[e][0], edges_[e][1]), static_cast<int>(e));
  std::size_t topological = 0;
  for (int m : edge_mult_) topological += (m == 1);
  if (topological != boundary_.size()) {
    throw Error(ErrorKind::Topology, "boundary edge list does not match mesh boundary");
  }
  for (const BoundaryEdge& be : boundary_) {
    auto it = lookup.find(edge_key(be.v[0], be.v[1]));
    if (it == lookup.end() || edge_mult_[it->second] != 1) {
      throw Error(ErrorKind::Topology, "boundary edge is not on the mesh boundary");
    }
  }
}

void TriMesh::build_topology() {
  const int nv = static_cast<int>(vertices_.size());
  std::unordered_map<std::uint64_t, int> lookup;
  lookup.reserve(triangles_.size() * 2);
  tri_edges_.resize(triangles_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const Triangle& tri = triangles_[t];
    for (int v : tri) {
      if (v < 0 || v >= nv) throw Error(ErrorKind::Topology, "triangle references a missing vertex");
    }
    if (triangle_area(t) <= 0.0) {
      throw Error(ErrorKind::Topology, "triangle " + std::to_string(t) + " has non-positive area");
    }
    for (int k = 0; k < 3; ++k) {
      const int a = tri[(k + 1) % 3];
      const int b = tri[(k + 2) % 3];
      auto [it, inserted] = lookup.emplace(edge_key(a, b), static_cast<int>(edges_.size()));
      if (inserted) {
        edges_.push_back({std::min(a, b), std::max(a, b)});
        edge_mult_.push_back(0);
      }
      tri_edges_[t][k] = it->second;
      if (++edge_mult_[it->second] > 2) {
        throw Error(ErrorKind::Topology, "edge shared by more than two triangles");
      }
    }
  }
}

double TriMesh::triangle_area(std::size_t t) const {
  const Triangle& tri = triangles_[t];
  return 0.5 * cross(vertices_[tri[1]] - vertices_[tri[0]], vertices_[tri[2]] - vertices_[tri[0]]);
}

double TriMesh::total_area() const {
  double sum = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) sum += triangle_area(t);
  return sum;
}

Point TriMesh::centroid(std::size_t t) const {
  const Triangle& tri = triangles_[t];
  const Point s = vertices_[tri[0]] + vertices_[tri[1]] + vertices_[tri[2]];
  return (1.0 / 3.0) * s;
}

TriMesh TriMesh::with_tags(const std::vector<BoundaryTag>& tags) const {
  if (tags.size() != boundary_.size()) {
    throw Error(ErrorKind::Internal, "tag count does not match boundary edge count");
  }
  TriMesh out = *this;
  for (std::size_t i = 0; i < tags.size(); ++i) out.boundary_[i].tag = tags[i];
  return out;
}

std::uint64_t TriMesh::content_hash() const {
  Fnv1a h;
  h.update_value(static_cast<std::uint64_t>(vertices_.size()));
  for (const Point& p : vertices_) {
    h.update_value(p.x);
    h.update_value(p.y);
  }
  h.update_value(static_cast<std::uint64_t>(triangles_.size()));
  for (const Triangle& t : triangles_) h.update_value(t);
  for (const BoundaryEdge& e : boundary_) {
    h.update_value(e.v);
    h.update_value(static_cast<int>(e.tag));
  }
  return h.digest();
}

// --- Size field ---------------------------------------------------------------

void SizeField::validate() const {
  if (!(lc_building > 0.0 && lc_building <= lc_gap && lc_gap <= lc_far)) {
    throw Error(ErrorKind::Config, "size field requires 0 < lc_building <= lc_gap <= lc_far");
  }
  if (!(gap_distance >= 0.0)) throw Error(ErrorKind::Config, "gap_distance must be >= 0");
}

SizeFunction::SizeFunction(const SizeField& field, const geo::BuildingSet& buildings)
    : field_(field) {
  field_.validate();
  for (const geo::GeoPolygon& poly : buildings.polygons) {
    const std::size_t n = poly.ring.size();
    for (std::size_t i = 0; i < n; ++i) walls_.push_back({poly.ring[i], poly.ring[(i + 1) % n]});
  }
}

double SizeFunction::distance_to_buildings(Point p) const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& w : walls_) d = std::min(d, point_segment_distance(p, w[0], w[1]));
  return d;
}

double SizeFunction::operator()(Point p) const {
  if (walls_.empty()) return field_.lc_far;
  const double d = distance_to_buildings(p);
  if (d <= field_.gap_distance) {
    if (field_.gap_distance <= 0.0) return field_.lc_building;
    return field_.lc_building + (field_.lc_gap - field_.lc_building) * d / field_.gap_distance;
  }
  const double transition = std::max(field_.gap_distance, field_.lc_far);
  const double t = std::min((d - field_.gap_distance) / transition, 1.0);
  return field_.lc_gap + (field_.lc_far - field_.lc_gap) * t;
}

// --- Tagging ------------------------------------------------------------------

TriMesh tag_boundaries(const TriMesh& mesh, const geo::DomainSpec& domain,
                       const geo::BuildingSet* buildings) {
  const Box& b = domain.bounds;
  const double tol = 1e-9 * std::hypot(b.width(), b.height());
  const auto& verts = mesh.vertices();

  auto side_of = [&](Point p, Point q) -> std::optional<geo::Side> {
    if (std::fabs(p.y - b.ymin) <= tol && std::fabs(q.y - b.ymin) <= tol) return geo::Side::Bottom;
    if (std::fabs(p.x - b.xmax) <= tol && std::fabs(q.x - b.xmax) <= tol) return geo::Side::Right;
    if (std::fabs(p.y - b.ymax) <= tol && std::fabs(q.y - b.ymax) <= tol) return geo::Side::Top;
    if (std::fabs(p.x - b.xmin) <= tol && std::fabs(q.x - b.xmin) <= tol) return geo::Side::Left;
    return std::nullopt;
  };
  auto on_perimeter = [&](Point p, Point q) {
    for (const geo::GeoPolygon& poly : buildings->polygons) {
      const std::size_t n = poly.ring.size();
      for (std::size_t i = 0; i < n; ++i) {
        const Point a = poly.ring[i], c = poly.ring[(i + 1) % n];
        if (point_segment_distance(p, a, c) <= tol && point_segment_distance(q, a, c) <= tol) return true;
      }
    }
    return false;
  };

  std::vector<BoundaryTag> tags;
  tags.reserve(mesh.boundary_edges().size());
  for (const BoundaryEdge& e : mesh.boundary_edges()) {
    const Point p = verts[e.v[0]], q = verts[e.v[1]];
    if (auto side = side_of(p, q)) {
      if (*side == domain.inflow) {
        tags.push_back(BoundaryTag::Inflow);
      } else if (*side == domain.outflow) {
        tags.push_back(BoundaryTag::Outflow);
      } else {
        tags.push_back(BoundaryTag::NoSlipWall);
      }
      continue;
    }
    if (buildings != nullptr && !on_perimeter(p, q)) {
      throw Error(ErrorKind::Topology,
                  "boundary edge (" + std::to_string(e.v[0]) + ", " + std::to_string(e.v[1]) +
                      ") lies on no domain side and no building perimeter");
    }
    tags.push_back(BoundaryTag::BuildingWall);
  }
  return mesh.with_tags(tags);
}

// --- Quality ------------------------------------------------------------------

double circumradius(Point a, Point b, Point c) {
  const double la = distance(b, c), lb = distance(a, c), lc = distance(a, b);
  const double area2 = std::fabs(cross(b - a, c - a));
  return la * lb * lc / (2.0 * area2);
}

std::array<double, 3> triangle_angles(const TriMesh& mesh, std::size_t t) {
  const Triangle& tri = mesh.triangles()[t];
  std::array<double, 3> out{};
  for (int k = 0; k < 3; ++k) {
    const Point p = mesh.vertices()[tri[k]];
    const Point u = mesh.vertices()[tri[(k + 1) % 3]] - p;
    const Point v = mesh.vertices()[tri[(k + 2) % 3]] - p;
    out[k] = std::atan2(std::fabs(cross(u, v)), dot(u, v)) * 180.0 / std::numbers::pi;
  }
  return out;
}

QualityReport mesh_quality(const TriMesh& mesh) {
  QualityReport r;
  r.triangle_count = mesh.triangle_count();
  r.vertex_count = mesh.vertex_count();
  r.min_angle_deg = mesh.triangle_count() ? 180.0 : 0.0;
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto angles = triangle_angles(mesh, t);
    r.min_angle_deg = std::min({r.min_angle_deg, angles[0], angles[1], angles[2]});
    const Triangle& tri = mesh.triangles()[t];
    const Point a = mesh.vertices()[tri[0]], b = mesh.vertices()[tri[1]], c = mesh.vertices()[tri[2]];
    const double shortest = std::min({distance(a, b), distance(b, c), distance(c, a)});
    r.max_circumradius_ratio = std::max(r.max_circumradius_ratio, circumradius(a, b, c) / shortest);
  }
  return r;
}

// --- Structured meshes ----------------------------------------------------------

TriMesh structured_rectangle(const Box& box, int nx, int ny) {
  if (nx < 1 || ny < 1) throw Error(ErrorKind::Config, "structured mesh needs nx, ny >= 1");
  std::vector<Point> verts;
  verts.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      // Exact endpoints keep boundary vertices on the box sides.
      const double x = i == nx ? box.xmax : box.xmin + box.width() * i / nx;
      const double y = j == ny ? box.ymax : box.ymin + box.height() * j / ny;
      verts.push_back({x, y});
    }
  }
  std::vector<Triangle> tris;
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return TriMesh(std::move(verts), std::move(tris));
}

// --- Point location ---------------------------------------------------------------

PointLocator::PointLocator(const TriMesh& mesh) : mesh_(&mesh) {
  const auto& verts = mesh.vertices();
  box_ = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Point& p : verts) {
    box_.xmin = std::min(box_.xmin, p.x);
    box_.ymin = std::min(box_.ymin, p.y);
    box_.xmax = std::max(box_.xmax, p.x);
    box_.ymax = std::max(box_.ymax, p.y);
  }
  const double n = std::max<double>(1.0, static_cast<double>(mesh.triangle_count()));
  const double aspect = box_.height() > 0 ? box_.width() / box_.height() : 1.0;
  nx_ = std::max(1, static_cast<int>(std::sqrt(n * aspect)));
  ny_ = std::max(1, static_cast<int>(n / nx_));
  buckets_.resize(static_cast<std::size_t>(nx_ * ny_));
  const double sx = nx_ / std::max(box_.width(), 1e-300);
  const double sy = ny_ / std::max(box_.height(), 1e-300);
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const Triangle& tri = mesh.triangles()[t];
    double x0 = verts[tri[0]].x, x1 = x0, y0 = verts[tri[0]].y, y1 = y0;
    for (int k = 1; k < 3; ++k) {
      x0 = std::min(x0, verts[tri[k]].x);
      x1 = std::max(x1, verts[tri[k]].x);
      y0 = std::min(y0, verts[tri[k]].y);
      y1 = std::max(y1, verts[tri[k]].y);
    }
    const int i0 = std::clamp(static_cast<int>((x0 - box_.xmin) * sx), 0, nx_ - 1);
    const int i1 = std::clamp(static_cast<int>((x1 - box_.xmin) * sx), 0, nx_ - 1);
    const int j0 = std::clamp(static_cast<int>((y0 - box_.ymin) * sy), 0, ny_ - 1);
    const int j1 = std::clamp(static_cast<int>((y1 - box_.ymin) * sy), 0, ny_ - 1);
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j * nx_ + i)].push_back(t);
    }
  }
}

std::optional<PointLocator::Hit> PointLocator::locate(Point p) const {
  if (p.x < box_.xmin || p.x > box_.xmax || p.y < box_.ymin || p.y > box_.ymax) return std::nullopt;
  const int i = std::clamp(static_cast<int>((p.x - box_.xmin) / box_.width() * nx_), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>((p.y - box_.ymin) / box_.height() * ny_), 0, ny_ - 1);
  const auto& verts = mesh_->vertices();
  constexpr double kTol = 1e-12;
  for (std::size_t t : buckets_[static_cast<std::size_t>(j * nx_ + i)]) {
    const Triangle& tri = mesh_->triangles()[t];
    const Point a = verts[tri[0]], b = verts[tri[1]], c = verts[tri[2]];
    const double area2 = cross(b - a, c - a);
    const double l0 = cross(b - p, c - p) / area2;
    const double l1 = cross(c - p, a - p) / area2;
    const double l2 = 1.0 - l0 - l1;
    if (l0 >= -kTol && l1 >= -kTol && l2 >= -kTol) return Hit{t, {l0, l1, l2}};
  }
  return std::nullopt;
}

}  // namespace urbanflow::mesh
