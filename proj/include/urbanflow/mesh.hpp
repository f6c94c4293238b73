#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "urbanflow/geo.hpp"
#include "urbanflow/geometry.hpp"

namespace urbanflow::mesh {

enum class BoundaryTag : int {
  Untagged = 0,
  Inflow = 1,
  Outflow = 2,
  NoSlipWall = 3,
  BuildingWall = 4,
};

inline constexpr std::array<BoundaryTag, 4> kAllTags = {
    BoundaryTag::Inflow, BoundaryTag::Outflow, BoundaryTag::NoSlipWall,
    BoundaryTag::BuildingWall};

const char* tag_name(BoundaryTag tag);

/// Boundary edge oriented with the domain on its left.
struct BoundaryEdge {
  std::array<int, 2> v{};
  BoundaryTag tag = BoundaryTag::Untagged;
  friend bool operator==(const BoundaryEdge&, const BoundaryEdge&) = default;
};

using Triangle = std::array<int, 3>;

/// Conforming triangle mesh. Immutable after construction; the constructor
/// derives the edge topology and rejects inverted triangles and
/// non-manifold edges.
class TriMesh {
 public:
  TriMesh() = default;
  /// Boundary edges are derived from the topology and left untagged.
  TriMesh(std::vector<Point> vertices, std::vector<Triangle> triangles);
  /// Boundary edges must match the topological boundary exactly.
  TriMesh(std::vector<Point> vertices, std::vector<Triangle> triangles,
          std::vector<BoundaryEdge> boundary);

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t triangle_count() const { return triangles_.size(); }

  /// Unique undirected edges, each stored with the smaller index first.
  const std::vector<std::array<int, 2>>& edges() const { return edges_; }
  /// Global edge index of the edge opposite local vertex k of triangle t.
  const std::array<int, 3>& triangle_edges(std::size_t t) const { return tri_edges_[t]; }
  /// Number of triangles sharing each edge (1 on the boundary, 2 inside).
  const std::vector<int>& edge_multiplicity() const { return edge_mult_; }

  double triangle_area(std::size_t t) const;
  double total_area() const;
  Point centroid(std::size_t t) const;

  /// Copy with boundary tags replaced, in boundary_edges() order.
  TriMesh with_tags(const std::vector<BoundaryTag>& tags) const;

  /// Stable content hash over vertices, triangles and tagged boundary.
  std::uint64_t content_hash() const;

 private:
  void build_topology();

  std::vector<Point> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<BoundaryEdge> boundary_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 3>> tri_edges_;
  std::vector<int> edge_mult_;
};

/// Three-tier target sizes (meters).
struct SizeField {
  double lc_building = 1.0;
  double lc_gap = 2.0;
  double lc_far = 8.0;
  double gap_distance = 10.0;

  void validate() const;
};

/// Evaluates the blended size field: lc_building on building walls, rising
/// linearly to lc_gap at gap_distance, then to lc_far over a further
/// max(gap_distance, lc_far). Without buildings the field is lc_far.
class SizeFunction {
 public:
  SizeFunction(const SizeField& field, const geo::BuildingSet& buildings);

  double operator()(Point p) const;
  double distance_to_buildings(Point p) const;

 private:
  SizeField field_;
  std::vector<std::array<Point, 2>> walls_;
};

struct TriangulateOptions {
  double min_angle_deg = 20.0;
  std::size_t max_triangles = 2'000'000;
};

/// Boundary-conforming constrained Delaunay mesh of the domain rectangle minus
/// the building footprints, refined (Ruppert-style, with a size field) until
/// every triangle has circumradius <= size(centroid) and minimum angle >=
/// min_angle_deg. Boundary edges are tagged via tag_boundaries.
TriMesh triangulate(const geo::DomainSpec& domain, const geo::BuildingSet& buildings,
                    const SizeField& size, const TriangulateOptions& options = {});

/// Tags each boundary edge by the rectangle side it lies on (inflow, outflow,
/// lateral no-slip); all other boundary edges become building walls. When
/// `buildings` is given, those edges must lie on a footprint perimeter.
TriMesh tag_boundaries(const TriMesh& mesh, const geo::DomainSpec& domain,
                       const geo::BuildingSet* buildings = nullptr);

struct QualityReport {
  double min_angle_deg = 0.0;
  double max_circumradius_ratio = 0.0;  ///< max over triangles of R / shortest edge
  std::size_t triangle_count = 0;
  std::size_t vertex_count = 0;
};

QualityReport mesh_quality(const TriMesh& mesh);

/// Angles (degrees) of triangle t.
std::array<double, 3> triangle_angles(const TriMesh& mesh, std::size_t t);
double circumradius(Point a, Point b, Point c);

/// nx-by-ny grid of the box, each cell split along its diagonal. Boundary
/// edges untagged.
TriMesh structured_rectangle(const Box& box, int nx, int ny);

/// Triangle lookup by point through a uniform bucket grid.
class PointLocator {
 public:
  explicit PointLocator(const TriMesh& mesh);

  struct Hit {
    std::size_t triangle;
    std::array<double, 3> barycentric;
  };
  std::optional<Hit> locate(Point p) const;

 private:
  const TriMesh* mesh_;
  Box box_;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<std::size_t>> buckets_;
};

}  // namespace urbanflow::mesh
