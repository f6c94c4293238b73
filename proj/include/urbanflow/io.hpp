#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "urbanflow/fem.hpp"
#include "urbanflow/geo.hpp"
#include "urbanflow/mesh.hpp"

namespace urbanflow::io {

namespace fs = std::filesystem;

// --- Files ----------------------------------------------------------------------

/// Whole-file read; Error(Io) naming the path on failure.
std::string read_file(const fs::path& path);
/// Creates parent directories and writes `content`; Error(Io) on failure.
void write_file(const fs::path& path, std::string_view content);

/// Shortest round-trip decimal form of a double ("nan"/"inf" spelled out).
std::string format_double(double v);

// --- CSV ------------------------------------------------------------------------

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  CsvWriter& cell(double v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(std::string_view v);
  /// Ends the current row; throws Error(Internal) on a column-count mismatch.
  void end_row();

  std::size_t rows() const { return rows_; }
  const std::string& text() const { return text_; }

 private:
  std::size_t columns_;
  std::size_t pending_ = 0;
  std::size_t rows_ = 0;
  std::string text_;
};

// --- Legacy VTK -----------------------------------------------------------------

struct PointArray {
  std::string name;
  int components = 1;          ///< 1 (SCALARS) or 3 (VECTORS)
  std::vector<double> values;  ///< point-major
};

struct CellArray {
  std::string name;
  std::vector<int> values;
};

/// ASCII UNSTRUCTURED_GRID of triangles (cell type 5). Point arrays must
/// have vertex_count tuples and cell arrays triangle_count entries.
std::string vtk_unstructured(const mesh::TriMesh& mesh, const std::vector<PointArray>& points,
                             const std::vector<CellArray>& cells = {}, std::string_view title = "urbanflow");

/// Mesh with boundary tags: a grid of triangles followed by boundary lines
/// (cell type 3); cell array "boundary_tag" is 0 on triangles.
std::string vtk_mesh(const mesh::TriMesh& mesh);

/// P1 scalar on the mesh vertices.
PointArray p1_scalar(std::string name, const fem::DofMap& space, const fem::Vector& values);
/// P2 vector sampled at the mesh vertices (z = 0).
PointArray p2_vector_at_vertices(std::string name, const fem::DofMap& space, const fem::Vector& values);

/// Each triangle split into four through its edge midpoints; the points are
/// the P2 nodes in DofMap order.
mesh::TriMesh quadratic_subdivision(const fem::DofMap& p2_space);
/// P2 vector at every P2 node, matching quadratic_subdivision.
PointArray p2_vector_at_nodes(std::string name, const fem::DofMap& space, const fem::Vector& values);

// --- Mesh and field persistence ------------------------------------------------

/// Text format: header, vertices (%.17g), triangles, tagged boundary edges.
std::string serialize_mesh(const mesh::TriMesh& mesh);
/// Rebuilds the mesh; throws ParseError on malformed input.
mesh::TriMesh deserialize_mesh(std::string_view text);

/// Domain geometry alongside the mesh: bounds, wind, projection origin, BR.
struct DomainRecord {
  geo::DomainSpec domain;
  std::optional<geo::GeoOrigin> origin;
  double blockage_ratio = 0.0;
  std::uint64_t mesh_hash = 0;
};

std::string serialize_domain(const DomainRecord& record);
DomainRecord deserialize_domain(std::string_view text);

struct StoredWind {
  std::uint64_t mesh_hash = 0;
  double mu = 0.0;
  bool rom_generated = false;
  fem::Vector velocity;
  fem::Vector pressure;  ///< empty for ROM fields
};

void save_wind(const fs::path& path, const StoredWind& wind);
/// Error(Io) on malformed files or when `expected_mesh_hash` (nonzero) differs.
StoredWind load_wind(const fs::path& path, std::uint64_t expected_mesh_hash = 0);

// --- Contours ---------------------------------------------------------------------

struct ContourPolygon {
  std::vector<Point> outer;               ///< counter-clockwise, open
  std::vector<std::vector<Point>> holes;  ///< clockwise, open
};

/// Superlevel set {c >= level} of a P1 field by marching triangles, as
/// polygons with holes in mesh coordinates.
std::vector<ContourPolygon> contour_polygons(const mesh::TriMesh& mesh, const fem::Vector& values, double level);

struct ContourLevel {
  double level = 0.0;
  std::vector<ContourPolygon> polygons;
};

/// FeatureCollection with one MultiPolygon feature per level. Coordinates are
/// mapped through `frame` to [lon, lat] when given; rings are closed.
std::string contours_geojson(const std::vector<ContourLevel>& levels, const std::optional<geo::LocalFrame>& frame,
                             double time_s, std::size_t step);

}  // namespace urbanflow::io
