#include <sstream>

#include "urbanflow/error.hpp"
#include "urbanflow/io.hpp"

namespace urbanflow::io {

namespace {

void check_name(const std::string& name) {
  if (name.empty() || name.find_first_of(" \t\n") != std::string::npos) {
    throw Error(ErrorKind::Internal, "invalid VTK array name '" + name + "'");
  }
}

void write_points(std::string& out, const std::vector<Point>& pts) {
  out += "POINTS " + std::to_string(pts.size()) + " double\n";
  for (const Point& p : pts) out += format_double(p.x) + ' ' + format_double(p.y) + " 0\n";
}

void write_point_data(std::string& out, std::size_t n, const std::vector<PointArray>& arrays) {
  if (arrays.empty()) return;
  out += "POINT_DATA " + std::to_string(n) + '\n';
  for (const PointArray& a : arrays) {
    check_name(a.name);
    const auto c = static_cast<std::size_t>(a.components);
    if ((a.components != 1 && a.components != 3) || a.values.size() != n * c) {
      throw Error(ErrorKind::Internal, "VTK point array '" + a.name + "' has the wrong size");
    }
    if (a.components == 1) {
      out += "SCALARS " + a.name + " double 1\nLOOKUP_TABLE default\n";
      for (double v : a.values) out += format_double(v) + '\n';
    } else {
      out += "VECTORS " + a.name + " double\n";
      for (std::size_t i = 0; i < n; ++i) {
        out += format_double(a.values[3 * i]) + ' ' + format_double(a.values[3 * i + 1]) + ' ' +
               format_double(a.values[3 * i + 2]) + '\n';
      }
    }
  }
}

void write_cell_data(std::string& out, std::size_t n, const std::vector<CellArray>& arrays) {
  if (arrays.empty()) return;
  out += "CELL_DATA " + std::to_string(n) + '\n';
  for (const CellArray& a : arrays) {
    check_name(a.name);
    if (a.values.size() != n) throw Error(ErrorKind::Internal, "VTK cell array '" + a.name + "' has the wrong size");
    out += "SCALARS " + a.name + " int 1\nLOOKUP_TABLE default\n";
    for (int v : a.values) out += std::to_string(v) + '\n';
  }
}

std::string header(std::string_view title) {
  std::string out = "# vtk DataFile Version 3.0\n";
  out += title;
  out += "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  return out;
}

}  // namespace

std::string vtk_unstructured(const mesh::TriMesh& mesh, const std::vector<PointArray>& points,
                             const std::vector<CellArray>& cells, std::string_view title) {
  std::string out = header(title);
  write_points(out, mesh.vertices());
  const std::size_t nt = mesh.triangle_count();
  out += "CELLS " + std::to_string(nt) + ' ' + std::to_string(4 * nt) + '\n';
  for (const auto& t : mesh.triangles()) {
    out += "3 " + std::to_string(t[0]) + ' ' + std::to_string(t[1]) + ' ' + std::to_string(t[2]) + '\n';
  }
  out += "CELL_TYPES " + std::to_string(nt) + '\n';
  for (std::size_t i = 0; i < nt; ++i) out += "5\n";
  write_cell_data(out, nt, cells);
  write_point_data(out, mesh.vertex_count(), points);
  return out;
}

std::string vtk_mesh(const mesh::TriMesh& mesh) {
  std::string out = header("urbanflow mesh");
  write_points(out, mesh.vertices());
  const std::size_t nt = mesh.triangle_count();
  const std::size_t nb = mesh.boundary_edges().size();
  out += "CELLS " + std::to_string(nt + nb) + ' ' + std::to_string(4 * nt + 3 * nb) + '\n';
  for (const auto& t : mesh.triangles()) {
    out += "3 " + std::to_string(t[0]) + ' ' + std::to_string(t[1]) + ' ' + std::to_string(t[2]) + '\n';
  }
  for (const auto& e : mesh.boundary_edges()) {
    out += "2 " + std::to_string(e.v[0]) + ' ' + std::to_string(e.v[1]) + '\n';
  }
  out += "CELL_TYPES " + std::to_string(nt + nb) + '\n';
  for (std::size_t i = 0; i < nt; ++i) out += "5\n";
  for (std::size_t i = 0; i < nb; ++i) out += "3\n";
  CellArray tags{"boundary_tag", std::vector<int>(nt, 0)};
  for (const auto& e : mesh.boundary_edges()) tags.values.push_back(static_cast<int>(e.tag));
  write_cell_data(out, nt + nb, {tags});
  return out;
}

PointArray p1_scalar(std::string name, const fem::DofMap& space, const fem::Vector& values) {
  if (space.components() != 1 || space.degree() != 1 || static_cast<std::size_t>(values.size()) != space.size()) {
    throw Error(ErrorKind::Internal, "p1_scalar expects a P1 scalar field");
  }
  return {std::move(name), 1, std::vector<double>(values.data(), values.data() + values.size())};
}

namespace {

PointArray sample_vector(std::string name, const fem::DofMap& space, const fem::Vector& values, std::size_t nodes) {
  if (space.kind() != fem::SpaceKind::VelocityP2Vector || static_cast<std::size_t>(values.size()) != space.size()) {
    throw Error(ErrorKind::Internal, "expected a P2 vector field");
  }
  PointArray a{std::move(name), 3, std::vector<double>(3 * nodes, 0.0)};
  for (std::size_t n = 0; n < nodes; ++n) {
    a.values[3 * n] = values[space.dof(static_cast<int>(n), 0)];
    a.values[3 * n + 1] = values[space.dof(static_cast<int>(n), 1)];
  }
  return a;
}

}  // namespace

PointArray p2_vector_at_vertices(std::string name, const fem::DofMap& space, const fem::Vector& values) {
  // P2 node v is mesh vertex v.
  return sample_vector(std::move(name), space, values, space.mesh().vertex_count());
}

PointArray p2_vector_at_nodes(std::string name, const fem::DofMap& space, const fem::Vector& values) {
  return sample_vector(std::move(name), space, values, space.node_count());
}

mesh::TriMesh quadratic_subdivision(const fem::DofMap& p2_space) {
  if (p2_space.degree() != 2) throw Error(ErrorKind::Internal, "quadratic_subdivision needs a P2 space");
  const mesh::TriMesh& m = p2_space.mesh();
  std::vector<mesh::Triangle> tris;
  tris.reserve(4 * m.triangle_count());
  for (std::size_t t = 0; t < m.triangle_count(); ++t) {
    const auto n = p2_space.element_nodes(t);
    // n[3 + k] is the midpoint opposite vertex k.
    tris.push_back({n[0], n[5], n[4]});
    tris.push_back({n[5], n[1], n[3]});
    tris.push_back({n[4], n[3], n[2]});
    tris.push_back({n[3], n[4], n[5]});
  }
  return mesh::TriMesh(p2_space.node_points(), std::move(tris));
}

}  // namespace urbanflow::io
