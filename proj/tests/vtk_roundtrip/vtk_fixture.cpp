// Writes VTK files plus the exact values they should contain, for an
// external reader to compare against.
#include <iostream>

#include <json.hpp>

#include "urbanflow/ins.hpp"
#include "urbanflow/io.hpp"

using namespace urbanflow;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: vtk_fixture OUTDIR\n";
    return 2;
  }
  const io::fs::path out = argv[1];
  geo::BuildingSet b;
  b.coordinates = geo::CoordinateKind::LocalMeters;
  b.polygons.push_back({{{4, 4}, {6, 4}, {6, 7}, {4, 7}}, "b"});
  const auto m = mesh::triangulate(geo::make_domain({0, 0, 10, 12}, {0, 1}), b, {0.8, 1.2, 2.0, 2.0});
  const ins::TaylorHood th(m);
  const fem::DofMap p1(m, fem::SpaceKind::ScalarP1);
  const fem::Vector c = fem::interpolate(p1, [](Point x) { return std::exp(-0.1 * x.x) * std::sin(x.y) / 3.0; });
  const fem::Vector u = fem::interpolate(th.velocity, [](Point x) { return Point{x.y * x.y / 7.0, -x.x / 3.0}; });

  io::write_file(out / "scalar.vtk", io::vtk_unstructured(m, {io::p1_scalar("c", p1, c)}));
  io::write_file(out / "velocity.vtk", io::vtk_unstructured(m, {io::p2_vector_at_vertices("u", th.velocity, u)}));
  const mesh::TriMesh fine = io::quadratic_subdivision(th.velocity);
  io::write_file(out / "quadratic.vtk", io::vtk_unstructured(fine, {io::p2_vector_at_nodes("u", th.velocity, u)}));
  io::write_file(out / "mesh.vtk", io::vtk_mesh(m));

  nlohmann::json j;
  auto points = [](const mesh::TriMesh& mm) {
    nlohmann::json a = nlohmann::json::array();
    for (Point p : mm.vertices()) a.push_back({p.x, p.y});
    return a;
  };
  auto tris = [](const mesh::TriMesh& mm) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& t : mm.triangles()) a.push_back({t[0], t[1], t[2]});
    return a;
  };
  j["points"] = points(m);
  j["triangles"] = tris(m);
  j["c"] = std::vector<double>(c.data(), c.data() + c.size());
  j["u_vertices"] = io::p2_vector_at_vertices("u", th.velocity, u).values;
  j["fine_points"] = points(fine);
  j["fine_triangles"] = tris(fine);
  j["u_nodes"] = io::p2_vector_at_nodes("u", th.velocity, u).values;
  nlohmann::json tags = nlohmann::json::array();
  for (const auto& e : m.boundary_edges()) tags.push_back(static_cast<int>(e.tag));
  j["boundary_tags"] = tags;
  io::write_file(out / "expected.json", j.dump());
  return 0;
}
