#include <algorithm>
#include <map>

#include <json.hpp>

#include "urbanflow/error.hpp"
#include "urbanflow/io.hpp"

namespace urbanflow::io {

namespace {

// Ring corners are mesh vertices (key = vertex index) or level crossings on
// mesh edges (key = vertex_count + edge index). Keys make the pieces of
// neighbouring triangles share corners exactly.
struct Marcher {
  const mesh::TriMesh& m;
  const fem::Vector& c;
  double level;

  bool inside(int v) const { return c[v] >= level; }

  Point point(long key) const {
    const auto nv = static_cast<long>(m.vertex_count());
    if (key < nv) return m.vertices()[static_cast<std::size_t>(key)];
    const auto& e = m.edges()[static_cast<std::size_t>(key - nv)];
    const double ca = c[e[0]], cb = c[e[1]];
    const double t = std::clamp((level - ca) / (cb - ca), 0.0, 1.0);
    const Point a = m.vertices()[e[0]], b = m.vertices()[e[1]];
    return a + t * (b - a);
  }
};

std::vector<std::vector<long>> boundary_loops(const Marcher& mc) {
  const mesh::TriMesh& m = mc.m;
  const auto nv = static_cast<long>(m.vertex_count());
  std::map<std::pair<long, long>, int> directed;
  for (std::size_t t = 0; t < m.triangle_count(); ++t) {
    const auto& tri = m.triangles()[t];
    std::vector<long> piece;
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k], b = tri[(k + 1) % 3];
      if (mc.inside(a)) piece.push_back(a);
      if (mc.inside(a) != mc.inside(b)) piece.push_back(nv + m.triangle_edges(t)[(k + 2) % 3]);
    }
    if (piece.size() < 3) continue;
    for (std::size_t i = 0; i < piece.size(); ++i) {
      const std::pair<long, long> e{piece[i], piece[(i + 1) % piece.size()]};
      auto rev = directed.find({e.second, e.first});
      if (rev != directed.end()) {
        if (--rev->second == 0) directed.erase(rev);
      } else {
        ++directed[e];
      }
    }
  }

  std::multimap<long, long> next;
  for (const auto& [e, count] : directed) {
    for (int i = 0; i < count; ++i) next.emplace(e.first, e.second);
  }
  std::vector<std::vector<long>> loops;
  while (!next.empty()) {
    auto it = next.begin();
    const long start = it->first;
    std::vector<long> loop{start};
    long cur = it->second;
    next.erase(it);
    while (cur != start) {
      loop.push_back(cur);
      it = next.find(cur);
      if (it == next.end()) throw Error(ErrorKind::Internal, "open contour loop");
      cur = it->second;
      next.erase(it);
    }
    loops.push_back(std::move(loop));
  }
  return loops;
}

std::vector<Point> to_ring(const Marcher& mc, const std::vector<long>& loop) {
  std::vector<Point> ring;
  ring.reserve(loop.size());
  for (long key : loop) {
    const Point p = mc.point(key);
    if (ring.empty() || !(ring.back() == p)) ring.push_back(p);
  }
  while (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
  return ring;
}

// A point just to the left of the first edge: inside the region bounded by a
// counter-clockwise ring, outside the cut-out of a clockwise one.
Point left_of_first_edge(const std::vector<Point>& ring) {
  const Point a = ring[0], b = ring[1];
  const Point d = b - a;
  const Point mid = 0.5 * (a + b);
  return mid + 1e-7 * Point{-d.y, d.x};
}

}  // namespace

std::vector<ContourPolygon> contour_polygons(const mesh::TriMesh& mesh, const fem::Vector& values, double level) {
  if (static_cast<std::size_t>(values.size()) != mesh.vertex_count()) {
    throw Error(ErrorKind::Internal, "contour field must have one value per vertex");
  }
  const Marcher mc{mesh, values, level};
  std::vector<ContourPolygon> polys;
  std::vector<std::vector<Point>> holes;
  for (const auto& loop : boundary_loops(mc)) {
    std::vector<Point> ring = to_ring(mc, loop);
    if (ring.size() < 3) continue;
    const double a = signed_area(ring);
    if (a > 0.0) {
      polys.push_back({std::move(ring), {}});
    } else if (a < 0.0) {
      holes.push_back(std::move(ring));
    }
  }
  for (auto& hole : holes) {
    const Point probe = left_of_first_edge(hole);
    ContourPolygon* owner = nullptr;
    double owner_area = 0.0;
    for (auto& p : polys) {
      const double a = signed_area(p.outer);
      if (point_in_ring(probe, p.outer) && (!owner || a < owner_area)) {
        owner = &p;
        owner_area = a;
      }
    }
    if (!owner) throw Error(ErrorKind::Internal, "contour hole without an enclosing ring");
    owner->holes.push_back(std::move(hole));
  }
  return polys;
}

std::string contours_geojson(const std::vector<ContourLevel>& levels, const std::optional<geo::LocalFrame>& frame,
                             double time_s, std::size_t step) {
  using nlohmann::ordered_json;
  auto ring_json = [&](const std::vector<Point>& ring) {
    ordered_json r = ordered_json::array();
    auto add = [&](Point p) {
      if (frame) p = frame->inverse(p);
      r.push_back({p.x, p.y});
    };
    for (const Point& p : ring) add(p);
    if (!ring.empty()) add(ring.front());
    return r;
  };

  ordered_json fc;
  fc["type"] = "FeatureCollection";
  fc["features"] = ordered_json::array();
  for (const ContourLevel& lv : levels) {
    ordered_json coords = ordered_json::array();
    for (const ContourPolygon& p : lv.polygons) {
      ordered_json poly = ordered_json::array();
      poly.push_back(ring_json(p.outer));
      for (const auto& h : p.holes) poly.push_back(ring_json(h));
      coords.push_back(std::move(poly));
    }
    ordered_json f;
    f["type"] = "Feature";
    f["properties"] = {{"level_ppm", lv.level}, {"time_s", time_s}, {"step", step}};
    f["geometry"] = {{"type", "MultiPolygon"}, {"coordinates", std::move(coords)}};
    fc["features"].push_back(std::move(f));
  }
  return fc.dump() + '\n';
}

}  // namespace urbanflow::io
