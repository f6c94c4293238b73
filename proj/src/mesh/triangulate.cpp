// Constrained Delaunay triangulation with Ruppert-style refinement.
//
// The rectangle starts as two triangles; building corners are inserted by
// Bowyer-Watson, missing building edges are recovered by splitting them,
// the footprint interiors are carved out, and bad triangles are refined by
// circumcenter insertion. Encroached subsegments are always split first.
// Subsegments adjacent to input vertices are split on concentric shells
// (power-of-two distances from the vertex) so that small input angles
// cannot trigger an endless cascade.

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <variant>

#include "urbanflow/error.hpp"
#include "urbanflow/mesh.hpp"
#include "urbanflow/predicates.hpp"

namespace urbanflow::mesh {
namespace {

using predicates::incircle;
using predicates::orient2d;

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

struct Tri {
  std::array<int, 3> v{};
  std::array<int, 3> n{-1, -1, -1};  // n[i] is across the edge opposite v[i]
  bool alive = true;
};

struct InputSegment {
  int a, b;
  std::string name;
};

struct DirectedEdge {
  int a, b;
  int owner;  // cavity triangle holding a->b
  int outer;  // triangle on the other side, -1 on the hull
};

class Triangulator {
 public:
  Triangulator(const geo::DomainSpec& domain, const geo::BuildingSet& buildings,
               const SizeFunction& size, const TriangulateOptions& options)
      : domain_(domain), buildings_(buildings), size_(size), options_(options) {
    const double theta = (options.min_angle_deg + 1e-3) * std::numbers::pi / 180.0;
    ratio_bound_ = 1.0 / (2.0 * std::sin(theta));
  }

  TriMesh run() {
    check_inputs();
    init_rectangle();
    insert_building_vertices();
    recover_segments();
    carve_holes();
    refine();
    return compact();
  }

 private:
  // --- setup --------------------------------------------------------------

  void check_inputs() {
    const Box& box = domain_.bounds;
    if (!(box.width() > 0.0 && box.height() > 0.0)) {
      throw Error(ErrorKind::Constraint, "domain rectangle is empty");
    }
    for (const geo::GeoPolygon& poly : buildings_.polygons) {
      for (const Point& p : poly.ring) {
        if (!box.contains_strictly(p)) {
          throw Error(ErrorKind::Constraint,
                      "building " + poly.id + " is not strictly inside the domain");
        }
      }
    }
    // Building edges as (polygon, edge) pairs; adjacent edges of the same
    // ring share a corner and are exempt.
    struct Seg {
      Point p, q;
      std::size_t poly, edge, n;
    };
    std::vector<Seg> segs;
    for (std::size_t k = 0; k < buildings_.polygons.size(); ++k) {
      const auto& ring = buildings_.polygons[k].ring;
      for (std::size_t i = 0; i < ring.size(); ++i) {
        segs.push_back({ring[i], ring[(i + 1) % ring.size()], k, i, ring.size()});
      }
    }
    for (std::size_t i = 0; i < segs.size(); ++i) {
      for (std::size_t j = i + 1; j < segs.size(); ++j) {
        const Seg& s = segs[i];
        const Seg& t = segs[j];
        if (s.poly == t.poly) {
          const std::size_t d = (t.edge + s.n - s.edge) % s.n;
          if (d == 1 || d == s.n - 1) continue;
        }
        if (predicates::segments_intersect(s.p, s.q, t.p, t.q)) {
          throw Error(ErrorKind::Constraint,
                      "constraint conflict: segment " + segment_name(s.poly, s.edge) +
                          " intersects segment " + segment_name(t.poly, t.edge));
        }
      }
    }
  }

  std::string segment_name(std::size_t poly, std::size_t edge) const {
    return "building '" + buildings_.polygons[poly].id + "' edge " + std::to_string(edge);
  }

  int add_vertex(Point p, bool input) {
    pts_.push_back(p);
    input_.push_back(input);
    acute_.push_back(false);
    vtri_.push_back(-1);
    return static_cast<int>(pts_.size()) - 1;
  }

  void init_rectangle() {
    const Box& b = domain_.bounds;
    add_vertex({b.xmin, b.ymin}, true);
    add_vertex({b.xmax, b.ymin}, true);
    add_vertex({b.xmax, b.ymax}, true);
    add_vertex({b.xmin, b.ymax}, true);
    tris_.push_back({{0, 1, 2}, {-1, 1, -1}, true});
    tris_.push_back({{0, 2, 3}, {-1, -1, 0}, true});
    alive_ = 2;
    vtri_ = {0, 0, 0, 1};
    for (int i = 0; i < 4; ++i) {
      subseg_.emplace(edge_key(i, (i + 1) % 4), -1);
    }
  }

  void insert_building_vertices() {
    for (std::size_t k = 0; k < buildings_.polygons.size(); ++k) {
      const auto& ring = buildings_.polygons[k].ring;
      const int first = static_cast<int>(pts_.size());
      const int n = static_cast<int>(ring.size());
      for (int i = 0; i < n; ++i) {
        const Point p = ring[static_cast<std::size_t>(i)];
        const int t = locate(p, 0);
        const int v = add_vertex(p, true);
        std::vector<int> seeds{t};
        for (int e = 0; e < 3; ++e) {
          const Tri& tr = tris_[t];
          if (pts_[tr.v[e]] == p) {
            throw Error(ErrorKind::Constraint, "duplicate vertex in building " + buildings_.polygons[k].id);
          }
          if (orient2d(pts_[tr.v[(e + 1) % 3]], pts_[tr.v[(e + 2) % 3]], p) == 0.0 && tr.n[e] >= 0) {
            seeds.push_back(tr.n[e]);
          }
        }
        if (!insert(v, seeds, std::nullopt)) {
          throw Error(ErrorKind::Internal, "vertex insertion failed during triangulation");
        }
      }
      for (int i = 0; i < n; ++i) {
        const int a = first + i;
        const int b = first + (i + 1) % n;
        segments_.push_back({a, b, segment_name(k, static_cast<std::size_t>(i))});
        // Domain-side angle at a reflex footprint corner.
        const Point prev = ring[static_cast<std::size_t>((i + n - 1) % n)];
        const Point cur = ring[static_cast<std::size_t>(i)];
        const Point next = ring[static_cast<std::size_t>((i + 1) % n)];
        double interior = std::atan2(cross(next - cur, prev - cur), dot(next - cur, prev - cur));
        if (interior < 0) interior += 2.0 * std::numbers::pi;
        if (2.0 * std::numbers::pi - interior < std::numbers::pi / 3.0) acute_[static_cast<std::size_t>(a)] = true;
      }
    }
  }

  // --- topology helpers ----------------------------------------------------

  static int index_of(const Tri& t, int v) {
    for (int i = 0; i < 3; ++i) {
      if (t.v[i] == v) return i;
    }
    return -1;
  }

  bool is_subseg(int a, int b) const { return subseg_.count(edge_key(a, b)) != 0; }

  /// Triangles containing the edge (a, b), at most two.
  std::vector<int> triangles_at_edge(int a, int b) const {
    std::vector<int> out;
    const int start = vtri_[a];
    auto visit = [&](int t) {
      if (index_of(tris_[t], b) >= 0 && std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    };
    // Rotate around a in both directions.
    for (int dir = 0; dir < 2; ++dir) {
      int t = start;
      int guard = 0;
      while (t >= 0 && guard++ < 1000) {
        visit(t);
        const Tri& tr = tris_[t];
        const int i = index_of(tr, a);
        const int next = tr.n[(i + (dir == 0 ? 1 : 2)) % 3];
        if (next == start) break;
        t = next;
      }
    }
    return out;
  }

  int locate(Point p, int start) const {
    int t = start;
    while (!tris_[t].alive) ++t;
    const std::size_t cap = 4 * tris_.size() + 100;
    unsigned rot = 0;
    for (std::size_t step = 0; step < cap; ++step) {
      const Tri& tr = tris_[t];
      int next = -2;
      rot = rot * 1103515245u + 12345u;
      const int off = static_cast<int>((rot >> 16) % 3);
      for (int k = 0; k < 3; ++k) {
        const int e = (k + off) % 3;
        if (orient2d(pts_[tr.v[(e + 1) % 3]], pts_[tr.v[(e + 2) % 3]], p) < 0.0) {
          next = tr.n[e];
          break;
        }
      }
      if (next == -2) return t;
      if (next == -1) break;
      t = next;
    }
    for (std::size_t i = 0; i < tris_.size(); ++i) {
      const Tri& tr = tris_[i];
      if (!tr.alive) continue;
      if (orient2d(pts_[tr.v[0]], pts_[tr.v[1]], p) >= 0 && orient2d(pts_[tr.v[1]], pts_[tr.v[2]], p) >= 0 &&
          orient2d(pts_[tr.v[2]], pts_[tr.v[0]], p) >= 0) {
        return static_cast<int>(i);
      }
    }
    throw Error(ErrorKind::Internal, "point location failed");
  }

  // --- Bowyer-Watson insertion ---------------------------------------------

  /// Cavity of vertex v grown from the seeds; edges in subseg_ are not crossed.
  std::vector<int> grow_cavity(int v, const std::vector<int>& seeds, const std::vector<char>& banned) {
    const Point p = pts_[v];
    ++epoch_;
    if (mark_.size() < tris_.size()) mark_.resize(tris_.size(), 0);
    std::vector<int> cavity;
    for (int s : seeds) {
      if (mark_[s] != epoch_) {
        mark_[s] = epoch_;
        cavity.push_back(s);
      }
    }
    for (std::size_t head = 0; head < cavity.size(); ++head) {
      const Tri& tr = tris_[cavity[head]];
      for (int e = 0; e < 3; ++e) {
        const int nb = tr.n[e];
        if (nb < 0 || mark_[nb] == epoch_ || banned[static_cast<std::size_t>(nb)]) continue;
        if (is_subseg(tr.v[(e + 1) % 3], tr.v[(e + 2) % 3])) continue;
        const Tri& o = tris_[nb];
        if (incircle(pts_[o.v[0]], pts_[o.v[1]], pts_[o.v[2]], p) > 0.0) {
          mark_[nb] = epoch_;
          cavity.push_back(nb);
        }
      }
    }
    return cavity;
  }

  std::vector<DirectedEdge> cavity_boundary(const std::vector<int>& cavity) const {
    std::vector<DirectedEdge> out;
    for (int t : cavity) {
      const Tri& tr = tris_[t];
      for (int e = 0; e < 3; ++e) {
        const int nb = tr.n[e];
        if (nb >= 0 && mark_[nb] == epoch_) continue;
        out.push_back({tr.v[(e + 1) % 3], tr.v[(e + 2) % 3], t, nb});
      }
    }
    return out;
  }

  /// Computes a star-shaped cavity for v. Returns false when a seed would
  /// have to be dropped.
  bool star_cavity(int v, const std::vector<int>& seeds, std::optional<std::pair<int, int>> split,
                   std::vector<int>& cavity, std::vector<DirectedEdge>& boundary) {
    std::vector<char> banned(tris_.size(), 0);
    for (;;) {
      cavity = grow_cavity(v, seeds, banned);
      boundary = cavity_boundary(cavity);
      bool ok = true;
      for (const DirectedEdge& e : boundary) {
        if (split && edge_key(e.a, e.b) == edge_key(split->first, split->second)) continue;
        if (orient2d(pts_[e.a], pts_[e.b], pts_[v]) > 0.0) continue;
        if (std::find(seeds.begin(), seeds.end(), e.owner) != seeds.end()) return false;
        banned[static_cast<std::size_t>(e.owner)] = 1;
        ok = false;
      }
      if (ok) return true;
    }
  }

  void commit(int v, const std::vector<int>& cavity, const std::vector<DirectedEdge>& boundary,
              std::optional<std::pair<int, int>> split, std::vector<int>* created) {
    std::vector<DirectedEdge> fan;
    for (const DirectedEdge& e : boundary) {
      if (split && edge_key(e.a, e.b) == edge_key(split->first, split->second)) continue;
      fan.push_back(e);
    }
    std::vector<int> slots;
    for (std::size_t i = 0; i < fan.size(); ++i) {
      if (i < cavity.size()) {
        slots.push_back(cavity[i]);
      } else {
        slots.push_back(static_cast<int>(tris_.size()));
        tris_.emplace_back();
      }
    }
    for (std::size_t i = fan.size(); i < cavity.size(); ++i) tris_[cavity[i]].alive = false;
    alive_ += fan.size();
    alive_ -= cavity.size();

    for (std::size_t i = 0; i < fan.size(); ++i) {
      Tri& t = tris_[slots[i]];
      t.v = {fan[i].a, fan[i].b, v};
      t.n = {-1, -1, fan[i].outer};
      t.alive = true;
    }
    for (std::size_t i = 0; i < fan.size(); ++i) {
      Tri& t = tris_[slots[i]];
      for (std::size_t j = 0; j < fan.size(); ++j) {
        if (fan[j].a == fan[i].b) t.n[0] = slots[j];
        if (fan[j].b == fan[i].a) t.n[1] = slots[j];
      }
      if (fan[i].outer >= 0) {
        Tri& o = tris_[fan[i].outer];
        for (int e = 0; e < 3; ++e) {
          if (o.v[(e + 1) % 3] == fan[i].b && o.v[(e + 2) % 3] == fan[i].a) o.n[e] = slots[i];
        }
      }
      for (int k = 0; k < 3; ++k) vtri_[t.v[k]] = slots[i];
    }
    if (split) {
      auto it = subseg_.find(edge_key(split->first, split->second));
      if (it != subseg_.end()) {
        const int parent = it->second;
        subseg_.erase(it);
        subseg_.emplace(edge_key(split->first, v), parent);
        subseg_.emplace(edge_key(v, split->second), parent);
      }
    }
    if (created) *created = slots;
  }

  bool insert(int v, const std::vector<int>& seeds, std::optional<std::pair<int, int>> split,
              std::vector<int>* created = nullptr) {
    std::vector<int> cavity;
    std::vector<DirectedEdge> boundary;
    if (!star_cavity(v, seeds, split, cavity, boundary)) return false;
    commit(v, cavity, boundary, split, created);
    return true;
  }

  // --- segments ------------------------------------------------------------

  Point split_point(int a, int b) const {
    const Point pa = pts_[a], pb = pts_[b];
    const double len = distance(pa, pb);
    auto shell = [&](Point from, Point to) {
      double d = 1.0;
      while (d < len / 3.0) d *= 2.0;
      while (d > 2.0 * len / 3.0) d *= 0.5;
      const double t = d / len;
      return Point{from.x + t * (to.x - from.x), from.y + t * (to.y - from.y)};
    };
    Point p;
    if (input_[a] && !input_[b]) {
      p = shell(pa, pb);
    } else if (input_[b] && !input_[a]) {
      p = shell(pb, pa);
    } else {
      p = 0.5 * (pa + pb);
    }
    // Keep points on axis-aligned sides exactly on the line.
    if (pa.x == pb.x) p.x = pa.x;
    if (pa.y == pb.y) p.y = pa.y;
    return p;
  }

  void recover_segments() {
    std::deque<std::array<int, 3>> work;
    for (std::size_t s = 0; s < segments_.size(); ++s) {
      work.push_back({segments_[s].a, segments_[s].b, static_cast<int>(s)});
    }
    while (!work.empty()) {
      const auto [a, b, parent] = work.front();
      work.pop_front();
      if (!triangles_at_edge(a, b).empty()) {
        subseg_.emplace(edge_key(a, b), parent);
        continue;
      }
      if (distance(pts_[a], pts_[b]) < 1e-9 * diameter()) {
        throw Error(ErrorKind::Constraint, "cannot recover segment " + segments_[parent].name);
      }
      const Point p = split_point(a, b);
      const int t = locate(p, vtri_[a]);
      const int v = add_vertex(p, false);
      std::vector<int> seeds{t};
      const Tri& tr = tris_[t];
      for (int e = 0; e < 3; ++e) {
        if (pts_[tr.v[e]] == p) {
          throw Error(ErrorKind::Constraint, "segment " + segments_[parent].name + " passes through a vertex");
        }
        if (orient2d(pts_[tr.v[(e + 1) % 3]], pts_[tr.v[(e + 2) % 3]], p) == 0.0 && tr.n[e] >= 0) {
          if (is_subseg(tr.v[(e + 1) % 3], tr.v[(e + 2) % 3])) {
            throw Error(ErrorKind::Constraint, "constraint conflict while recovering " + segments_[parent].name);
          }
          seeds.push_back(tr.n[e]);
        }
      }
      if (!insert(v, seeds, std::nullopt)) {
        throw Error(ErrorKind::Internal, "insertion failed while recovering " + segments_[parent].name);
      }
      work.push_back({a, v, parent});
      work.push_back({v, b, parent});
    }
  }

  double diameter() const { return std::hypot(domain_.bounds.width(), domain_.bounds.height()); }

  void carve_holes() {
    std::vector<char> keep(tris_.size(), 0);
    std::vector<int> stack{vtri_[0]};
    keep[static_cast<std::size_t>(vtri_[0])] = 1;
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      const Tri& tr = tris_[t];
      for (int e = 0; e < 3; ++e) {
        const int nb = tr.n[e];
        if (nb < 0 || keep[static_cast<std::size_t>(nb)]) continue;
        if (is_subseg(tr.v[(e + 1) % 3], tr.v[(e + 2) % 3])) continue;
        keep[static_cast<std::size_t>(nb)] = 1;
        stack.push_back(nb);
      }
    }
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      if (tris_[t].alive && !keep[t]) {
        tris_[t].alive = false;
        --alive_;
      }
    }
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      Tri& tr = tris_[t];
      if (!tr.alive) continue;
      for (int e = 0; e < 3; ++e) {
        if (tr.n[e] >= 0 && !tris_[tr.n[e]].alive) tr.n[e] = -1;
      }
      for (int k = 0; k < 3; ++k) vtri_[tr.v[k]] = static_cast<int>(t);
    }
  }

  // --- refinement ----------------------------------------------------------

  bool encroached(int a, int b) const {
    for (int t : triangles_at_edge(a, b)) {
      const Tri& tr = tris_[t];
      for (int k = 0; k < 3; ++k) {
        const int x = tr.v[k];
        if (x == a || x == b) continue;
        if (dot(pts_[a] - pts_[x], pts_[b] - pts_[x]) < 0.0) return true;
      }
    }
    return false;
  }

  bool is_bad(int t) const {
    const Tri& tr = tris_[t];
    const Point a = pts_[tr.v[0]], b = pts_[tr.v[1]], c = pts_[tr.v[2]];
    const double R = circumradius(a, b, c);
    const Point centroid = (1.0 / 3.0) * (a + b + c);
    if (R > size_(centroid)) return true;
    const std::array<double, 3> len = {distance(b, c), distance(c, a), distance(a, b)};
    const int shortest = static_cast<int>(std::min_element(len.begin(), len.end()) - len.begin());
    if (R / len[static_cast<std::size_t>(shortest)] <= ratio_bound_) return false;
    // The smallest angle sits opposite the shortest edge; small input
    // angles cannot be improved and are left alone.
    return !acute_[static_cast<std::size_t>(tr.v[shortest])];
  }

  void enqueue_new(const std::vector<int>& created) {
    for (int t : created) {
      const Tri& tr = tris_[t];
      if (is_bad(t)) bad_.push_back({t, tr.v});
      for (int e = 0; e < 3; ++e) {
        const int a = tr.v[(e + 1) % 3], b = tr.v[(e + 2) % 3];
        if (is_subseg(a, b) && dot(pts_[a] - pts_[tr.v[e]], pts_[b] - pts_[tr.v[e]]) < 0.0) {
          segq_.push_back({a, b, false});
        }
      }
    }
  }

  void check_budget() const {
    if (alive_ > options_.max_triangles) {
      throw Error(ErrorKind::Constraint, "mesh refinement exceeded the triangle budget of " +
                                             std::to_string(options_.max_triangles));
    }
  }

  void split_subsegment(int a, int b) {
    const std::vector<int> adj = triangles_at_edge(a, b);
    if (adj.empty()) return;
    const int v = add_vertex(split_point(a, b), false);
    std::vector<int> created;
    if (!insert(v, adj, std::make_pair(a, b), &created)) {
      throw Error(ErrorKind::Internal, "subsegment split failed");
    }
    enqueue_new(created);
    check_budget();
  }

  /// Straight walk from the centroid of t towards c. Returns the triangle
  /// containing c, or the subsegment blocking the way.
  std::variant<int, std::pair<int, int>> walk_to(int t, Point c) const {
    const Tri& start = tris_[t];
    const Point q = (1.0 / 3.0) * (pts_[start.v[0]] + pts_[start.v[1]] + pts_[start.v[2]]);
    int cur = t;
    int prev = -1;
    for (std::size_t step = 0; step < tris_.size() + 10; ++step) {
      const Tri& tr = tris_[cur];
      int exit_edge = -1;
      for (int e = 0; e < 3; ++e) {
        if (tr.n[e] == prev && prev >= 0) continue;
        const Point a = pts_[tr.v[(e + 1) % 3]], b = pts_[tr.v[(e + 2) % 3]];
        if (orient2d(a, b, c) < 0.0 && predicates::segments_intersect(q, c, a, b)) {
          exit_edge = e;
          break;
        }
      }
      if (exit_edge < 0) return cur;
      const int a = tr.v[(exit_edge + 1) % 3], b = tr.v[(exit_edge + 2) % 3];
      if (tr.n[exit_edge] < 0 || is_subseg(a, b)) return std::make_pair(a, b);
      prev = cur;
      cur = tr.n[exit_edge];
    }
    throw Error(ErrorKind::Internal, "walk towards circumcenter did not terminate");
  }

  void refine_triangle(int t) {
    const Tri tr = tris_[t];
    const Point c = circumcenter(pts_[tr.v[0]], pts_[tr.v[1]], pts_[tr.v[2]]);
    const auto where = walk_to(t, c);
    if (const auto* blocked = std::get_if<std::pair<int, int>>(&where)) {
      segq_.push_back({blocked->first, blocked->second, true});
      bad_.push_back({t, tr.v});
      return;
    }
    const int tc = std::get<int>(where);
    for (int k = 0; k < 3; ++k) {
      if (pts_[tris_[tc].v[k]] == c) return;
    }
    const int v = add_vertex(c, false);
    std::vector<int> seeds{tc};
    std::vector<char> none(tris_.size(), 0);
    const std::vector<int> cavity = grow_cavity(v, seeds, none);
    bool encroaches = false;
    for (const DirectedEdge& e : cavity_boundary(cavity)) {
      if (!is_subseg(e.a, e.b)) continue;
      if (dot(pts_[e.a] - c, pts_[e.b] - c) < 0.0 ||
          orient2d(pts_[e.a], pts_[e.b], c) <= 0.0) {
        segq_.push_back({e.a, e.b, true});
        encroaches = true;
      }
    }
    if (encroaches) {
      drop_last_vertex();
      bad_.push_back({t, tr.v});
      return;
    }
    std::vector<int> created;
    if (!insert(v, seeds, std::nullopt, &created)) {
      drop_last_vertex();
      return;
    }
    enqueue_new(created);
    check_budget();
  }

  void drop_last_vertex() {
    pts_.pop_back();
    input_.pop_back();
    acute_.pop_back();
    vtri_.pop_back();
  }

  void refine() {
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      if (!tris_[t].alive) continue;
      const Tri& tr = tris_[t];
      if (is_bad(static_cast<int>(t))) bad_.push_back({static_cast<int>(t), tr.v});
      for (int e = 0; e < 3; ++e) {
        const int a = tr.v[(e + 1) % 3], b = tr.v[(e + 2) % 3];
        if (is_subseg(a, b) && dot(pts_[a] - pts_[tr.v[e]], pts_[b] - pts_[tr.v[e]]) < 0.0) {
          segq_.push_back({a, b, false});
        }
      }
    }
    while (!segq_.empty() || !bad_.empty()) {
      if (!segq_.empty()) {
        const auto [a, b, force] = segq_.front();
        segq_.pop_front();
        if (is_subseg(a, b) && (force || encroached(a, b))) split_subsegment(a, b);
        continue;
      }
      const auto [t, verts] = bad_.front();
      bad_.pop_front();
      if (!tris_[t].alive || tris_[t].v != verts || !is_bad(t)) continue;
      refine_triangle(t);
    }
  }

  TriMesh compact() const {
    std::vector<int> remap(pts_.size(), -1);
    std::vector<Point> verts;
    std::vector<Triangle> tris;
    tris.reserve(alive_);
    for (const Tri& tr : tris_) {
      if (!tr.alive) continue;
      Triangle out{};
      for (int k = 0; k < 3; ++k) {
        int& r = remap[static_cast<std::size_t>(tr.v[k])];
        if (r < 0) {
          r = static_cast<int>(verts.size());
          verts.push_back(pts_[static_cast<std::size_t>(tr.v[k])]);
        }
        out[k] = r;
      }
      tris.push_back(out);
    }
    return TriMesh(std::move(verts), std::move(tris));
  }

  const geo::DomainSpec& domain_;
  const geo::BuildingSet& buildings_;
  const SizeFunction& size_;
  TriangulateOptions options_;
  double ratio_bound_;

  std::vector<Point> pts_;
  std::vector<char> input_;
  std::vector<char> acute_;
  std::vector<int> vtri_;
  std::vector<Tri> tris_;
  std::size_t alive_ = 0;
  std::unordered_map<std::uint64_t, int> subseg_;
  std::vector<InputSegment> segments_;

  std::vector<unsigned> mark_;
  unsigned epoch_ = 0;

  std::deque<std::tuple<int, int, bool>> segq_;  // (a, b, split even if unencroached)
  std::deque<std::pair<int, std::array<int, 3>>> bad_;
};

}  // namespace

TriMesh triangulate(const geo::DomainSpec& domain, const geo::BuildingSet& buildings,
                    const SizeField& size, const TriangulateOptions& options) {
  const SizeFunction fn(size, buildings);
  Triangulator tri(domain, buildings, fn, options);
  return tag_boundaries(tri.run(), domain, &buildings);
}

}  // namespace urbanflow::mesh
