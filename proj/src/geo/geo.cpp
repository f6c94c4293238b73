#include "urbanflow/geo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <json.hpp>

#include "urbanflow/error.hpp"
#include "urbanflow/predicates.hpp"

namespace urbanflow::geo {

using nlohmann::json;

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::string feature_id(const json& feature, std::size_t index) {
  auto stringify = [](const json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return v.dump();
    return {};
  };
  if (feature.contains("id")) {
    std::string s = stringify(feature["id"]);
    if (!s.empty()) return s;
  }
  if (feature.contains("properties") && feature["properties"].is_object()) {
    const json& props = feature["properties"];
    for (const char* key : {"id", "@id", "osm_id", "name"}) {
      if (props.contains(key)) {
        std::string s = stringify(props[key]);
        if (!s.empty()) return s;
      }
    }
  }
  return "feature-" + std::to_string(index);
}

bool ring_self_intersects(const std::vector<Point>& ring) {
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = ring[i];
    const Point b = ring[(i + 1) % n];
    const Point c = ring[(i + 2) % n];
    // Adjacent edges may only share their common vertex; a collinear
    // backtrack (spike) is an overlap.
    if (predicates::orient2d(a, b, c) == 0.0 && dot(b - a, c - b) < 0.0) return true;
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the closing edge
      if (predicates::segments_intersect(a, b, ring[j], ring[(j + 1) % n])) return true;
    }
  }
  return false;
}

}  // namespace

std::optional<std::string> normalize_ring(std::vector<Point>& ring) {
  std::vector<Point> out;
  out.reserve(ring.size());
  for (const Point& p : ring) {
    if (out.empty() || !(out.back() == p)) out.push_back(p);
  }
  while (out.size() > 1 && out.front() == out.back()) out.pop_back();
  if (out.size() < 3) return "ring has fewer than 3 distinct vertices";
  if (ring_self_intersects(out)) return "ring is self-intersecting";
  const double a2 = signed_area2(out);
  if (a2 == 0.0) return "ring has zero area";
  if (a2 < 0.0) std::reverse(out.begin(), out.end());
  ring = std::move(out);
  return std::nullopt;
}

ParseResult parse_building_file(std::string_view content) {
  json doc;
  try {
    doc = json::parse(content.begin(), content.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed GeoJSON: ") + e.what(), e.byte);
  }

  std::vector<json> features;
  if (doc.is_object() && doc.value("type", "") == "FeatureCollection" &&
      doc.contains("features") && doc["features"].is_array()) {
    for (const json& f : doc["features"]) features.push_back(f);
  } else if (doc.is_object() && doc.value("type", "") == "Feature") {
    features.push_back(doc);
  } else {
    throw ParseError("GeoJSON root must be a FeatureCollection or Feature", 0);
  }

  ParseResult result;
  result.buildings.coordinates = CoordinateKind::LonLatDegrees;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const json& feature = features[i];
    const std::string id = feature_id(feature, i);
    auto reject = [&](std::string reason) {
      result.rejected.push_back({id, std::move(reason)});
    };

    if (!feature.is_object() || !feature.contains("geometry") ||
        !feature["geometry"].is_object()) {
      reject("feature has no geometry");
      continue;
    }
    const json& geometry = feature["geometry"];
    const std::string type = geometry.value("type", "");
    if (type != "Polygon") {
      reject("unsupported geometry type '" + type + "'");
      continue;
    }
    if (!geometry.contains("coordinates") || !geometry["coordinates"].is_array() ||
        geometry["coordinates"].empty() || !geometry["coordinates"][0].is_array()) {
      reject("polygon has no outer ring");
      continue;
    }

    std::vector<Point> ring;
    bool malformed = false;
    for (const json& position : geometry["coordinates"][0]) {
      if (!position.is_array() || position.size() < 2 || !position[0].is_number() ||
          !position[1].is_number()) {
        malformed = true;
        break;
      }
      const double lon = position[0].get<double>();
      const double lat = position[1].get<double>();
      if (!std::isfinite(lon) || !std::isfinite(lat)) {
        malformed = true;
        break;
      }
      ring.push_back({lon, lat});
    }
    if (malformed) {
      reject("malformed coordinate position");
      continue;
    }
    if (auto problem = normalize_ring(ring)) {
      reject(*problem);
      continue;
    }
    result.buildings.polygons.push_back({std::move(ring), id});
  }
  return result;
}

std::string to_geojson(const BuildingSet& buildings) {
  json features = json::array();
  for (const GeoPolygon& poly : buildings.polygons) {
    json ring = json::array();
    for (const Point& p : poly.ring) ring.push_back({p.x, p.y});
    if (!poly.ring.empty()) ring.push_back({poly.ring.front().x, poly.ring.front().y});
    features.push_back({{"type", "Feature"},
                        {"id", poly.id},
                        {"properties", {{"id", poly.id}}},
                        {"geometry", {{"type", "Polygon"}, {"coordinates", {ring}}}}});
  }
  json doc = {{"type", "FeatureCollection"}, {"features", features}};
  return doc.dump(1);
}

std::string format_rejections(const std::vector<RejectedFeature>& rejected) {
  std::ostringstream out;
  for (const RejectedFeature& r : rejected) out << r.id << '\t' << r.reason << '\n';
  return out.str();
}

BuildingSet merge_overlapping(const BuildingSet& buildings) {
  namespace bg = boost::geometry;
  using BPoint = bg::model::d2::point_xy<double>;
  using BPolygon = bg::model::polygon<BPoint, /*ClockWise=*/false, /*Closed=*/true>;
  using BMulti = bg::model::multi_polygon<BPolygon>;

  auto to_boost = [](const GeoPolygon& p) {
    BPolygon out;
    for (const Point& q : p.ring) bg::append(out.outer(), BPoint(q.x, q.y));
    bg::append(out.outer(), BPoint(p.ring.front().x, p.ring.front().y));
    bg::correct(out);
    return out;
  };

  struct Entry {
    BPolygon shape;
    std::string id;
  };
  std::vector<Entry> merged;
  for (const GeoPolygon& poly : buildings.polygons) {
    Entry current{to_boost(poly), poly.id};
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < merged.size(); ++i) {
        if (!bg::intersects(current.shape, merged[i].shape)) continue;
        BMulti un;
        bg::union_(merged[i].shape, current.shape, un);
        // Footprints touching at a single point stay separate.
        if (un.size() != 1) continue;
        current.shape = BPolygon{};
        current.shape.outer() = un.front().outer();
        current.id = merged[i].id + "+" + current.id;
        merged.erase(merged.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
    merged.push_back(std::move(current));
  }

  BuildingSet out;
  out.coordinates = buildings.coordinates;
  out.origin = buildings.origin;
  for (Entry& e : merged) {
    GeoPolygon poly;
    poly.id = e.id;
    for (const BPoint& p : e.shape.outer()) poly.ring.push_back({p.x(), p.y()});
    if (normalize_ring(poly.ring)) continue;
    out.polygons.push_back(std::move(poly));
  }
  return out;
}

// --- Local frame ------------------------------------------------------------

LocalFrame::LocalFrame(GeoOrigin origin)
    : origin_(origin), cos_lat0_(std::cos(origin.latitude * kDegToRad)) {}

Point LocalFrame::forward(Point lonlat) const {
  return {kEarthRadius * (lonlat.x - origin_.longitude) * kDegToRad * cos_lat0_,
          kEarthRadius * (lonlat.y - origin_.latitude) * kDegToRad};
}

Point LocalFrame::inverse(Point xy) const {
  return {origin_.longitude + xy.x / (kEarthRadius * cos_lat0_ * kDegToRad),
          origin_.latitude + xy.y / (kEarthRadius * kDegToRad)};
}

BuildingSet project_to_local(const BuildingSet& buildings) {
  if (buildings.coordinates != CoordinateKind::LonLatDegrees) {
    throw Error(ErrorKind::Constraint, "building set is already in local coordinates");
  }
  double lon_min = std::numeric_limits<double>::infinity(), lon_max = -lon_min;
  double lat_min = lon_min, lat_max = -lon_min;
  double lon_sum = 0.0, lat_sum = 0.0;
  std::size_t count = 0;
  for (const GeoPolygon& poly : buildings.polygons) {
    for (const Point& p : poly.ring) {
      if (!(p.y > -90.0 && p.y < 90.0) || !(p.x > -180.0 && p.x < 180.0)) {
        throw Error(ErrorKind::Constraint,
                    "coordinate out of range in feature '" + poly.id + "'");
      }
      lon_min = std::min(lon_min, p.x);
      lon_max = std::max(lon_max, p.x);
      lat_min = std::min(lat_min, p.y);
      lat_max = std::max(lat_max, p.y);
      lon_sum += p.x;
      lat_sum += p.y;
      ++count;
    }
  }
  if (count == 0) throw Error(ErrorKind::Constraint, "cannot project an empty building set");
  if (lon_max - lon_min >= 1.0 || lat_max - lat_min >= 1.0) {
    throw Error(ErrorKind::Constraint,
                "domain too large: bounding box spans one degree or more");
  }

  const GeoOrigin origin{lat_sum / static_cast<double>(count),
                         lon_sum / static_cast<double>(count)};
  const LocalFrame frame(origin);
  BuildingSet out;
  out.coordinates = CoordinateKind::LocalMeters;
  out.origin = origin;
  for (const GeoPolygon& poly : buildings.polygons) {
    GeoPolygon q;
    q.id = poly.id;
    q.ring.reserve(poly.ring.size());
    for (const Point& p : poly.ring) q.ring.push_back(frame.forward(p));
    out.polygons.push_back(std::move(q));
  }
  return out;
}

// --- Domain -----------------------------------------------------------------

Point inward_normal(Side side) {
  switch (side) {
    case Side::Bottom: return {0.0, 1.0};
    case Side::Right: return {-1.0, 0.0};
    case Side::Top: return {0.0, -1.0};
    case Side::Left: return {1.0, 0.0};
  }
  return {};
}

const char* side_name(Side side) {
  switch (side) {
    case Side::Bottom: return "bottom";
    case Side::Right: return "right";
    case Side::Top: return "top";
    case Side::Left: return "left";
  }
  return "?";
}

namespace {

Point checked_wind(Point wind) {
  const double n = norm(wind);
  if (!std::isfinite(n) || std::fabs(n - 1.0) > 1e-6) {
    throw Error(ErrorKind::Constraint, "wind direction is not a unit vector");
  }
  wind = (1.0 / n) * wind;
  constexpr double kAxisTol = 1e-9;
  if (std::fabs(std::fabs(wind.x) - 1.0) <= kAxisTol) return {wind.x > 0 ? 1.0 : -1.0, 0.0};
  if (std::fabs(std::fabs(wind.y) - 1.0) <= kAxisTol) return {0.0, wind.y > 0 ? 1.0 : -1.0};
  throw Error(ErrorKind::Constraint,
              "wind direction must be aligned with a coordinate axis");
}

bool crosswind_is_x(const DomainSpec& domain) { return domain.wind_direction.x == 0.0; }

}  // namespace

DomainSpec make_domain(const Box& bounds, Point wind_direction) {
  DomainSpec spec;
  spec.bounds = bounds;
  spec.wind_direction = checked_wind(wind_direction);
  for (Side s : {Side::Bottom, Side::Right, Side::Top, Side::Left}) {
    const Point n = inward_normal(s);
    if (n == spec.wind_direction) {
      spec.inflow = s;
    } else if (n.x == -spec.wind_direction.x && n.y == -spec.wind_direction.y) {
      spec.outflow = s;
    } else {
      spec.noslip.push_back(s);
    }
  }
  spec.characteristic_length = crosswind_is_x(spec) ? bounds.width() : bounds.height();
  return spec;
}

double blockage_ratio(const BuildingSet& buildings, const DomainSpec& domain) {
  const bool along_x = crosswind_is_x(domain);
  const double lo = along_x ? domain.bounds.xmin : domain.bounds.ymin;
  const double hi = along_x ? domain.bounds.xmax : domain.bounds.ymax;
  if (!(hi > lo)) return 0.0;

  std::vector<std::pair<double, double>> intervals;
  intervals.reserve(buildings.polygons.size());
  for (const GeoPolygon& poly : buildings.polygons) {
    double a = std::numeric_limits<double>::infinity(), b = -a;
    for (const Point& p : poly.ring) {
      const double s = along_x ? p.x : p.y;
      a = std::min(a, s);
      b = std::max(b, s);
    }
    a = std::max(a, lo);
    b = std::min(b, hi);
    if (b > a) intervals.emplace_back(a, b);
  }
  std::sort(intervals.begin(), intervals.end());

  double covered = 0.0;
  double run_lo = 0.0, run_hi = 0.0;
  bool open = false;
  for (const auto& [a, b] : intervals) {
    if (open && a <= run_hi) {
      run_hi = std::max(run_hi, b);
      continue;
    }
    if (open) covered += run_hi - run_lo;
    run_lo = a;
    run_hi = b;
    open = true;
  }
  if (open) covered += run_hi - run_lo;
  return covered / (hi - lo);
}

DomainSpec compute_domain_bounds(const BuildingSet& buildings, Point wind_direction,
                                 const DomainOptions& options) {
  if (buildings.polygons.empty()) {
    throw Error(ErrorKind::Constraint, "cannot size a domain for an empty building set");
  }
  if (!(options.br_max > 0.0 && options.br_max < 1.0)) {
    throw Error(ErrorKind::Config, "br_max must lie in (0, 1)");
  }
  const Point wind = checked_wind(wind_direction);

  Box cluster{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
              -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const GeoPolygon& poly : buildings.polygons) {
    for (const Point& p : poly.ring) {
      cluster.xmin = std::min(cluster.xmin, p.x);
      cluster.xmax = std::max(cluster.xmax, p.x);
      cluster.ymin = std::min(cluster.ymin, p.y);
      cluster.ymax = std::max(cluster.ymax, p.y);
    }
  }

  const bool along_x = wind.x == 0.0;
  const double extent = along_x ? cluster.width() : cluster.height();
  // A small relative margin turns the bound on the crosswind width into a
  // strict inequality on the blockage ratio.
  constexpr double kStrictMargin = 1e-3;
  const double width = std::max(extent / options.br_max * (1.0 + kStrictMargin),
                                extent + 2.0 * options.min_clearance);
  const double clearance = 0.5 * (width - extent);

  const Box bounds{cluster.xmin - clearance, cluster.ymin - clearance,
                   cluster.xmax + clearance, cluster.ymax + clearance};
  return make_domain(bounds, wind);
}

}  // namespace urbanflow::geo
