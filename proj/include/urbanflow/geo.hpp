#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "urbanflow/geometry.hpp"

namespace urbanflow::geo {

/// Building footprint. The ring is stored open (no repeated closing point),
/// counter-clockwise, without consecutive duplicates.
struct GeoPolygon {
  std::vector<Point> ring;
  std::string id;

  double area() const { return signed_area(ring); }
  friend bool operator==(const GeoPolygon&, const GeoPolygon&) = default;
};

enum class CoordinateKind { LonLatDegrees, LocalMeters };

/// Origin of the local metric frame, in degrees.
struct GeoOrigin {
  double latitude = 0.0;
  double longitude = 0.0;
  friend bool operator==(const GeoOrigin&, const GeoOrigin&) = default;
};

struct BuildingSet {
  std::vector<GeoPolygon> polygons;
  CoordinateKind coordinates = CoordinateKind::LonLatDegrees;
  /// Set once the set has been projected; x = east, y = north, meters.
  std::optional<GeoOrigin> origin;

  friend bool operator==(const BuildingSet&, const BuildingSet&) = default;
};

struct RejectedFeature {
  std::string id;
  std::string reason;
};

struct ParseResult {
  BuildingSet buildings;
  std::vector<RejectedFeature> rejected;
};

/// Reads a GeoJSON FeatureCollection. Polygon features become footprints
/// (outer ring only, [lon, lat] order); invalid features are reported in
/// `rejected` instead of aborting the parse. Malformed JSON throws
/// ParseError carrying the byte offset.
ParseResult parse_building_file(std::string_view content);

/// Serializes a building set back to a GeoJSON FeatureCollection.
std::string to_geojson(const BuildingSet& buildings);

/// One line per rejected feature: `<id>\t<reason>`.
std::string format_rejections(const std::vector<RejectedFeature>& rejected);

/// Drops the closing point and consecutive duplicates, then reorients the
/// ring counter-clockwise. Returns an error message for rings with fewer
/// than three distinct vertices or self-intersections.
std::optional<std::string> normalize_ring(std::vector<Point>& ring);

/// Merges footprints that overlap or touch into their union (outer ring).
BuildingSet merge_overlapping(const BuildingSet& buildings);

// --- Local metric frame -----------------------------------------------------

inline constexpr double kEarthRadius = 6371000.0;

class LocalFrame {
 public:
  explicit LocalFrame(GeoOrigin origin);

  const GeoOrigin& origin() const { return origin_; }
  /// (lon, lat) in degrees -> (east, north) in meters.
  Point forward(Point lonlat) const;
  /// (east, north) in meters -> (lon, lat) in degrees.
  Point inverse(Point xy) const;

 private:
  GeoOrigin origin_;
  double cos_lat0_;
};

/// Equirectangular projection about the vertex centroid of the set.
/// Throws Error(Constraint) when the bounding box spans one degree or more.
BuildingSet project_to_local(const BuildingSet& buildings);

// --- Domain sizing ----------------------------------------------------------

enum class Side { Bottom, Right, Top, Left };

struct DomainSpec {
  Box bounds;
  Point wind_direction{0.0, 1.0};
  Side inflow = Side::Bottom;
  Side outflow = Side::Top;
  std::vector<Side> noslip;
  /// Characteristic length used in the Reynolds number (crosswind width).
  double characteristic_length = 0.0;

  friend bool operator==(const DomainSpec&, const DomainSpec&) = default;
};

/// Inward unit normal of a rectangle side.
Point inward_normal(Side side);
const char* side_name(Side side);

/// Builds a DomainSpec for an axis-aligned wind direction over given bounds.
DomainSpec make_domain(const Box& bounds, Point wind_direction);

/// Occluded fraction of the crosswind border: length of the union of the
/// footprint projections onto the side perpendicular to the wind, divided by
/// that side's length.
double blockage_ratio(const BuildingSet& buildings, const DomainSpec& domain);

struct DomainOptions {
  double br_max = 0.17;
  /// Lower bound on the crosswind clearance on each side, meters.
  double min_clearance = 0.0;
};

inline constexpr double kDefaultBlockageRatio = 0.17;

/// Sizes a rectangle around the cluster so that blockage_ratio < br_max.
DomainSpec compute_domain_bounds(const BuildingSet& buildings, Point wind_direction,
                                 const DomainOptions& options = {});

}  // namespace urbanflow::geo
