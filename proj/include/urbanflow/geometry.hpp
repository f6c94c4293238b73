#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace urbanflow {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

/// Twice the signed area of an open or closed ring (positive for CCW).
double signed_area2(std::span<const Point> ring);

/// Signed area of a ring given without the closing point.
inline double signed_area(std::span<const Point> ring) { return 0.5 * signed_area2(ring); }

/// Distance from p to the closed segment [a, b].
double point_segment_distance(Point p, Point a, Point b);

/// Even-odd point-in-polygon test for an open ring; points on the boundary
/// may land on either side.
bool point_in_ring(Point p, std::span<const Point> ring);

/// Circumcenter of a non-degenerate triangle.
Point circumcenter(Point a, Point b, Point c);

/// Axis-aligned rectangle.
struct Box {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  double area() const { return width() * height(); }
  bool contains_strictly(Point p) const {
    return p.x > xmin && p.x < xmax && p.y > ymin && p.y < ymax;
  }
  friend bool operator==(const Box&, const Box&) = default;
};

}  // namespace urbanflow
