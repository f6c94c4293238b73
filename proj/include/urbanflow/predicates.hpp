#pragma once

#include "urbanflow/geometry.hpp"

namespace urbanflow::predicates {

// Adaptive-precision geometric predicates. A floating-point filter answers
// the easy cases; when the filter cannot certify the sign the determinant is
// re-evaluated exactly with floating-point expansion arithmetic. Only the
// sign of the result is meaningful.

/// Positive if a, b, c are in counter-clockwise order, negative if clockwise,
/// zero if collinear.
double orient2d(Point a, Point b, Point c);

/// Positive if d lies strictly inside the circle through a, b, c (given in
/// counter-clockwise order), negative if outside, zero if cocircular.
double incircle(Point a, Point b, Point c, Point d);

/// True when the closed segments [p1, p2] and [q1, q2] share at least one
/// point (proper crossings, touching endpoints and collinear overlaps).
bool segments_intersect(Point p1, Point p2, Point q1, Point q2);

}  // namespace urbanflow::predicates
