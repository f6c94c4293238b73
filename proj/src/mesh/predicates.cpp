#include "urbanflow/predicates.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace urbanflow::predicates {
namespace {

// Floating-point expansion arithmetic after Shewchuk: a value is stored as a
// sum of non-overlapping doubles in increasing magnitude order, which makes
// the sign equal to the sign of the last (largest) component.
using Expansion = std::vector<double>;

constexpr double kEps = 1.1102230246251565e-16;  // 2^-53
constexpr double kOrientBound = (3.0 + 16.0 * kEps) * kEps;
constexpr double kIncircleBound = (10.0 + 96.0 * kEps) * kEps;

inline void two_sum(double a, double b, double& x, double& y) {
  x = a + b;
  const double bv = x - a;
  const double av = x - bv;
  y = (a - av) + (b - bv);
}

inline void fast_two_sum(double a, double b, double& x, double& y) {
  x = a + b;
  y = b - (x - a);
}

inline void two_product(double a, double b, double& x, double& y) {
  x = a * b;
  y = std::fma(a, b, -x);
}

Expansion from_diff(double a, double b) {
  double x, y;
  two_sum(a, -b, x, y);
  Expansion e;
  if (y != 0.0) e.push_back(y);
  if (x != 0.0) e.push_back(x);
  return e;
}

Expansion grow(const Expansion& e, double b) {
  Expansion h;
  h.reserve(e.size() + 1);
  double q = b;
  for (double ei : e) {
    double s, t;
    two_sum(q, ei, s, t);
    if (t != 0.0) h.push_back(t);
    q = s;
  }
  if (q != 0.0 || h.empty()) h.push_back(q);
  if (h.size() == 1 && h[0] == 0.0) h.clear();
  return h;
}

Expansion add(const Expansion& e, const Expansion& f) {
  Expansion h = e;
  for (double fi : f) h = grow(h, fi);
  return h;
}

Expansion negate(Expansion e) {
  for (double& v : e) v = -v;
  return e;
}

Expansion scale(const Expansion& e, double b) {
  Expansion h;
  if (e.empty() || b == 0.0) return h;
  h.reserve(2 * e.size());
  double q, hh;
  two_product(e[0], b, q, hh);
  if (hh != 0.0) h.push_back(hh);
  for (std::size_t i = 1; i < e.size(); ++i) {
    double p1, p0, sum;
    two_product(e[i], b, p1, p0);
    two_sum(q, p0, sum, hh);
    if (hh != 0.0) h.push_back(hh);
    fast_two_sum(p1, sum, q, hh);
    if (hh != 0.0) h.push_back(hh);
  }
  if (q != 0.0) h.push_back(q);
  return h;
}

Expansion mul(const Expansion& e, const Expansion& f) {
  Expansion h;
  for (double fi : f) h = add(h, scale(e, fi));
  return h;
}

double sign_value(const Expansion& e) { return e.empty() ? 0.0 : e.back(); }

double orient2d_exact(Point a, Point b, Point c) {
  const Expansion acx = from_diff(a.x, c.x);
  const Expansion acy = from_diff(a.y, c.y);
  const Expansion bcx = from_diff(b.x, c.x);
  const Expansion bcy = from_diff(b.y, c.y);
  return sign_value(add(mul(acx, bcy), negate(mul(acy, bcx))));
}

double incircle_exact(Point a, Point b, Point c, Point d) {
  const Expansion adx = from_diff(a.x, d.x);
  const Expansion ady = from_diff(a.y, d.y);
  const Expansion bdx = from_diff(b.x, d.x);
  const Expansion bdy = from_diff(b.y, d.y);
  const Expansion cdx = from_diff(c.x, d.x);
  const Expansion cdy = from_diff(c.y, d.y);

  const Expansion alift = add(mul(adx, adx), mul(ady, ady));
  const Expansion blift = add(mul(bdx, bdx), mul(bdy, bdy));
  const Expansion clift = add(mul(cdx, cdx), mul(cdy, cdy));

  const Expansion bc = add(mul(bdx, cdy), negate(mul(cdx, bdy)));
  const Expansion ca = add(mul(cdx, ady), negate(mul(adx, cdy)));
  const Expansion ab = add(mul(adx, bdy), negate(mul(bdx, ady)));

  return sign_value(add(add(mul(alift, bc), mul(blift, ca)), mul(clift, ab)));
}

}  // namespace

double orient2d(Point a, Point b, Point c) {
  const double detleft = (a.x - c.x) * (b.y - c.y);
  const double detright = (a.y - c.y) * (b.x - c.x);
  const double det = detleft - detright;
  const double detsum = std::fabs(detleft) + std::fabs(detright);
  if (std::fabs(det) > kOrientBound * detsum) return det;
  return orient2d_exact(a, b, c);
}

double incircle(Point a, Point b, Point c, Point d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;

  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double alift = adx * adx + ady * ady;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double blift = bdx * bdx + bdy * bdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;
  const double clift = cdx * cdx + cdy * cdy;

  const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) +
                     clift * (adxbdy - bdxady);
  const double permanent = (std::fabs(bdxcdy) + std::fabs(cdxbdy)) * alift +
                           (std::fabs(cdxady) + std::fabs(adxcdy)) * blift +
                           (std::fabs(adxbdy) + std::fabs(bdxady)) * clift;
  if (std::fabs(det) > kIncircleBound * permanent) return det;
  return incircle_exact(a, b, c, d);
}

}  // namespace urbanflow::predicates

namespace urbanflow::predicates {
namespace {

bool on_segment(Point a, Point b, Point p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

int sgn(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

bool segments_intersect(Point p1, Point p2, Point q1, Point q2) {
  const int d1 = sgn(orient2d(q1, q2, p1));
  const int d2 = sgn(orient2d(q1, q2, p2));
  const int d3 = sgn(orient2d(p1, p2, q1));
  const int d4 = sgn(orient2d(p1, p2, q2));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  if (d1 == 0 && on_segment(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment(p1, p2, q2)) return true;
  return false;
}

}  // namespace urbanflow::predicates
