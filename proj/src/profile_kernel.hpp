#pragma once

// Finite-difference geometry of a profile polyline, shared by surface
// construction and the flow integrator.

#include <cmath>
#include <vector>

#include "mcf/surface.hpp"

namespace mcf::detail {

// Which profile coordinate an axis end collapses onto: 0 for u, 1 for v.
inline int axis_coordinate(const Vec2& end, RotationSignature sig) {
  if (sig.p >= 1 && sig.q >= 1) return std::abs(end.x()) <= std::abs(end.y()) ? 0 : 1;
  return sig.p >= 1 ? 0 : 1;
}

// Virtual sample beyond an open end: the mirror image across the axis for
// axis ends, quadratic extrapolation for free ends.
inline Vec2 end_ghost(const std::vector<Vec2>& pts, bool front, EndKind kind, RotationSignature sig) {
  const size_t N = pts.size();
  const Vec2& e0 = front ? pts[0] : pts[N - 1];
  if (kind == EndKind::axis) {
    Vec2 g = e0;
    g[axis_coordinate(e0, sig)] *= -1.0;
    return g;
  }
  const Vec2& e1 = front ? pts[1] : pts[N - 2];
  const Vec2& e2 = front ? pts[2] : pts[N - 3];
  return 3.0 * e0 - 3.0 * e1 + e2;
}

struct LocalGeometry {
  Vec2 tangent;
  Vec2 normal;  // tangent rotated clockwise
  double kappa = 0.0;
  bool ok = false;
};

inline LocalGeometry local_geometry(const Vec2& P, const Vec2& C, const Vec2& Q) {
  LocalGeometry g;
  const Vec2 d1 = 0.5 * (Q - P);
  const Vec2 d2 = Q - 2.0 * C + P;
  const double speed = d1.norm();
  if (speed == 0.0) return g;
  g.tangent = d1 / speed;
  g.normal = Vec2(g.tangent.y(), -g.tangent.x());
  g.kappa = (d1.x() * d2.y() - d2.x() * d1.y()) / (speed * speed * speed);
  g.ok = true;
  return g;
}

}  // namespace mcf::detail
