#include "mcf/surface.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "profile_kernel.hpp"

namespace mcf {

namespace {

constexpr double kPi = std::numbers::pi;

// Orbit factor |S^m| |c|^m with the signed-coordinate convention for m = 0.
double orbit_factor(int m, double c) {
  if (m == 0) return 1.0;
  return sphere_area(m) * std::pow(std::abs(c), m);
}

using detail::axis_coordinate;

double fraction_inside(double ra, double rb, double R) {
  if (ra <= R && rb <= R) return 1.0;
  if (ra > R && rb > R) return 0.0;
  double t = (R - ra) / (rb - ra);
  return ra <= R ? t : 1.0 - t;
}

void assign_weights(std::vector<Cell>& cells, RotationSignature sig, Topology topo, EndKind front,
                    EndKind back) {
  for (Cell& c : cells) {
    c.full_weight = orbit_factor(sig.p, c.position.x()) * orbit_factor(sig.q, c.position.y()) * c.ds;
  }
  if (topo == Topology::closed || cells.empty()) return;
  // Midpoint quadrature of a density vanishing linearly at an axis end has an
  // O(h^2) end error; remove its leading Euler-Maclaurin term.
  auto correct = [&](Cell& c) {
    int axis = axis_coordinate(c.position, sig);
    int dim = axis == 0 ? sig.p : sig.q;
    if (dim != 1) return;
    int other_dim = axis == 0 ? sig.q : sig.p;
    double other = orbit_factor(other_dim, c.position[1 - axis]);
    double slope = std::abs(c.tangent[axis]);
    c.full_weight -= c.ds * c.ds / 24.0 * 2.0 * kPi * slope * other;
  };
  if (front == EndKind::axis) correct(cells.front());
  if (back == EndKind::axis) correct(cells.back());
}

void assign_flags(std::vector<Cell>& cells) {
  for (Cell& c : cells) {
    c.boundary = c.prev < 0 || c.next < 0;
    if (c.prev >= 0 && !cells[c.prev].resolved) c.boundary = true;
    if (c.next >= 0 && !cells[c.next].resolved) c.boundary = true;
    if (!c.resolved) c.boundary = true;
  }
}

// Finite-difference geometry of the profile with index parametrisation.
std::vector<Cell> compute_geometry(const std::vector<Vec2>& pts, RotationSignature sig, Topology topo,
                                   EndKind front, EndKind back) {
  const int N = static_cast<int>(pts.size());
  if (N < 3) throw Rejection("surface", "profile needs at least 3 samples");
  std::vector<Cell> cells(N);
  for (int i = 0; i < N; ++i) {
    const Vec2& x = pts[i];
    if (!std::isfinite(x.x()) || !std::isfinite(x.y()))
      throw Rejection("surface", "non-finite sample at cell " + std::to_string(i), {i});
    if (sig.p > 0 && x.x() <= 0.0)
      throw Rejection("surface", "u must be positive at cell " + std::to_string(i) + " (p > 0)", {i});
    if (sig.q > 0 && x.y() <= 0.0)
      throw Rejection("surface", "v must be positive at cell " + std::to_string(i) + " (q > 0)", {i});
    cells[i].position = x;
    if (topo == Topology::closed) {
      cells[i].prev = (i + N - 1) % N;
      cells[i].next = (i + 1) % N;
    } else {
      cells[i].prev = i > 0 ? i - 1 : -1;
      cells[i].next = i + 1 < N ? i + 1 : -1;
    }
  }

  const Vec2 ghost_front = topo == Topology::open ? detail::end_ghost(pts, true, front, sig) : Vec2::Zero();
  const Vec2 ghost_back = topo == Topology::open ? detail::end_ghost(pts, false, back, sig) : Vec2::Zero();

  double support_sum = 0.0;
  for (int i = 0; i < N; ++i) {
    Cell& c = cells[i];
    const Vec2 P = c.prev >= 0 ? pts[c.prev] : ghost_front;
    const Vec2 Q = c.next >= 0 ? pts[c.next] : ghost_back;
    const Vec2& C = pts[i];
    detail::LocalGeometry g = detail::local_geometry(P, C, Q);
    if (!g.ok) throw Rejection("surface", "coincident samples around cell " + std::to_string(i), {i});
    c.tangent = g.tangent;
    c.normal = g.normal;
    c.kappa_profile = g.kappa;
    c.kappa_first = sig.p > 0 ? c.normal.x() / C.x() : 0.0;
    c.kappa_second = sig.q > 0 ? c.normal.y() / C.y() : 0.0;
    c.edge_lo = 0.5 * (P + C);
    c.edge_hi = 0.5 * (Q + C);
    c.resolved = true;
    if (topo == Topology::open) {
      if ((i == 0 && front == EndKind::free) || (i == N - 1 && back == EndKind::free)) c.resolved = false;
    }
  }
  // Cell lengths: half-chords to each neighbour, corrected from chord to arc
  // with the mean curvature of the segment.
  for (int i = 0; i < N; ++i) {
    Cell& c = cells[i];
    const Vec2 P = c.prev >= 0 ? pts[c.prev] : ghost_front;
    const Vec2 Q = c.next >= 0 ? pts[c.next] : ghost_back;
    double kp = c.prev >= 0 ? cells[c.prev].kappa_profile : c.kappa_profile;
    double kn = c.next >= 0 ? cells[c.next].kappa_profile : c.kappa_profile;
    double lp = (c.position - P).norm(), ln = (Q - c.position).norm();
    double mp = 0.5 * (kp + c.kappa_profile), mn = 0.5 * (kn + c.kappa_profile);
    c.ds = 0.5 * (lp * (1.0 + mp * mp * lp * lp / 24.0) + ln * (1.0 + mn * mn * ln * ln / 24.0));
  }
  assign_weights(cells, sig, topo, front, back);
  for (int i = 0; i < N; ++i) support_sum += cells[i].full_weight * pts[i].dot(cells[i].normal);
  if (support_sum < 0.0) {
    for (Cell& c : cells) {
      c.normal = -c.normal;
      c.kappa_profile = -c.kappa_profile;
      c.kappa_first = -c.kappa_first;
      c.kappa_second = -c.kappa_second;
    }
  }
  for (Cell& c : cells) {
    c.clip = 1.0;
    c.weight = c.full_weight;
  }
  assign_flags(cells);
  return cells;
}

EndKind detect_end(const Vec2& end, double h, RotationSignature sig) {
  bool near_u = sig.p >= 1 && std::abs(end.x()) <= 0.75 * h;
  bool near_v = sig.q >= 1 && std::abs(end.y()) <= 0.75 * h;
  return (near_u || near_v) ? EndKind::axis : EndKind::free;
}

}  // namespace

double sphere_area(int m) {
  double a = 0.5 * (m + 1);
  return 2.0 * std::pow(kPi, a) / std::tgamma(a);
}

double DiscreteHypersurface::mean_curvature(int i) const {
  const Cell& c = cells[i];
  return c.kappa_profile + signature.p * c.kappa_first + signature.q * c.kappa_second;
}

double DiscreteHypersurface::norm_A_sq(int i) const {
  const Cell& c = cells[i];
  return c.kappa_profile * c.kappa_profile + signature.p * c.kappa_first * c.kappa_first +
         signature.q * c.kappa_second * c.kappa_second;
}

std::vector<double> DiscreteHypersurface::principal_curvatures(int i) const {
  const Cell& c = cells[i];
  std::vector<double> k;
  k.reserve(n());
  k.push_back(c.kappa_profile);
  for (int j = 0; j < signature.p; ++j) k.push_back(c.kappa_first);
  for (int j = 0; j < signature.q; ++j) k.push_back(c.kappa_second);
  return k;
}

VecN DiscreteHypersurface::ambient_position(int i) const {
  VecN x = VecN::Zero(signature.ambient_dim());
  x[0] = cells[i].position.x();
  x[signature.p + 1] = cells[i].position.y();
  return x;
}

VecN DiscreteHypersurface::ambient_normal(int i) const {
  VecN x = VecN::Zero(signature.ambient_dim());
  x[0] = cells[i].normal.x();
  x[signature.p + 1] = cells[i].normal.y();
  return x;
}

std::vector<int> DiscreteHypersurface::stencil_cells() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (stencil_ok(i)) out.push_back(i);
  return out;
}

double DiscreteHypersurface::mean_spacing() const {
  double total = 0.0;
  int count = 0;
  for (const Cell& c : cells) {
    if (c.next >= 0) {
      total += (cells[c.next].position - c.position).norm();
      ++count;
    }
  }
  return count ? total / count : 0.0;
}

double ball_fraction(const Cell& c, double R) {
  double rc = c.position.norm();
  double frac = 0.5 * fraction_inside(c.edge_lo.norm(), rc, R) + 0.5 * fraction_inside(rc, c.edge_hi.norm(), R);
  return std::min(c.clip, frac);
}

double GeneralizedCylinderSpec::radius() const { return std::sqrt(2.0 * k); }

std::vector<Vec2> profile_points(const DiscreteHypersurface& s) {
  std::vector<Vec2> pts;
  pts.reserve(s.cells.size());
  for (const Cell& c : s.cells) pts.push_back(c.position);
  return pts;
}

void check_embedded(const std::vector<Vec2>& pts, Topology topology, double h) {
  const int N = static_cast<int>(pts.size());
  // Sort by u so that only a narrow band of candidates is compared.
  std::vector<int> order(N);
  for (int i = 0; i < N; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return pts[a].x() < pts[b].x(); });
  const double limit = 0.5 * h;
  for (int a = 0; a < N; ++a) {
    for (int b = a + 1; b < N; ++b) {
      int i = order[a], j = order[b];
      if (pts[j].x() - pts[i].x() > limit) break;
      int gap = std::abs(i - j);
      if (topology == Topology::closed) gap = std::min(gap, N - gap);
      if (gap <= 1) continue;
      if ((pts[i] - pts[j]).norm() <= limit) {
        throw Rejection("embeddedness",
                        "samples " + std::to_string(std::min(i, j)) + " and " + std::to_string(std::max(i, j)) +
                            " closer than h/2",
                        {std::min(i, j), std::max(i, j)});
      }
    }
  }
}

DiscreteHypersurface build_from_profile(const ProfileCurve& profile, RotationSignature sig) {
  const auto& pts = profile.samples;
  const int N = static_cast<int>(pts.size());
  if (sig.p < 0 || sig.q < 0) throw Rejection("surface", "signature dimensions must be nonnegative");
  if (N < 3) throw Rejection("surface", "profile needs at least 3 samples");
  const int segments = profile.topology == Topology::closed ? N : N - 1;
  std::vector<double> gaps(segments);
  double h = 0.0;
  for (int i = 0; i < segments; ++i) {
    gaps[i] = (pts[(i + 1) % N] - pts[i]).norm();
    h += gaps[i];
  }
  h /= segments;
  for (int i = 0; i < segments; ++i) {
    if (std::abs(gaps[i] - h) > 0.1 * h) {
      throw Rejection("surface",
                      "degenerate sample spacing between cells " + std::to_string(i) + " and " +
                          std::to_string((i + 1) % N),
                      {i});
    }
  }
  DiscreteHypersurface s;
  s.signature = sig;
  s.topology = profile.topology;
  s.provenance = Provenance::discretized;
  if (profile.topology == Topology::open) {
    s.front = detect_end(pts.front(), h, sig);
    s.back = detect_end(pts.back(), h, sig);
  }
  s.cells = compute_geometry(pts, sig, s.topology, s.front, s.back);
  return s;
}

DiscreteHypersurface rebuild_geometry(const DiscreteHypersurface& like, const std::vector<Vec2>& pts,
                                      Provenance provenance) {
  DiscreteHypersurface s;
  s.signature = like.signature;
  s.topology = like.topology;
  s.front = like.front;
  s.back = like.back;
  s.provenance = provenance;
  s.cells = compute_geometry(pts, s.signature, s.topology, s.front, s.back);
  return s;
}

DiscreteHypersurface analytic_shrinker(const GeneralizedCylinderSpec& spec, int resolution, double truncation) {
  const int k = spec.k, n = spec.n;
  if (n < 1) throw Rejection("surface", "dimension n must be at least 1");
  if (k < 0 || k > n) throw Rejection("surface", "cylinder index k must lie in [0, n]");
  if (resolution < 16) throw Rejection("surface", "resolution must be at least 16");
  if (k < n && !(truncation > 0.0)) throw Rejection("surface", "truncation radius must be positive");
  const int N = resolution;
  const double r = spec.radius();

  DiscreteHypersurface s;
  s.provenance = Provenance::analytic;
  std::vector<Vec2> pts(N), normals(N);
  std::vector<double> kp(N, 0.0), k1(N, 0.0), k2(N, 0.0), ds(N);

  if (k == n) {
    if (n == 1) {
      s.signature = {0, 0};
      s.topology = Topology::closed;
      const double dphi = 2.0 * kPi / N;
      for (int i = 0; i < N; ++i) {
        double phi = i * dphi;
        normals[i] = Vec2(std::cos(phi), std::sin(phi));
        pts[i] = r * normals[i];
        kp[i] = 1.0 / r;
        ds[i] = r * dphi;
      }
    } else {
      s.signature = {n - 1, 0};
      s.front = s.back = EndKind::axis;
      const double dphi = kPi / N;
      for (int i = 0; i < N; ++i) {
        double phi = (i + 0.5) * dphi;
        normals[i] = Vec2(std::sin(phi), -std::cos(phi));
        pts[i] = r * normals[i];
        kp[i] = k1[i] = 1.0 / r;
        ds[i] = r * dphi;
      }
    }
  } else {
    const int q = n - k - 1;
    s.signature = {k, q};
    double h;
    double b0;
    if (q == 0) {
      h = 2.0 * truncation / N;
      b0 = -truncation + 0.5 * h;
    } else {
      h = truncation / N;
      b0 = 0.5 * h;
      s.front = EndKind::axis;
    }
    for (int i = 0; i < N; ++i) {
      pts[i] = Vec2(r, b0 + i * h);
      normals[i] = Vec2(1.0, 0.0);
      k1[i] = k >= 1 ? 1.0 / r : 0.0;
      ds[i] = h;
    }
    FlatTail tail;
    tail.sphere_dim = k;
    tail.sphere_radius = r;
    tail.flat_dim = n - k;
    tail.truncation = truncation;
    s.flat_tail = tail;
  }

  s.cells = compute_geometry(pts, s.signature, s.topology, s.front, s.back);
  for (int i = 0; i < N; ++i) {
    Cell& c = s.cells[i];
    c.normal = normals[i];
    c.tangent = Vec2(-normals[i].y(), normals[i].x());
    if (c.tangent.dot(c.next >= 0 ? s.cells[c.next].position - c.position
                                  : c.position - s.cells[c.prev].position) < 0)
      c.tangent = -c.tangent;
    c.kappa_profile = kp[i];
    c.kappa_first = k1[i];
    c.kappa_second = k2[i];
    c.ds = ds[i];
    c.resolved = true;
  }
  assign_weights(s.cells, s.signature, s.topology, s.front, s.back);
  for (Cell& c : s.cells) c.weight = c.full_weight;
  assign_flags(s.cells);
  return s;
}

ShrinkerResidual shrinker_residual(const DiscreteHypersurface& s) {
  ShrinkerResidual out;
  out.values.resize(s.size());
  double num = 0.0, den = 0.0;
  for (int i = 0; i < s.size(); ++i) {
    double r = s.mean_curvature(i) - 0.5 * s.support(i);
    out.values[i] = r;
    if (!s.cells[i].resolved) continue;
    out.norms.sup = std::max(out.norms.sup, std::abs(r));
    double g = std::exp(-0.25 * s.cells[i].position.squaredNorm()) * s.cells[i].weight;
    num += r * r * g;
    den += g;
  }
  out.norms.l2 = den > 0.0 ? std::sqrt(num / den) : 0.0;
  return out;
}

DiscreteHypersurface restrict_to_ball(const DiscreteHypersurface& s, double R) {
  if (!(R > 0.0)) throw Rejection("surface", "ball radius must be positive");
  DiscreteHypersurface out;
  out.signature = s.signature;
  out.provenance = s.provenance;
  out.topology = s.topology;
  out.front = s.front;
  out.back = s.back;
  std::vector<int> remap(s.size(), -1);
  for (int i = 0; i < s.size(); ++i) {
    const Cell& c = s.cells[i];
    double frac = ball_fraction(c, R);
    if (frac <= 0.0) continue;
    remap[i] = out.size();
    Cell kept = c;
    kept.clip = frac;
    kept.weight = kept.full_weight * kept.clip;
    out.cells.push_back(kept);
  }
  for (Cell& c : out.cells) {
    c.prev = c.prev >= 0 ? remap[c.prev] : -1;
    c.next = c.next >= 0 ? remap[c.next] : -1;
  }
  assign_flags(out.cells);
  return out;
}

DiscreteHypersurface perturb_normal(const DiscreteHypersurface& s, const std::vector<double>& phi,
                                    bool recompute) {
  if (static_cast<int>(phi.size()) != s.size())
    throw Rejection("perturb", "perturbation field size does not match the cell count");
  const double h = s.mean_spacing();
  for (int i = 0; i < s.size(); ++i) {
    int j = s.cells[i].next;
    if (j < 0) continue;
    double gap = (s.cells[j].position - s.cells[i].position).norm();
    if (std::abs(phi[j] - phi[i]) / gap > 1.0 / h)
      throw Rejection("perturb", "perturbation gradient exceeds 1/h at cell " + std::to_string(i), {i});
  }
  std::vector<Vec2> pts(s.size());
  for (int i = 0; i < s.size(); ++i) pts[i] = s.cells[i].position + phi[i] * s.cells[i].normal;
  check_embedded(pts, s.topology, h);
  if (recompute) return rebuild_geometry(s, pts, Provenance::perturbed);
  DiscreteHypersurface out = s;
  out.provenance = Provenance::perturbed;
  out.flat_tail.reset();
  for (int i = 0; i < s.size(); ++i) out.cells[i].position = pts[i];
  return out;
}

DiscreteHypersurface scaled(const DiscreteHypersurface& s, double factor) {
  if (!(factor > 0.0)) throw Rejection("surface", "scale factor must be positive");
  DiscreteHypersurface out = s;
  const double wf = std::pow(factor, s.n());
  for (Cell& c : out.cells) {
    c.position *= factor;
    c.kappa_profile /= factor;
    c.kappa_first /= factor;
    c.kappa_second /= factor;
    c.ds *= factor;
    c.full_weight *= wf;
    c.weight *= wf;
    c.edge_lo *= factor;
    c.edge_hi *= factor;
  }
  if (out.flat_tail) {
    out.flat_tail->sphere_radius *= factor;
    out.flat_tail->truncation *= factor;
  }
  return out;
}

DiscreteHypersurface translated(const DiscreteHypersurface& s, double du, double dv) {
  if ((du != 0.0 && s.signature.p > 0) || (dv != 0.0 && s.signature.q > 0))
    throw Rejection("surface", "translation along an orbit factor breaks the rotational symmetry");
  DiscreteHypersurface out = s;
  const Vec2 shift(du, dv);
  for (Cell& c : out.cells) {
    c.position += shift;
    c.edge_lo += shift;
    c.edge_hi += shift;
  }
  if (shift.squaredNorm() > 0.0) out.flat_tail.reset();
  return out;
}

std::vector<double> profile_wave(const DiscreteHypersurface& s, double amplitude, int wavenumber) {
  std::vector<double> out(s.size());
  const bool capped = s.topology == Topology::open && s.front == EndKind::axis && s.back == EndKind::axis;
  for (int i = 0; i < s.size(); ++i) {
    const Vec2& x = s.cells[i].position;
    double t;
    if (s.topology == Topology::closed) {
      t = std::atan2(x.y(), x.x());
    } else if (capped) {
      t = std::atan2(x.x(), -x.y());
    } else {
      t = x.y() * kPi / 10.0;
    }
    out[i] = amplitude * std::cos(wavenumber * t);
  }
  return out;
}

}  // namespace mcf
