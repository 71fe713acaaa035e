#include "mcf/flow.hpp"

#include <algorithm>
#include <math.h>  // pchip.hpp calls unqualified isnan

#include <boost/math/interpolators/pchip.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "mcf/gaussian.hpp"
#include "mcf/test_family.hpp"
#include "profile_kernel.hpp"

namespace mcf {

namespace {

struct Kinematics {
  std::vector<Vec2> move;  // normal velocity times normal, per sample
  double max_A_sq = 0.0;
  double min_gap = std::numeric_limits<double>::infinity();
  double mean_gap = 0.0;
  bool ok = true;
  std::string problem;
};

bool pinned(const DiscreteHypersurface& like, int i) {
  if (like.topology == Topology::closed) return false;
  return (i == 0 && like.front == EndKind::free) || (i == like.size() - 1 && like.back == EndKind::free);
}

void measure_gaps(const std::vector<Vec2>& pts, const DiscreteHypersurface& like, Kinematics& k) {
  const int N = static_cast<int>(pts.size());
  const int segments = like.topology == Topology::closed ? N : N - 1;
  double total = 0.0;
  for (int i = 0; i < segments; ++i) {
    double g = (pts[(i + 1) % N] - pts[i]).norm();
    k.min_gap = std::min(k.min_gap, g);
    total += g;
  }
  k.mean_gap = total / segments;
  if (like.topology == Topology::open) {
    const RotationSignature sig = like.signature;
    if (like.front == EndKind::axis)
      k.min_gap = std::min(k.min_gap, 2.0 * std::abs(pts.front()[detail::axis_coordinate(pts.front(), sig)]));
    if (like.back == EndKind::axis)
      k.min_gap = std::min(k.min_gap, 2.0 * std::abs(pts.back()[detail::axis_coordinate(pts.back(), sig)]));
  }
}

// Velocity from the geometry already stored on the surface.
Kinematics stored_velocity(const DiscreteHypersurface& s) {
  Kinematics k;
  const int N = s.size();
  k.move.assign(N, Vec2::Zero());
  for (int i = 0; i < N; ++i) {
    k.max_A_sq = std::max(k.max_A_sq, s.norm_A_sq(i));
    if (pinned(s, i)) continue;
    double V = -s.mean_curvature(i) + 0.5 * s.support(i);
    k.move[i] = V * s.cells[i].normal;
  }
  measure_gaps(profile_points(s), s, k);
  return k;
}

// Velocity from finite differences of the sample positions; `orientation`
// (+1 or -1) keeps the normal continuous with the starting surface.
Kinematics fd_velocity(const std::vector<Vec2>& pts, const DiscreteHypersurface& like, double orientation) {
  Kinematics k;
  const int N = static_cast<int>(pts.size());
  const RotationSignature sig = like.signature;
  const bool closed = like.topology == Topology::closed;
  k.move.assign(N, Vec2::Zero());
  Vec2 gf = Vec2::Zero(), gb = Vec2::Zero();
  if (!closed) {
    gf = detail::end_ghost(pts, true, like.front, sig);
    gb = detail::end_ghost(pts, false, like.back, sig);
  }
  for (int i = 0; i < N; ++i) {
    const Vec2& C = pts[i];
    if ((sig.p > 0 && C.x() <= 0.0) || (sig.q > 0 && C.y() <= 0.0)) {
      k.ok = false;
      k.problem = "profile reached a rotation axis";
      return k;
    }
    const Vec2& P = i > 0 ? pts[i - 1] : (closed ? pts[N - 1] : gf);
    const Vec2& Q = i + 1 < N ? pts[i + 1] : (closed ? pts[0] : gb);
    detail::LocalGeometry g = detail::local_geometry(P, C, Q);
    if (!g.ok) {
      k.ok = false;
      k.problem = "samples collapsed";
      return k;
    }
    Vec2 nrm = orientation * g.normal;
    double kp = orientation * g.kappa;
    double k1 = sig.p > 0 ? nrm.x() / C.x() : 0.0;
    double k2 = sig.q > 0 ? nrm.y() / C.y() : 0.0;
    k.max_A_sq = std::max(k.max_A_sq, kp * kp + sig.p * k1 * k1 + sig.q * k2 * k2);
    if (pinned(like, i)) continue;
    double H = kp + sig.p * k1 + sig.q * k2;
    k.move[i] = (-H + 0.5 * C.dot(nrm)) * nrm;
  }
  measure_gaps(pts, like, k);
  return k;
}

double orientation_of(const DiscreteHypersurface& s) {
  auto pts = profile_points(s);
  const int i = s.size() / 2;
  const int N = s.size();
  const Vec2& P = pts[(i + N - 1) % N];
  const Vec2& Q = pts[(i + 1) % N];
  detail::LocalGeometry g = detail::local_geometry(P, pts[i], Q);
  return g.normal.dot(s.cells[i].normal) >= 0.0 ? 1.0 : -1.0;
}

double step_bound(const Kinematics& k, double stability) {
  return stability * k.min_gap * k.min_gap / (1.0 + k.max_A_sq);
}

std::string singular_reason(const Kinematics& k, const FlowOptions& opt) {
  if (!k.ok) return k.problem;
  double maxA = std::sqrt(k.max_A_sq);
  if (maxA * k.mean_gap > 1.0) return "max|A| h exceeded 1";
  if (maxA > opt.curvature_cap) return "max|A| exceeded the curvature cap";
  return {};
}

bool spacing_drifted(const std::vector<Vec2>& pts, const DiscreteHypersurface& like, double drift, double& ratio) {
  const int N = static_cast<int>(pts.size());
  const int segments = like.topology == Topology::closed ? N : N - 1;
  double mn = std::numeric_limits<double>::infinity(), mx = 0.0, total = 0.0;
  for (int i = 0; i < segments; ++i) {
    double g = (pts[(i + 1) % N] - pts[i]).norm();
    mn = std::min(mn, g);
    mx = std::max(mx, g);
    total += g;
  }
  const double mean = total / segments;
  ratio = mx / mn;
  return mx > (1.0 + drift) * mean || mn < (1.0 - drift) * mean;
}

Snapshot make_snapshot(double s, DiscreteHypersurface surf) {
  Snapshot snap;
  snap.s = s;
  snap.F = f_functional(surf, GaussianWindow::standard(surf.signature.ambient_dim()));
  snap.min_H = std::numeric_limits<double>::infinity();
  for (int i = 0; i < surf.size(); ++i) {
    snap.max_A = std::max(snap.max_A, std::sqrt(surf.norm_A_sq(i)));
    if (surf.cells[i].resolved) snap.min_H = std::min(snap.min_H, surf.mean_curvature(i));
  }
  snap.surface = std::move(surf);
  return snap;
}

}  // namespace

double stable_step(const DiscreteHypersurface& s, double stability) {
  return step_bound(stored_velocity(s), stability);
}

DiscreteHypersurface rescaled_flow_step(const DiscreteHypersurface& s, double ds, const FlowOptions& opt) {
  if (!(ds > 0.0)) throw Rejection("flow", "step size must be positive");
  Kinematics k1 = stored_velocity(s);
  const double bound = step_bound(k1, opt.stability);
  if (ds > bound * (1.0 + 1e-12))
    throw Rejection("flow", "step " + std::to_string(ds) + " exceeds the stability bound " + std::to_string(bound));
  std::string why = singular_reason(k1, opt);
  if (!why.empty()) throw Rejection("singularity", why);
  const std::vector<Vec2> x = profile_points(s);
  const int N = s.size();
  std::vector<Vec2> mid(N), out(N);
  bool moved = false;
  for (int i = 0; i < N; ++i) {
    mid[i] = x[i] + ds * k1.move[i];
    moved = moved || mid[i] != x[i];
  }
  // The stored geometry belongs to these exact sample positions, so it is only
  // replaced by finite differences once the samples actually move.
  Kinematics k2 = moved ? fd_velocity(mid, s, orientation_of(s)) : k1;
  if (!k2.ok) throw Rejection("singularity", k2.problem);
  bool changed = false;
  for (int i = 0; i < N; ++i) {
    out[i] = x[i] + 0.5 * ds * (k1.move[i] + k2.move[i]);
    changed = changed || out[i] != x[i];
  }
  if (!changed) return s;
  return rebuild_geometry(s, out, s.provenance == Provenance::perturbed ? Provenance::perturbed
                                                                        : Provenance::discretized);
}

DiscreteHypersurface remesh(const DiscreteHypersurface& s) {
  using boost::math::interpolators::pchip;
  const auto pts = profile_points(s);
  const int N = s.size();
  const RotationSignature sig = s.signature;
  std::vector<Vec2> poly;
  std::vector<double> targets(N);
  std::vector<Vec2> out(N);
  if (s.topology == Topology::closed) {
    // Pad three samples on each side so the interpolant is periodic near the seam.
    const int pad = 3;
    std::vector<double> arc(N + 1, 0.0);
    for (int i = 0; i < N; ++i) arc[i + 1] = arc[i] + (pts[(i + 1) % N] - pts[i]).norm();
    const double L = arc[N];
    std::vector<double> t, u, v;
    for (int i = -pad; i <= N + pad; ++i) {
      int j = ((i % N) + N) % N;
      double shift = std::floor(static_cast<double>(i) / N) * L;
      t.push_back(arc[j] + shift);
      u.push_back(pts[j].x());
      v.push_back(pts[j].y());
    }
    auto tu = t;
    pchip<std::vector<double>> fu(std::move(tu), std::move(u));
    pchip<std::vector<double>> fv(std::move(t), std::move(v));
    for (int i = 0; i < N; ++i) {
      double a = L * i / N;
      out[i] = Vec2(fu(a), fv(a));
    }
  } else {
    auto axis_point = [&](const Vec2& e) {
      Vec2 a = e;
      a[detail::axis_coordinate(e, sig)] = 0.0;
      return a;
    };
    if (s.front == EndKind::axis) poly.push_back(axis_point(pts.front()));
    poly.insert(poly.end(), pts.begin(), pts.end());
    if (s.back == EndKind::axis) poly.push_back(axis_point(pts.back()));
    std::vector<double> t(poly.size(), 0.0), u, v;
    for (size_t i = 1; i < poly.size(); ++i) t[i] = t[i - 1] + (poly[i] - poly[i - 1]).norm();
    for (const Vec2& q : poly) {
      u.push_back(q.x());
      v.push_back(q.y());
    }
    const double L = t.back();
    const bool fa = s.front == EndKind::axis, ba = s.back == EndKind::axis;
    for (int i = 0; i < N; ++i) {
      if (fa && ba) {
        targets[i] = (i + 0.5) * L / N;
      } else if (fa) {
        targets[i] = (i + 0.5) * L / (N - 0.5);
      } else if (ba) {
        targets[i] = i * L / (N - 0.5);
      } else {
        targets[i] = i * L / (N - 1);
      }
    }
    auto tu = t;
    pchip<std::vector<double>> fu(std::move(tu), std::move(u));
    pchip<std::vector<double>> fv(std::move(t), std::move(v));
    for (int i = 0; i < N; ++i) out[i] = Vec2(fu(targets[i]), fv(targets[i]));
    if (!fa) out.front() = pts.front();
    if (!ba) out.back() = pts.back();
  }
  return rebuild_geometry(s, out, s.provenance == Provenance::analytic ? Provenance::discretized : s.provenance);
}

FlowTrajectory run_rescaled_flow(const DiscreteHypersurface& start, double s_max, const FlowOptions& opt,
                                 const SnapshotObserver& observer) {
  if (!(s_max > 0.0)) throw Rejection("flow", "s_max must be positive");
  FlowTrajectory traj;
  DiscreteHypersurface like = start;
  std::vector<Vec2> x = profile_points(start);
  bool stored_valid = true;  // `like` carries geometry for exactly these samples
  const double orientation = orientation_of(start);
  const int N = start.size();
  std::vector<Vec2> mid(N);

  auto emit = [&](double s) {
    DiscreteHypersurface surf =
        stored_valid ? like
                     : rebuild_geometry(like, x, like.provenance == Provenance::perturbed ? Provenance::perturbed
                                                                                          : Provenance::discretized);
    Snapshot snap = make_snapshot(s, std::move(surf));
    if (observer) observer(snap);
    traj.snapshots.push_back(std::move(snap));
  };

  emit(0.0);
  double s = 0.0;
  int next_index = 1;
  traj.smallest_step = std::numeric_limits<double>::infinity();
  while (s < s_max) {
    Kinematics k1 = stored_valid ? stored_velocity(like) : fd_velocity(x, like, orientation);
    std::string why = singular_reason(k1, opt);
    if (!why.empty()) {
      traj.singular = true;
      traj.singular_s = s;
      traj.singular_reason = why;
      break;
    }
    const double target = std::min(s_max, next_index * opt.cadence);
    double ds = step_bound(k1, opt.stability);
    if (opt.max_step > 0.0) ds = std::min(ds, opt.max_step);
    bool lands = false;
    if (s + ds >= target) {
      ds = target - s;
      lands = true;
    }
    bool moved = false;
    for (int i = 0; i < N; ++i) {
      mid[i] = x[i] + ds * k1.move[i];
      moved = moved || mid[i] != x[i];
    }
    Kinematics k2 = moved ? fd_velocity(mid, like, orientation) : k1;
    if (!k2.ok) {
      traj.singular = true;
      traj.singular_s = s;
      traj.singular_reason = k2.problem;
      break;
    }
    bool changed = false;
    for (int i = 0; i < N; ++i) {
      Vec2 nx = x[i] + 0.5 * ds * (k1.move[i] + k2.move[i]);
      changed = changed || nx != x[i];
      x[i] = nx;
    }
    if (changed) stored_valid = false;
    s = lands ? target : s + ds;
    ++traj.steps;
    traj.smallest_step = std::min(traj.smallest_step, ds);
    traj.largest_step = std::max(traj.largest_step, ds);

    double ratio = 1.0;
    if (changed && spacing_drifted(x, like, opt.spacing_drift, ratio)) {
      DiscreteHypersurface current = rebuild_geometry(like, x, Provenance::discretized);
      DiscreteHypersurface fresh = remesh(current);
      x = profile_points(fresh);
      traj.remeshes.push_back({s, ratio});
    }
    if (lands) {
      emit(s);
      ++next_index;
    }
  }
  if (!std::isfinite(traj.smallest_step)) traj.smallest_step = 0.0;
  return traj;
}

MonotonicityAudit monotonicity_audit(const FlowTrajectory& traj, double tolerance) {
  if (traj.snapshots.empty()) throw Rejection("monotonicity", "empty trajectory");
  MonotonicityAudit a;
  a.max_increase = -std::numeric_limits<double>::infinity();
  for (size_t i = 1; i < traj.snapshots.size(); ++i)
    a.max_increase = std::max(a.max_increase, traj.snapshots[i].F - traj.snapshots[i - 1].F);
  if (traj.snapshots.size() == 1) a.max_increase = 0.0;
  a.pass = a.max_increase <= tolerance;
  return a;
}

FlowTrajectory rescale_about(const std::vector<std::pair<double, DiscreteHypersurface>>& flow, const VecN& x0,
                             double t0) {
  FlowTrajectory traj;
  double last_t = -std::numeric_limits<double>::infinity();
  for (const auto& [t, surf] : flow) {
    if (!(t < t0)) throw Rejection("rescale", "every slice time must precede t0");
    if (!(t > last_t)) throw Rejection("rescale", "slice times must increase");
    last_t = t;
    const int p = surf.signature.p, q = surf.signature.q;
    if (x0.size() != surf.signature.ambient_dim()) throw Rejection("rescale", "centre has the wrong dimension");
    VecN rest = x0;
    double du = 0.0, dv = 0.0;
    if (p == 0) {
      du = x0[0];
      rest[0] = 0.0;
    }
    if (q == 0) {
      dv = x0[p + 1];
      rest[p + 1] = 0.0;
    }
    if (rest.norm() != 0.0) throw Rejection("rescale", "centre breaks the rotational symmetry of the slice");
    DiscreteHypersurface moved = translated(surf, -du, -dv);
    traj.snapshots.push_back(make_snapshot(-std::log(t0 - t), scaled(moved, 1.0 / std::sqrt(t0 - t))));
  }
  return traj;
}

double cylinder_entropy(int k) {
  if (k == 0) return 1.0;
  return std::pow(k / (2.0 * std::numbers::pi * std::numbers::e), 0.5 * k) * sphere_area(k);
}

GapReport gap_experiment(int k, int n, const PerturbationSpec& perturbation, const GapOptions& opt) {
  DiscreteHypersurface start = analytic_shrinker({k, n}, opt.resolution);
  if (perturbation.amplitude != 0.0)
    start = perturb_normal(start, profile_wave(start, perturbation.amplitude, perturbation.wavenumber), true);
  GapReport rep;
  rep.initial_entropy = entropy(start).lambda;
  if (rep.initial_entropy > opt.lambda0)
    throw Rejection("gap", "perturbed entropy " + std::to_string(rep.initial_entropy) + " exceeds lambda0");

  const TestFunctionFamily fam = make_test_family(start.signature.ambient_dim(), opt.test_functions);
  std::vector<std::vector<double>> integrals;
  rep.trajectory = run_rescaled_flow(start, opt.s_budget, opt.flow,
                                     [&](Snapshot& snap) { integrals.push_back(test_integrals(snap.surface, fam)); });
  const auto& snaps = rep.trajectory.snapshots;

  // Unit intervals [m, m+1] fully covered by the trajectory.
  int first = 0;
  for (int m = 0;; ++m) {
    int last = -1;
    for (int j = first; j < static_cast<int>(snaps.size()); ++j)
      if (std::abs(snaps[j].s - (m + 1)) <= 1e-9) last = j;
    if (last < 0) break;
    GapInterval iv;
    iv.s_start = snaps[first].s;
    iv.s_end = snaps[last].s;
    iv.F_drop = snaps[first].F - snaps[last].F;
    for (int j = first; j <= last; ++j)
      iv.dV_drift = std::max(iv.dV_drift, measure_distance_from_integrals(integrals[j], integrals[first], fam));
    rep.intervals.push_back(iv);
    first = last;
  }

  const Snapshot& last = snaps.back();
  rep.final_F = last.F;
  rep.final_dV = cylinder_fit(last.surface, k, fam, opt.resolution).distance;
  rep.entropy_drop = cylinder_entropy(k) - last.F;
  if (rep.trajectory.singular) {
    rep.outcome = "escaped-with-singularity";
  } else {
    rep.outcome = rep.final_dV <= opt.return_threshold ? "returned-to-cylinder" : "escaped";
  }
  return rep;
}

}  // namespace mcf
