#include "mcf/rigidity.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "mcf/field.hpp"
#include "mcf/format.hpp"
#include "mcf/test_family.hpp"

namespace mcf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Splits sorted values into a lower and an upper group minimising the summed
// squared deviation (1-D two-means). Returns the size of the lower group; equal
// values stay together in one group.
int two_means_split(const std::vector<double>& sorted) {
  const int m = static_cast<int>(sorted.size());
  if (m < 2 || sorted.back() - sorted.front() <= 1e-12) return 0;
  double best = kInf;
  int split = 0;
  for (int j = 1; j < m; ++j) {
    double sse = 0.0;
    for (int part = 0; part < 2; ++part) {
      int a = part == 0 ? 0 : j, b = part == 0 ? j : m;
      double mean = 0.0;
      for (int i = a; i < b; ++i) mean += sorted[i];
      mean /= (b - a);
      for (int i = a; i < b; ++i) sse += (sorted[i] - mean) * (sorted[i] - mean);
    }
    if (sse < best) {
      best = sse;
      split = j;
    }
  }
  return split;
}

// Labels the eigenvalues of one cell. Each two-means group is named by its
// largest magnitude (near-zero) or its smallest value (spherical).
std::vector<Cluster> label_cell(const std::vector<double>& eig, int n, const ClusterOptions& opt) {
  const double nz = opt.near_zero_threshold(n), sp = opt.spherical_threshold(n);
  std::vector<int> order(eig.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return eig[a] < eig[b]; });
  std::vector<double> sorted;
  for (int i : order) sorted.push_back(eig[i]);
  const int split = two_means_split(sorted);
  std::vector<Cluster> out(eig.size(), Cluster::unclustered);
  auto label_group = [&](int a, int b) {
    if (a >= b) return;
    double largest_abs = 0.0, smallest = kInf;
    for (int i = a; i < b; ++i) {
      largest_abs = std::max(largest_abs, std::abs(sorted[i]));
      smallest = std::min(smallest, sorted[i]);
    }
    Cluster c = Cluster::unclustered;
    if (largest_abs < nz) c = Cluster::near_zero;
    else if (smallest >= sp) c = Cluster::spherical;
    for (int i = a; i < b; ++i) out[order[i]] = c;
  };
  label_group(0, split);
  label_group(split, static_cast<int>(sorted.size()));
  return out;
}

std::vector<double> tau_eigenvalues(const DiscreteHypersurface& s, int i) {
  std::vector<double> eig = s.principal_curvatures(i);
  const double H = s.mean_curvature(i);
  for (double& e : eig) e /= H;
  return eig;
}

std::string cell_list(const std::vector<int>& cells) {
  std::string out;
  for (size_t i = 0; i < cells.size() && i < 8; ++i) out += (i ? "," : "") + std::to_string(cells[i]);
  if (cells.size() > 8) out += ",...";
  return out;
}

}  // namespace

double ClusterOptions::near_zero_threshold(int n) const { return 1.0 / std::sqrt(near_zero_scale * n); }

double ClusterOptions::spherical_threshold(int n) const { return 1.0 / std::sqrt(spherical_scale * n); }

SpectrumReport tau_spectrum(const DiscreteHypersurface& s, double h_min, const ClusterOptions& opt) {
  SpectrumReport rep;
  std::vector<int> low;
  for (int i = 0; i < s.size(); ++i) {
    if (!s.cells[i].resolved) continue;
    if (s.mean_curvature(i) < h_min) low.push_back(i);
    rep.cells.push_back(i);
  }
  if (!low.empty())
    throw Rejection("spectrum", "H below " + num(h_min) + " at cells " + cell_list(low), low);
  if (rep.cells.empty()) throw Rejection("spectrum", "no resolved cells to examine");
  const int n = s.n();
  rep.consistent = true;
  rep.cluster_gap = kInf;
  for (int i : rep.cells) {
    const std::vector<double> curv = s.principal_curvatures(i);
    std::vector<double> eig = tau_eigenvalues(s, i);
    std::vector<Cluster> lab = label_cell(curv, n, opt);
    double trace = 0.0, max_nz = 0.0, min_sp = kInf;
    int near_zero = 0;
    for (size_t j = 0; j < eig.size(); ++j) {
      trace += eig[j];
      if (lab[j] == Cluster::unclustered) rep.consistent = false;
      if (lab[j] == Cluster::near_zero) {
        ++near_zero;
        max_nz = std::max(max_nz, std::abs(curv[j]));
      }
      if (lab[j] == Cluster::spherical) min_sp = std::min(min_sp, curv[j]);
    }
    rep.trace_error = std::max(rep.trace_error, std::abs(trace - 1.0));
    if (std::isfinite(min_sp)) rep.cluster_gap = std::min(rep.cluster_gap, min_sp - max_nz);
    int k = n - near_zero;
    if (rep.k < 0 && rep.eigenvalues.empty()) rep.k = k;
    else if (rep.k != k) rep.consistent = false;
    rep.eigenvalues.push_back(std::move(eig));
    rep.clusters.push_back(std::move(lab));
  }
  if (!std::isfinite(rep.cluster_gap)) rep.cluster_gap = 0.0;
  if (!rep.consistent) rep.k = -1;
  return rep;
}

double almost_parallel_curvature_bound(double eps, double kappa) {
  if (kappa == 0.0) throw Rejection("curvature-bound", "kappa must be nonzero");
  if (!(eps >= 0.0 && eps <= 1.0)) throw Rejection("curvature-bound", "eps must lie in [0, 1]");
  const double a = std::abs(kappa);
  return 2.0 * eps * (1.0 / a + 1.0 / (a * a));
}

ProductBound eigenvalue_product_bound(double eps, double delta, double kappa1, double kappa2) {
  if (kappa1 == kappa2) throw Rejection("product-bound", "eigenvalues must differ");
  if (!(delta > 0.0)) throw Rejection("product-bound", "delta must be positive");
  if (!(eps >= 0.0 && eps <= 1.0)) throw Rejection("product-bound", "eps must lie in [0, 1]");
  const double g = std::abs(kappa1 - kappa2);
  ProductBound out;
  out.bound = 2.0 * eps / (delta * delta) * (1.0 / g + 1.0 / (g * g));
  out.product = std::abs(kappa1 * kappa2);
  out.pass = out.product <= out.bound;
  return out;
}

AxisCoherence axis_coherence_check(const DiscreteHypersurface& s, int p, double L, double eps_tau, double C,
                                   const ClusterOptions& opt) {
  if (p < 0 || p >= s.size()) throw Rejection("axis-coherence", "cell index out of range");
  if (!(s.mean_curvature(p) > 0.0)) throw Rejection("axis-coherence", "H must be positive at the base cell", {p});
  const RotationSignature sig = s.signature;
  const int P = sig.p, Q = sig.q, dim = sig.ambient_dim();
  auto tangent_of = [&](int i) {
    VecN t = VecN::Zero(dim);
    t[0] = s.cells[i].tangent.x();
    t[P + 1] = s.cells[i].tangent.y();
    return t;
  };

  const std::vector<Cluster> lab = label_cell(s.principal_curvatures(p), s.n(), opt);
  std::vector<VecN> dirs;
  for (int j = 0; j < s.n(); ++j) {
    if (lab[j] != Cluster::near_zero) continue;
    if (j == 0) {
      dirs.push_back(tangent_of(p));
    } else {
      VecN e = VecN::Zero(dim);
      e[j <= P ? j : j + 1] = 1.0;  // orbit directions: 1..P, then P+2..P+Q+1
      dirs.push_back(e);
    }
  }
  if (dirs.empty()) throw Rejection("axis-coherence", "A/H has no near-zero eigenvalue at the base cell", {p});

  AxisCoherence out;
  out.directions = static_cast<int>(dirs.size());
  std::vector<char> seen(s.size(), 0);
  std::deque<int> queue{p};
  seen[p] = 1;
  const Vec2 xp = s.cells[p].position;
  while (!queue.empty()) {
    int i = queue.front();
    queue.pop_front();
    out.region.push_back(i);
    for (int j : {s.cells[i].prev, s.cells[i].next}) {
      if (j < 0 || seen[j] || (s.cells[j].position - xp).norm() > L) continue;
      seen[j] = 1;
      queue.push_back(j);
    }
  }
  std::sort(out.region.begin(), out.region.end());

  std::vector<double> kp(s.size()), k1(s.size()), k2(s.size());
  for (int i = 0; i < s.size(); ++i) {
    kp[i] = s.cells[i].kappa_profile;
    k1[i] = s.cells[i].kappa_first;
    k2[i] = s.cells[i].kappa_second;
  }
  for (int i : out.region) {
    const VecN nrm = s.ambient_normal(i);
    const VecN T = tangent_of(i);
    const double H = s.mean_curvature(i);
    const bool stencil = s.stencil_ok(i);
    double dkp = 0, dk1 = 0, dk2 = 0, w1 = 0, w2 = 0;
    if (stencil) {
      dkp = d_ds(s, kp, i);
      dk1 = P > 0 ? d_ds(s, k1, i) : 0.0;
      dk2 = Q > 0 ? d_ds(s, k2, i) : 0.0;
      w1 = first_warp(s, i);
      w2 = second_warp(s, i);
    }
    for (const VecN& v : dirs) {
      out.dev_v = std::max(out.dev_v, std::abs(v.dot(nrm)));
      const double a = v.dot(T);
      double b2 = 0.0, c2 = 0.0;
      for (int j = 1; j <= P; ++j) b2 += v[j] * v[j];
      for (int j = P + 2; j <= P + Q + 1; ++j) c2 += v[j] * v[j];
      const Cell& c = s.cells[i];
      if (H > 0.0) {
        double t2 = std::pow(c.kappa_profile / H, 2) * a * a + std::pow(c.kappa_first / H, 2) * b2 +
                    std::pow(c.kappa_second / H, 2) * c2;
        out.tau_v = std::max(out.tau_v, std::sqrt(t2));
      }
      if (stencil) {
        double g2 = a * a * (dkp * dkp + P * dk1 * dk1 + Q * dk2 * dk2) +
                    b2 * 2.0 * std::pow((c.kappa_profile - c.kappa_first) * w1, 2) +
                    c2 * 2.0 * std::pow((c.kappa_profile - c.kappa_second) * w2, 2);
        out.gradA_v = std::max(out.gradA_v, std::sqrt(g2));
      }
    }
  }
  out.bound_dev = C * (L + L * L) * eps_tau;
  out.bound_tau = C * (1.0 + L * L) * eps_tau;
  out.bound_gradA = C * (1.0 + L) * (1.0 + L * L) * eps_tau;
  out.pass = out.dev_v <= out.bound_dev && out.tau_v <= out.bound_tau && out.gradA_v <= out.bound_gradA;
  return out;
}

std::string RigidityCertificate::verdict() const {
  return is_cylinder() ? "cylinder-" + std::to_string(k) : "inconclusive";
}

RigidityCertificate classify_cylinder(const DiscreteHypersurface& s, double R, const HypothesisConstants& c,
                                      const ClassifyOptions& opt) {
  RigidityCertificate cert;
  cert.R = R;
  cert.constants = c;
  auto record = [&](const std::string& name, bool pass, const std::string& detail) {
    cert.checks.push_back({name, pass, detail});
    if (!pass && cert.failed_stage.empty()) cert.failed_stage = name;
    return pass;
  };
  auto attempt = [&](const std::string& name, auto&& body) {
    try {
      return body();
    } catch (const Rejection& e) {
      return record(name, false, e.what());
    }
  };

  // Grid-scale smoothness and embeddedness.
  bool ok = attempt("smoothness", [&] {
    if (s.empty()) return record("smoothness", false, "empty surface");
    check_embedded(profile_points(s), s.topology, s.mean_spacing());
    double worst = 0.0;
    for (const Cell& cell : s.cells) {
      if (!cell.resolved || ball_fraction(cell, R) <= 0.0) continue;
      double A = std::sqrt(cell.kappa_profile * cell.kappa_profile +
                           s.signature.p * cell.kappa_first * cell.kappa_first +
                           s.signature.q * cell.kappa_second * cell.kappa_second);
      worst = std::max(worst, A * cell.ds);
    }
    return record("smoothness", worst <= 1.0, "max |A| h = " + num(worst));
  });
  if (!ok) return cert;

  // Curvature hypotheses on B_R.
  cert.min_H = kInf;
  for (int i = 0; i < s.size(); ++i) {
    const Cell& cell = s.cells[i];
    if (!cell.resolved || ball_fraction(cell, R) <= 0.0) continue;
    cert.min_H = std::min(cert.min_H, s.mean_curvature(i));
    cert.max_A = std::max(cert.max_A, std::sqrt(s.norm_A_sq(i)));
  }
  if (!std::isfinite(cert.min_H)) return record("curvature-bounds", false, "no resolved cells in B_R"), cert;
  if (!record("curvature-bounds", cert.min_H >= c.delta0 && cert.max_A <= c.C0,
              "min H = " + num(cert.min_H) + ", max |A| = " + num(cert.max_A)))
    return cert;

  ok = attempt("tau-certificate", [&] {
    TauCertificate t = tau_gradient_certificate(s, R, c, opt.C_tau);
    cert.eps_tau = t.eps_tau;
    cert.tau_bound = t.bound;
    return record("tau-certificate", t.certified, "eps_tau = " + num(t.eps_tau) + ", bound = " + num(t.bound));
  });
  if (!ok) return cert;

  ok = attempt("spectrum", [&] {
    if (!(R > 2.0)) return record("spectrum", false, "R must exceed 2");
    cert.spectrum = tau_spectrum(restrict_to_ball(s, R - 2.0), c.delta0, opt.clusters);
    cert.k = cert.spectrum.k;
    cert.cluster_gap = cert.spectrum.cluster_gap;
    cert.trace_error = cert.spectrum.trace_error;
    return record("spectrum", cert.spectrum.consistent, "k = " + std::to_string(cert.spectrum.k));
  });
  if (!ok) return cert;

  ok = attempt("product-bound", [&] {
    double worst = 0.0;
    int checked = 0;
    bool pass = true;
    for (size_t ci = 0; ci < cert.spectrum.cells.size(); ++ci) {
      const auto& eig = cert.spectrum.eigenvalues[ci];
      const auto& lab = cert.spectrum.clusters[ci];
      double k1 = 0.0, k2 = kInf;
      bool has_zero = false;
      for (size_t j = 0; j < eig.size(); ++j) {
        if (lab[j] == Cluster::near_zero && std::abs(eig[j]) >= std::abs(k1)) {
          k1 = eig[j];
          has_zero = true;
        }
        if (lab[j] == Cluster::spherical) k2 = std::min(k2, eig[j]);
      }
      if (!has_zero || !std::isfinite(k2)) continue;
      ProductBound b = eigenvalue_product_bound(cert.eps_tau, c.delta0, k1, k2);
      ++checked;
      worst = std::max(worst, b.product - b.bound);
      pass = pass && b.pass;
    }
    return record("product-bound", pass,
                  std::to_string(checked) + " cells, max product - bound = " + num(checked ? worst : 0.0));
  });
  if (!ok) return cert;

  if (!record("audits", cert.trace_error <= opt.trace_tolerance && cert.cluster_gap > 0.0,
              "trace error = " + num(cert.trace_error) + ", cluster gap = " + num(cert.cluster_gap)))
    return cert;

  attempt("residual", [&] {
    const int reference = opt.reference_resolution > 0 ? opt.reference_resolution : s.size();
    CylinderFit fit =
        cylinder_fit(s, cert.k, make_test_family(s.signature.ambient_dim(), opt.test_functions), reference);
    cert.residual = fit.distance;
    return record("residual", fit.distance <= opt.residual_tolerance, "d_V = " + num(fit.distance));
  });
  return cert;
}

IterationTable iteration_experiment(const DiscreteHypersurface& s, double R_init, const IterationOptions& opt) {
  if (!(R_init > 0.0) || !(opt.theta > 0.0)) throw Rejection("iteration", "R_init and theta must be positive");
  if (s.empty()) throw Rejection("iteration", "empty surface");
  struct Extremes {
    double min_H = kInf, max_A = 0.0;
  };
  auto extremes = [&](double radius) {
    Extremes e;
    for (int i = 0; i < s.size(); ++i) {
      const Cell& cell = s.cells[i];
      if (!cell.resolved || radius <= 0.0 || ball_fraction(cell, radius) <= 0.0) continue;
      e.min_H = std::min(e.min_H, s.mean_curvature(i));
      e.max_A = std::max(e.max_A, std::sqrt(s.norm_A_sq(i)));
    }
    return e;
  };
  Extremes start = extremes(R_init);
  if (start.min_H < opt.sharp_H || start.max_A > opt.sharp_A)
    throw Rejection("iteration", "sharp bounds do not hold on the initial ball");

  // Free ends mark where the surface was cut; a compact surface ends at its
  // farthest point instead.
  const bool compact = s.topology == Topology::closed || (s.front == EndKind::axis && s.back == EndKind::axis);
  double edge = kInf, reach = 0.0;
  for (const Cell& cell : s.cells) {
    reach = std::max(reach, cell.position.norm());
    if (!cell.resolved) edge = std::min(edge, cell.position.norm());
  }
  if (!compact) {
    if (s.front == EndKind::free) edge = std::min(edge, s.cells.front().position.norm());
    if (s.back == EndKind::free) edge = std::min(edge, s.cells.back().position.norm());
  }

  IterationTable table;
  double R = R_init;
  for (int round = 1; round <= opt.rounds; ++round) {
    IterationRound r;
    r.round = round;
    r.R = R;
    r.relaxed_radius = (1.0 + opt.theta) * R;
    r.sharp_radius = r.relaxed_radius - 3.0;
    if (!compact && r.relaxed_radius > edge) {
      table.stop_reason = "truncation";
      table.pass = true;
      return table;
    }
    Extremes relaxed = extremes(r.relaxed_radius), sharp = extremes(r.sharp_radius);
    r.relaxed_min_H = relaxed.min_H;
    r.relaxed_max_A = relaxed.max_A;
    r.sharp_min_H = sharp.min_H;
    r.sharp_max_A = sharp.max_A;
    r.relaxed_pass = relaxed.min_H >= opt.delta0 && relaxed.max_A <= opt.C0;
    r.sharp_pass = sharp.min_H >= opt.sharp_H && sharp.max_A <= opt.sharp_A;
    table.rounds.push_back(r);
    if (!r.relaxed_pass) {
      table.stop_reason = relaxed.min_H < opt.delta0 ? "relaxed H >= " + num(opt.delta0) : "relaxed |A| <= " + num(opt.C0);
      return table;
    }
    if (!r.sharp_pass) {
      table.stop_reason = sharp.min_H < opt.sharp_H ? "sharp H >= " + num(opt.sharp_H) : "sharp |A| <= " + num(opt.sharp_A);
      return table;
    }
    if (compact && r.relaxed_radius >= reach) {
      table.stop_reason = "truncation";
      table.pass = true;
      return table;
    }
    R = r.relaxed_radius;
  }
  table.stop_reason = "rounds";
  table.pass = true;
  return table;
}

}  // namespace mcf
