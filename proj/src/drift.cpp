#include "mcf/drift.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mcf/gaussian.hpp"

namespace mcf {

namespace {

double log_density(RotationSignature sig, const Vec2& x, BaseWeight base, double g) {
  double r = 0.0;
  if (sig.p > 0) r += sig.p * std::log(std::abs(x.x()));
  if (sig.q > 0) r += sig.q * std::log(std::abs(x.y()));
  if (base == BaseWeight::gaussian) r -= 0.25 * x.squaredNorm();
  return r + std::log(g);
}

double gaussian_mass(const Cell& c) { return std::exp(-0.25 * c.position.squaredNorm()) * c.weight; }

IdentityNorm summarize(const DiscreteHypersurface& s, const std::vector<int>& cells,
                       const std::vector<double>& sq_values) {
  IdentityNorm out;
  double num = 0.0, den = 0.0;
  for (int i : cells) {
    out.sup = std::max(out.sup, std::sqrt(sq_values[i]));
    double m = gaussian_mass(s.cells[i]);
    num += sq_values[i] * m;
    den += m;
  }
  out.l2 = den > 0.0 ? std::sqrt(num / den) : 0.0;
  return out;
}


}  // namespace

OperatorStencil OperatorStencil::assemble(const DiscreteHypersurface& s, BaseWeight base,
                                          const std::vector<double>* g) {
  OperatorStencil st;
  const int N = s.size();
  st.sig_ = s.signature;
  st.mask_.assign(N, 0);
  st.prev_.assign(N, -1);
  st.next_.assign(N, -1);
  st.lower_.assign(N, 0.0);
  st.upper_.assign(N, 0.0);
  st.react1_.assign(N, 0.0);
  st.react2_.assign(N, 0.0);
  auto gval = [&](int i) { return g ? (*g)[i] : 1.0; };
  for (int i = 0; i < N; ++i) {
    if (!s.stencil_ok(i)) continue;
    const Cell& c = s.cells[i];
    const int j = c.prev, k = c.next;
    if (gval(i) <= 0.0 || gval(j) <= 0.0 || gval(k) <= 0.0)
      throw Rejection("drift", "operator weight must be positive near cell " + std::to_string(i), {i});
    const Vec2& xi = c.position;
    const Vec2& xj = s.cells[j].position;
    const Vec2& xk = s.cells[k].position;
    double hm = (xi - xj).norm(), hp = (xk - xi).norm();
    double mid = 0.5 * (hm + hp);
    double li = log_density(s.signature, xi, base, gval(i));
    double lm = log_density(s.signature, 0.5 * (xi + xj), base, 0.5 * (gval(i) + gval(j)));
    double lp = log_density(s.signature, 0.5 * (xi + xk), base, 0.5 * (gval(i) + gval(k)));
    st.lower_[i] = std::exp(lm - li) / (hm * mid);
    st.upper_[i] = std::exp(lp - li) / (hp * mid);
    st.react1_[i] = std::pow(first_warp(s, i), 2);
    st.react2_[i] = std::pow(second_warp(s, i), 2);
    st.prev_[i] = j;
    st.next_[i] = k;
    st.mask_[i] = 1;
    st.interior_.push_back(i);
  }
  if (st.interior_.size() < 5) throw Rejection("drift", "fewer than 5 interior cells for the operator stencil");
  return st;
}

Field OperatorStencil::apply(const Field& f) const {
  Field out = Field::zeros_like(f);
  const double p = sig_.p, q = sig_.q;
  auto lap = [&](const std::vector<double>& v, int i) {
    return lower_[i] * (v[prev_[i]] - v[i]) + upper_[i] * (v[next_[i]] - v[i]);
  };
  for (int i : interior_) {
    out.profile[i] = lap(f.profile, i);
    if (!f.is_tensor()) continue;
    double d1 = f.profile[i] - f.first[i];
    double d2 = f.profile[i] - f.second[i];
    out.profile[i] += -2.0 * p * d1 * react1_[i] - 2.0 * q * d2 * react2_[i];
    out.first[i] = lap(f.first, i) + 2.0 * d1 * react1_[i];
    out.second[i] = lap(f.second, i) + 2.0 * d2 * react2_[i];
  }
  return out;
}

Field drift_laplacian(const DiscreteHypersurface& s, const Field& u) {
  return OperatorStencil::assemble(s).apply(u);
}

Field stability_operator(const DiscreteHypersurface& s, const Field& u) {
  OperatorStencil st = OperatorStencil::assemble(s);
  Field out = st.apply(u);
  std::vector<double> pot(s.size(), 0.0);
  for (int i : st.interior()) pot[i] = s.norm_A_sq(i) + 0.5;
  return out + pointwise(u, pot);
}

Field weighted_drift_laplacian(const DiscreteHypersurface& s, const Field& u, const std::vector<double>& g) {
  return OperatorStencil::assemble(s, BaseWeight::gaussian, &g).apply(u);
}

double d_ds(const DiscreteHypersurface& s, const std::vector<double>& f, int i) {
  const Cell& c = s.cells[i];
  double hm = (c.position - s.cells[c.prev].position).norm();
  double hp = (s.cells[c.next].position - c.position).norm();
  double bm = (f[i] - f[c.prev]) / hm, bp = (f[c.next] - f[i]) / hp;
  return (bm * hp + bp * hm) / (hm + hp);
}

double d2_ds2(const DiscreteHypersurface& s, const std::vector<double>& f, int i) {
  const Cell& c = s.cells[i];
  double hm = (c.position - s.cells[c.prev].position).norm();
  double hp = (s.cells[c.next].position - c.position).norm();
  return 2.0 * ((f[c.next] - f[i]) / hp - (f[i] - f[c.prev]) / hm) / (hm + hp);
}

double first_warp(const DiscreteHypersurface& s, int i) {
  if (s.signature.p == 0) return 0.0;
  return s.cells[i].tangent.x() / s.cells[i].position.x();
}

double second_warp(const DiscreteHypersurface& s, int i) {
  if (s.signature.q == 0) return 0.0;
  return s.cells[i].tangent.y() / s.cells[i].position.y();
}

std::vector<double> gradient_sq(const DiscreteHypersurface& s, const Field& f) {
  std::vector<double> out(s.size(), 0.0);
  const double p = s.signature.p, q = s.signature.q;
  for (int i = 0; i < s.size(); ++i) {
    if (!s.stencil_ok(i)) continue;
    double a = d_ds(s, f.profile, i);
    if (!f.is_tensor()) {
      out[i] = a * a;
      continue;
    }
    double b = d_ds(s, f.first, i), c = d_ds(s, f.second, i);
    double A1 = first_warp(s, i), A2 = second_warp(s, i);
    double e1 = (f.profile[i] - f.first[i]) * A1;
    double e2 = (f.profile[i] - f.second[i]) * A2;
    out[i] = a * a + p * b * b + q * c * c + 2.0 * p * e1 * e1 + 2.0 * q * e2 * e2;
  }
  return out;
}

std::vector<double> gradient_dot(const DiscreteHypersurface& s, const Field& u, const Field& v) {
  std::vector<double> out(s.size(), 0.0);
  for (int i = 0; i < s.size(); ++i)
    if (s.stencil_ok(i)) out[i] = d_ds(s, u.profile, i) * d_ds(s, v.profile, i);
  return out;
}

std::vector<double> hessian_sq(const DiscreteHypersurface& s, const Field& f) {
  const int N = s.size();
  const double p = s.signature.p, q = s.signature.q;
  std::vector<double> out(N, 0.0);
  if (!f.is_tensor()) {
    for (int i = 0; i < N; ++i) {
      if (!s.stencil_ok(i)) continue;
      double fs = d_ds(s, f.profile, i), fss = d2_ds2(s, f.profile, i);
      double A1 = first_warp(s, i), A2 = second_warp(s, i);
      out[i] = fss * fss + p * std::pow(A1 * fs, 2) + q * std::pow(A2 * fs, 2);
    }
    return out;
  }
  // Off-diagonal connection components c = (α-β)u_s/u and d = (α-γ)v_s/v.
  std::vector<double> cc(N), dd(N);
  for (int i = 0; i < N; ++i) {
    cc[i] = (f.profile[i] - f.first[i]) * first_warp(s, i);
    dd[i] = (f.profile[i] - f.second[i]) * second_warp(s, i);
  }
  for (int i = 0; i < N; ++i) {
    if (!s.stencil_ok(i)) continue;
    const double A1 = first_warp(s, i), A2 = second_warp(s, i);
    const double as = d_ds(s, f.profile, i), bs = d_ds(s, f.first, i), gs = d_ds(s, f.second, i);
    const double ass = d2_ds2(s, f.profile, i), bss = d2_ds2(s, f.first, i), gss = d2_ds2(s, f.second, i);
    const double c = cc[i], d = dd[i];
    const double cs = d_ds(s, cc, i), ds_ = d_ds(s, dd, i);
    double total = ass * ass + p * bss * bss + q * gss * gss;
    // Mixed profile/orbit second derivatives.
    total += p * 2.0 * cs * cs;
    total += p * 2.0 * std::pow(A1 * (as - bs) - A1 * c, 2);
    total += q * 2.0 * ds_ * ds_;
    total += q * 2.0 * std::pow(A2 * (as - gs) - A2 * d, 2);
    // Two directions inside the same orbit factor.
    total += p * (p - 1) * 2.0 * c * c * A1 * A1;
    total += q * (q - 1) * 2.0 * d * d * A2 * A2;
    total += p * (std::pow(A1 * as - 2.0 * c * A1, 2) + std::pow(2.0 * c * A1 + A1 * bs, 2) +
                  (p - 1) * std::pow(A1 * bs, 2) + q * std::pow(A1 * gs, 2));
    total += q * (std::pow(A2 * as - 2.0 * d * A2, 2) + std::pow(2.0 * d * A2 + A2 * gs, 2) +
                  (q - 1) * std::pow(A2 * gs, 2) + p * std::pow(A2 * bs, 2));
    // One direction from each orbit factor.
    total += p * q * 2.0 * (d * d * A1 * A1 + c * c * A2 * A2);
    out[i] = total;
  }
  return out;
}

QuotientComparison weighted_quotient_laplacian(const DiscreteHypersurface& s, const Field& tau,
                                               const std::vector<double>& g, double g_min) {
  std::vector<int> bad;
  for (int i = 0; i < s.size(); ++i)
    if (s.stencil_ok(i) && std::abs(g[i]) < g_min) bad.push_back(i);
  if (!bad.empty())
    throw Rejection("quotient", std::to_string(bad.size()) + " interior cells have |g| below g_min", bad);
  std::vector<double> g2(s.size()), inv(s.size());
  for (int i = 0; i < s.size(); ++i) {
    g2[i] = g[i] * g[i];
    inv[i] = g[i] != 0.0 ? 1.0 / g[i] : 0.0;
  }
  OperatorStencil plain = OperatorStencil::assemble(s);
  OperatorStencil weighted = OperatorStencil::assemble(s, BaseWeight::gaussian, &g2);
  QuotientComparison out;
  out.lhs = weighted.apply(pointwise(tau, inv));
  Field Ltau = plain.apply(tau);
  std::vector<double> Lg = plain.apply(Field::scalar(g)).profile;
  std::vector<double> inv2(s.size()), coef(s.size());
  for (int i = 0; i < s.size(); ++i) {
    inv2[i] = inv[i] * inv[i];
    coef[i] = -Lg[i] * inv2[i];
  }
  out.rhs = pointwise(Ltau, inv) + pointwise(tau, coef);
  // Restrict the right side to the stencil set as well.
  for (int i = 0; i < s.size(); ++i) {
    if (plain.is_interior(i)) continue;
    out.rhs.profile[i] = 0.0;
    if (out.rhs.is_tensor()) out.rhs.first[i] = out.rhs.second[i] = 0.0;
  }
  out.cells = plain.interior();
  Field diff = out.lhs - out.rhs;
  for (int i : out.cells) out.sup_difference = std::max(out.sup_difference, std::sqrt(diff.norm_sq(i, s.signature)));
  return out;
}

double axis_distance(const DiscreteHypersurface& s, int i) {
  double d = std::numeric_limits<double>::infinity();
  if (s.signature.p > 0) d = std::min(d, std::abs(s.cells[i].position.x()));
  if (s.signature.q > 0) d = std::min(d, std::abs(s.cells[i].position.y()));
  return d;
}

SimonsReport simons_identity_check(const DiscreteHypersurface& s, const SimonsOptions& opt) {
  SimonsReport rep;
  rep.shrinker_residual = shrinker_residual(s).norms.sup;
  if (rep.shrinker_residual > opt.shrinker_tolerance)
    throw Rejection("simons", "surface is not a shrinker: residual sup " + std::to_string(rep.shrinker_residual));
  std::vector<int> low;
  std::vector<double> H(s.size()), H2(s.size());
  for (int i = 0; i < s.size(); ++i) {
    H[i] = s.mean_curvature(i);
    H2[i] = H[i] * H[i];
    if (s.stencil_ok(i) && H[i] < opt.g_min) low.push_back(i);
  }
  if (!low.empty()) throw Rejection("simons", "mean curvature below g_min on interior cells", low);
  // Neighbours of interior cells feed the weight; keep it positive there too.
  for (int i = 0; i < s.size(); ++i)
    if (H2[i] <= 0.0) H2[i] = opt.g_min * opt.g_min;

  OperatorStencil weighted = OperatorStencil::assemble(s, opt.base, &H2);
  OperatorStencil st = OperatorStencil::assemble(s, opt.base);
  Field tau = shape_quotient(s);
  Field r1 = weighted.apply(tau);

  std::vector<double> ratio(s.size());
  for (int i = 0; i < s.size(); ++i) ratio[i] = H2[i] > 0.0 ? s.norm_A_sq(i) / H2[i] : 0.0;
  Field r2 = weighted.apply(Field::scalar(ratio));
  std::vector<double> grad = gradient_sq(s, tau);

  std::vector<double> x2(s.size());
  for (int i = 0; i < s.size(); ++i) x2[i] = s.cells[i].position.squaredNorm();
  Field lx2 = st.apply(Field::scalar(x2));

  std::vector<int> cells;
  std::vector<double> sq1(s.size(), 0.0), sq2(s.size(), 0.0), sq0(s.size(), 0.0);
  for (int i : st.interior()) {
    sq0[i] = std::pow(lx2.profile[i] - (2.0 * s.n() - x2[i]), 2);
    if (axis_distance(s, i) < opt.axis_margin) continue;
    cells.push_back(i);
    sq1[i] = r1.norm_sq(i, s.signature);
    sq2[i] = std::pow(r2.profile[i] - 2.0 * grad[i], 2);
  }
  rep.res1 = summarize(s, cells, sq1);
  rep.res2 = summarize(s, cells, sq2);
  rep.coordinate = summarize(s, st.interior(), sq0);
  rep.cells_used = static_cast<int>(cells.size());
  return rep;
}

EffectiveBoundResult effective_gradient_bound(const DiscreteHypersurface& s, double R, double width,
                                              double tolerance) {
  if (!(width > 0.0 && width < R)) throw Rejection("effective", "need 0 < s < R");
  std::vector<int> bad;
  std::vector<double> clipR(s.size()), clipInner(s.size());
  for (int i = 0; i < s.size(); ++i) {
    clipR[i] = ball_fraction(s.cells[i], R);
    clipInner[i] = ball_fraction(s.cells[i], R - width);
  }
  double supA = 0.0, vol = 0.0;
  for (int i = 0; i < s.size(); ++i) {
    if (clipR[i] <= 0.0) continue;
    if (s.mean_curvature(i) <= 0.0) bad.push_back(i);
    supA = std::max(supA, s.norm_A_sq(i));
    vol += s.cells[i].full_weight * clipR[i];
  }
  if (!bad.empty()) throw Rejection("effective", "mean curvature not positive inside B_R", bad);
  Field tau = shape_quotient(s);
  std::vector<double> grad = gradient_sq(s, tau);
  EffectiveBoundResult out;
  for (int i = 0; i < s.size(); ++i) {
    if (clipInner[i] <= 0.0 || !s.stencil_ok(i)) continue;
    double H = s.mean_curvature(i);
    out.lhs += grad[i] * H * H * std::exp(-0.25 * s.cells[i].position.squaredNorm()) * s.cells[i].full_weight *
               clipInner[i];
  }
  out.rhs = 4.0 / (width * width) * supA * vol * std::exp(-0.25 * (R - width) * (R - width));
  out.pass = out.lhs <= out.rhs + tolerance;
  return out;
}

TauCertificate tau_gradient_certificate(const DiscreteHypersurface& s, double R, const HypothesisConstants& c,
                                        double C_tau) {
  TauCertificate out;
  out.min_H = std::numeric_limits<double>::infinity();
  for (int i = 0; i < s.size(); ++i) {
    const Cell& cell = s.cells[i];
    if (!cell.resolved || ball_fraction(cell, R) <= 0.0) continue;
    double H = s.mean_curvature(i), A = std::sqrt(s.norm_A_sq(i));
    out.min_H = std::min(out.min_H, H);
    out.max_A = std::max(out.max_A, A);
    if (H < c.delta0)
      throw Rejection("tau-certificate", "H below delta0 at cell " + std::to_string(i), {i});
    if (A > c.C0) throw Rejection("tau-certificate", "|A| above C0 at cell " + std::to_string(i), {i});
  }
  double F = f_functional(s, GaussianWindow::standard(s.signature.ambient_dim()));
  if (F > c.lambda0)
    throw Rejection("tau-certificate", "F at the standard window exceeds lambda0, so the entropy does too");
  Field tau = shape_quotient(s);
  std::vector<double> g = gradient_sq(s, tau);
  std::vector<double> hs = hessian_sq(s, tau);
  for (int i = 0; i < s.size(); ++i) {
    if (!s.stencil_ok(i) || s.cells[i].position.norm() > R - 2.0) continue;
    out.eps_tau = std::max(out.eps_tau, std::sqrt(g[i] + hs[i] / (R * R)));
    out.gradient_sup = std::max(out.gradient_sup, std::sqrt(g[i]));
    out.hessian_sup = std::max(out.hessian_sup, std::sqrt(hs[i]));
  }
  out.bound = C_tau * std::pow(R, 2 * s.n()) * std::exp(-R / 4.0);
  out.certified = out.eps_tau * out.eps_tau <= out.bound;
  return out;
}

}  // namespace mcf
