#include "mcf/gaussian.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "mcf/simplex.hpp"

namespace mcf {

namespace {

constexpr double kPi = std::numbers::pi;

// Cells longer than this multiple of sqrt(t0) are split into several
// quadrature pieces.
constexpr double kResolveFraction = 0.1;
constexpr double kGaussNodes[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                   0.8611363115940526};
constexpr double kGaussWeights[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                     0.3478548451374538};

// log of the mean of exp(z t) over the unit sphere S^m, t the first coordinate.
double log_orbit_mean(int m, double z) {
  if (z < 1e-8) return 0.0;
  switch (m) {
    case 1:
      return std::log(gsl_sf_bessel_I0_scaled(z)) + z;
    case 2:
      return z + std::log(-std::expm1(-2.0 * z) / (2.0 * z));
    case 3:
      return std::log(2.0 / z) + std::log(gsl_sf_bessel_I1_scaled(z)) + z;
    default: {
      double nu = 0.5 * (m - 1);
      return std::lgamma(nu + 1.0) + nu * std::log(2.0 / z) + std::log(gsl_sf_bessel_Inu_scaled(nu, z)) + z;
    }
  }
}

// log of the orbit kernel for one factor: coordinate c of the profile, centre
// component y (norm for m >= 1, signed for m = 0).
double log_factor_kernel(int m, double c, double y, double t0) {
  if (m == 0) return c * y / (2.0 * t0);
  return log_orbit_mean(m, std::abs(c) * y / (2.0 * t0));
}

struct Reduced {
  double y1;  // signed first-block coordinate when p = 0, else norm of the block
  double y2;
  double norm_sq;
};

Reduced reduce_center(const DiscreteHypersurface& s, const VecN& x0) {
  const int p = s.signature.p, q = s.signature.q;
  if (x0.size() != s.signature.ambient_dim()) throw Rejection("gaussian", "window centre has the wrong dimension");
  Reduced r;
  r.y1 = p == 0 ? x0[0] : x0.segment(0, p + 1).norm();
  r.y2 = q == 0 ? x0[p + 1] : x0.segment(p + 1, q + 1).norm();
  r.norm_sq = x0.squaredNorm();
  return r;
}

void check_window(const GaussianWindow& w) {
  if (!(w.t0 > 0.0)) throw Rejection("gaussian", "window scale t0 must be positive");
}

// Gaussian mass of the analytic flat factor beyond `cutoff` along the flat
// directions, times the sphere-orbit factor, normalised as F.
double flat_tail_beyond(const DiscreteHypersurface& s, const GaussianWindow& w, double cutoff) {
  if (!s.flat_tail) return 0.0;
  const FlatTail& tail = *s.flat_tail;
  const Reduced c = reduce_center(s, w.x0);
  const double t0 = w.t0;
  const int k = tail.sphere_dim, m = tail.flat_dim, n = s.n();
  const double r = tail.sphere_radius;
  double log_sphere;
  if (k >= 1) {
    log_sphere = std::log(sphere_area(k)) + k * std::log(r) - (r * r + c.y1 * c.y1) / (4.0 * t0) +
                 log_factor_kernel(k, r, c.y1, t0);
  } else {
    log_sphere = -(c.y1 * c.y1) / (4.0 * t0);
  }
  const double x = cutoff * cutoff / (2.0 * t0);
  const double lambda = c.y2 * c.y2 / (2.0 * t0);
  double survival;
  if (lambda == 0.0) {
    survival = boost::math::cdf(boost::math::complement(boost::math::chi_squared(m), x));
  } else {
    survival = boost::math::cdf(boost::math::complement(boost::math::non_central_chi_squared(m, lambda), x));
  }
  if (survival <= 0.0) return 0.0;
  return std::exp(log_sphere + 0.5 * (m - n) * std::log(4.0 * kPi * t0)) * survival;
}

// Per-cell F contributions. With outside_radius > 0 only the part of each
// cell's arc with |x| >= outside_radius is integrated.
std::vector<double> cell_contributions(const DiscreteHypersurface& s, const GaussianWindow& w,
                                       double outside_radius) {
  check_window(w);
  std::vector<double> out(s.size(), 0.0);
  if (s.empty()) return out;
  const int p = s.signature.p, q = s.signature.q;
  const Reduced c = reduce_center(s, w.x0);
  const double t0 = w.t0;
  const double log_norm = -0.5 * s.n() * std::log(4.0 * kPi * t0);
  const double log_orbit_const = (p > 0 ? std::log(sphere_area(p)) : 0.0) + (q > 0 ? std::log(sphere_area(q)) : 0.0);
  const double resolve = kResolveFraction * std::sqrt(t0);

  auto log_kernel = [&](const Vec2& x) {
    return log_norm - (x.squaredNorm() + c.norm_sq) / (4.0 * t0) + log_factor_kernel(p, x.x(), c.y1, t0) +
           log_factor_kernel(q, x.y(), c.y2, t0);
  };
  // Smallest |x - x0| over the orbit of x, used to skip cells far from the window.
  auto orbit_distance = [&](const Vec2& x) {
    double a = p == 0 ? x.x() - c.y1 : std::abs(x.x()) - c.y1;
    double b = q == 0 ? x.y() - c.y2 : std::abs(x.y()) - c.y2;
    return std::hypot(a, b);
  };

  for (int i = 0; i < s.size(); ++i) {
    const Cell& cell = s.cells[i];
    if (cell.weight <= 0.0) continue;
    const double lo_len = (cell.position - cell.edge_lo).norm(), hi_len = (cell.edge_hi - cell.position).norm();
    const double back = lo_len + hi_len > 0.0 ? cell.ds * lo_len / (lo_len + hi_len) : 0.5 * cell.ds;
    double reach = std::max(0.0, orbit_distance(cell.position) - cell.ds);
    if (reach * reach / (4.0 * t0) > 750.0) continue;
    // Gauss-Legendre in arclength along the osculating circle of the cell,
    // subdivided when the window is narrower than the cell.
    const double kappa = cell.kappa_profile;
    auto point = [&](double sigma) {
      double along = sigma, across = 0.0;
      if (kappa != 0.0) {
        along = std::sin(kappa * sigma) / kappa;
        double half = std::sin(0.5 * kappa * sigma);
        across = 2.0 * half * half / kappa;
      }
      return Vec2(cell.position + along * cell.tangent - across * cell.normal);
    };
    auto arc_integral = [&](double lo, double hi) {
      const int pieces = std::max(1, static_cast<int>(std::ceil((hi - lo) / resolve)));
      double sum = 0.0;
      for (int j = 0; j < pieces; ++j) {
        const double a = lo + (hi - lo) * j / pieces, b = lo + (hi - lo) * (j + 1) / pieces;
        for (int g = 0; g < 4; ++g) {
          const Vec2 x = point(0.5 * (a + b) + 0.5 * (b - a) * kGaussNodes[g]);
          double log_orbit = log_orbit_const;
          if (p > 0) log_orbit += p * std::log(std::abs(x.x()));
          if (q > 0) log_orbit += q * std::log(std::abs(x.y()));
          sum += 0.5 * (b - a) * kGaussWeights[g] * std::exp(log_orbit + log_kernel(x));
        }
      }
      return sum;
    };
    double integral = 0.0;
    if (outside_radius <= 0.0) {
      integral = arc_integral(-back, cell.ds - back);
    } else {
      // |x| is taken as monotone on each side of the cell centre; the crossing
      // of the sphere |x| = outside_radius is located by bisection.
      for (auto [from, to] : {std::pair{0.0, -back}, std::pair{0.0, cell.ds - back}}) {
        const bool from_out = point(from).norm() >= outside_radius, to_out = point(to).norm() >= outside_radius;
        if (from_out && to_out) {
          integral += arc_integral(std::min(from, to), std::max(from, to));
        } else if (from_out != to_out) {
          double in = from_out ? to : from, out = from_out ? from : to;
          for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (in + out);
            (point(mid).norm() >= outside_radius ? out : in) = mid;
          }
          const double cross = 0.5 * (in + out), far = from_out ? from : to;
          integral += arc_integral(std::min(cross, far), std::max(cross, far));
        }
      }
    }
    const double clip = cell.full_weight > 0.0 ? cell.weight / cell.full_weight : 1.0;
    out[i] = clip * integral;
  }
  return out;
}

}  // namespace

std::vector<double> f_contributions(const DiscreteHypersurface& s, const GaussianWindow& w) {
  return cell_contributions(s, w, 0.0);
}

double f_functional_cells(const DiscreteHypersurface& s, const GaussianWindow& w) {
  auto c = f_contributions(s, w);
  double total = 0.0;
  for (double v : c) total += v;
  return total;
}

double flat_tail_term(const DiscreteHypersurface& s, const GaussianWindow& w) {
  check_window(w);
  if (!s.flat_tail) return 0.0;
  return flat_tail_beyond(s, w, s.flat_tail->truncation);
}

double f_functional(const DiscreteHypersurface& s, const GaussianWindow& w) {
  return f_functional_cells(s, w) + flat_tail_term(s, w);
}

EntropyReport entropy(const DiscreteHypersurface& s, const EntropySearch& search) {
  if (s.empty()) throw Rejection("entropy", "entropy of an empty surface is undefined");
  const int p = s.signature.p, q = s.signature.q, dim = s.signature.ambient_dim();
  const double t_max = std::exp(search.log_t_range);
  const double inflate = 2.0 * std::sqrt(t_max);

  // Box for the reduced centre coordinates. A factor with an orbit only
  // needs nonnegative values; a signed factor needs both signs.
  double lo[2], hi[2];
  for (int a = 0; a < 2; ++a) {
    int m = a == 0 ? p : q;
    double mn = std::numeric_limits<double>::infinity(), mx = -mn;
    for (const Cell& c : s.cells) {
      double v = m == 0 ? c.position[a] : std::abs(c.position[a]);
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    lo[a] = m == 0 ? mn - inflate : 0.0;
    hi[a] = mx + inflate;
  }

  EntropyReport rep;
  auto window_of = [&](const std::vector<double>& z) {
    GaussianWindow w;
    w.x0 = VecN::Zero(dim);
    w.x0[0] = z[0];
    w.x0[p + 1] = z[1];
    w.t0 = std::exp(z[2]);
    return w;
  };
  auto value = [&](const std::vector<double>& z) {
    ++rep.evaluations;
    if (std::abs(z[2]) > search.log_t_range) return -std::numeric_limits<double>::infinity();
    return f_functional(s, window_of(z));
  };
  // Symmetric surfaces have whole families of maximising windows (any shift
  // along a flat factor), so near-ties go to the window closest to (0, 1).
  constexpr double tie = 1e-9;
  double argmax_value = -std::numeric_limits<double>::infinity();
  double argmax_offset = 0.0;
  auto offset = [](const std::vector<double>& z) { return std::hypot(z[0], z[1], z[2]); };
  auto record = [&](const std::vector<double>& z, double v) {
    rep.trace.push_back({window_of(z), v});
    const bool better = v > argmax_value + tie;
    const bool tied_closer = std::abs(v - argmax_value) <= tie && offset(z) < argmax_offset;
    if (rep.trace.size() == 1 || better || tied_closer) {
      argmax_value = v;
      argmax_offset = offset(z);
      rep.argmax = window_of(z);
    }
    if (rep.trace.size() == 1 || v > rep.lambda) rep.lambda = v;
  };

  std::vector<std::pair<double, std::vector<double>>> grid;
  const std::vector<double> standard{0.0, 0.0, 0.0};
  double f_standard = value(standard);
  record(standard, f_standard);
  grid.push_back({f_standard, standard});
  for (int i = 0; i < search.grid_x; ++i) {
    for (int j = 0; j < search.grid_x; ++j) {
      for (int k = 0; k < search.grid_t; ++k) {
        double a = lo[0] + (hi[0] - lo[0]) * i / std::max(1, search.grid_x - 1);
        double b = lo[1] + (hi[1] - lo[1]) * j / std::max(1, search.grid_x - 1);
        double lt = -search.log_t_range + 2.0 * search.log_t_range * k / std::max(1, search.grid_t - 1);
        std::vector<double> z{a, b, lt};
        double v = value(z);
        record(z, v);
        grid.push_back({v, z});
      }
    }
  }
  std::stable_sort(grid.begin(), grid.end(), [](const auto& x, const auto& y) { return x.first > y.first; });

  std::vector<std::vector<double>> starts{standard};
  for (int i = 0; i < static_cast<int>(grid.size()) && static_cast<int>(starts.size()) <= search.grid_starts; ++i)
    starts.push_back(grid[i].second);
  std::mt19937_64 rng(search.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int r = 0; r < search.random_starts; ++r) {
    starts.push_back({lo[0] + (hi[0] - lo[0]) * unit(rng), lo[1] + (hi[1] - lo[1]) * unit(rng),
                      search.log_t_range * (2.0 * unit(rng) - 1.0)});
  }

  const std::vector<double> steps{std::max(0.5, 0.05 * (hi[0] - lo[0])), std::max(0.5, 0.05 * (hi[1] - lo[1])),
                                  0.5};
  SimplexOptions opt;
  opt.tolerance = search.tolerance;
  opt.max_evaluations = search.max_evaluations;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& z0 : starts) {
    SimplexResult r = nelder_mead_minimize([&](const std::vector<double>& z) { return -value(z); }, z0, steps, opt);
    double v = -r.value;
    record(r.x, v);
    if (v > best) {
      best = v;
      rep.tolerance_achieved = r.diameter;
      rep.budget_exhausted = !r.converged;
    }
  }
  return rep;
}

TailCheck gaussian_tail(const DiscreteHypersurface& s, double R, double lambda0) {
  TailCheck out;
  const GaussianWindow w = GaussianWindow::standard(s.signature.ambient_dim());
  for (double v : cell_contributions(s, w, R)) out.tail += v;
  if (s.flat_tail) {
    const FlatTail& t = *s.flat_tail;
    double reach = std::sqrt(std::max(0.0, R * R - t.sphere_radius * t.sphere_radius));
    out.tail += flat_tail_beyond(s, w, std::max(t.truncation, reach));
  }
  out.bound = std::pow(2.0, 0.5 * s.n()) * std::exp(-R * R / 8.0) * lambda0;
  out.pass = out.tail <= out.bound;
  return out;
}

RescalingCheck rescaling_inequality_check(const DiscreteHypersurface& s, const VecN& y, double a, double scale,
                                          double shrinker_tolerance, double quadrature_tolerance) {
  if (!(scale > 1.0)) throw Rejection("rescaling", "scale factor must exceed 1");
  if (!(1.0 + a * scale * scale > 0.0) || !(1.0 + a > 0.0))
    throw Rejection("rescaling", "both window scales 1 + a and 1 + a s^2 must be positive");
  double res = shrinker_residual(s).norms.sup;
  if (res > shrinker_tolerance)
    throw Rejection("rescaling", "inequality only holds for shrinkers; residual sup " + std::to_string(res));
  RescalingCheck out;
  out.lhs = f_functional(s, {scale * y, 1.0 + a * scale * scale});
  out.rhs = f_functional(s, {y, 1.0 + a});
  out.pass = out.lhs <= out.rhs + quadrature_tolerance;
  return out;
}

}  // namespace mcf
