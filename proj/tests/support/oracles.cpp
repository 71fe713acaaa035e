#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace oracle {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct State {
  double x, y, theta;
};

// Arclength-parametrised shrinker curve: curvature equals <x, n>/2 with n the
// inward normal, so theta' = (x sin(theta) - y cos(theta))/2.
State derivative(const State& s) {
  return {std::cos(s.theta), std::sin(s.theta), 0.5 * (s.x * std::sin(s.theta) - s.y * std::cos(s.theta))};
}

State advance(const State& s, double h) {
  auto add = [](const State& a, const State& b, double f) {
    return State{a.x + f * b.x, a.y + f * b.y, a.theta + f * b.theta};
  };
  State k1 = derivative(s);
  State k2 = derivative(add(s, k1, h / 2));
  State k3 = derivative(add(s, k2, h / 2));
  State k4 = derivative(add(s, k3, h));
  return {s.x + h / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x), s.y + h / 6 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y),
          s.theta + h / 6 * (k1.theta + 2 * k2.theta + 2 * k3.theta + k4.theta)};
}

double radial_speed(const State& s) { return s.x * std::cos(s.theta) + s.y * std::sin(s.theta); }

// Integrates from the innermost point until the radius stops growing and
// returns (arclength, polar angle swept).
std::pair<double, double> half_period(double r0) {
  const double h = 1e-3;
  State s{r0, 0.0, kPi / 2};
  double length = 0.0;
  State next = advance(s, h);
  while (radial_speed(next) > 0.0 || length == 0.0) {
    s = next;
    length += h;
    next = advance(s, h);
    if (length > 50.0) throw std::runtime_error("no turning point");
  }
  // Bisect the last step for the turning point.
  double lo = 0.0, hi = h;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    (radial_speed(advance(s, mid)) > 0.0 ? lo : hi) = mid;
  }
  State end = advance(s, lo);
  return {length + lo, std::atan2(end.y, end.x)};
}

}  // namespace

double unit_sphere_area(int k) { return 2.0 * std::pow(kPi, (k + 1) / 2.0) / std::tgamma((k + 1) / 2.0); }

double cylinder_entropy(int k) {
  if (k == 0) return 1.0;
  return std::pow(k / (2.0 * kPi * std::exp(1.0)), k / 2.0) * unit_sphere_area(k);
}

double circle_F(double r) { return std::sqrt(kPi) * r * std::exp(-r * r / 4.0); }

double radial_radius(double r0, double s) { return std::sqrt(2.0 - (2.0 - r0 * r0) * std::exp(s)); }

ShrinkerCurve closed_shrinker_curve(int turns, int lobes, int samples_per_half_period) {
  const double target = turns * kPi / lobes;
  // The swept angle decreases from pi/sqrt(2) as r0 drops below sqrt(2).
  double lo = 0.1, hi = 1.3;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    (half_period(mid).second > target ? hi : lo) = mid;
  }
  ShrinkerCurve c;
  c.r0 = 0.5 * (lo + hi);
  c.half_period = half_period(c.r0).first;
  const int total = 2 * lobes * samples_per_half_period;
  const double spacing = c.half_period / samples_per_half_period;
  const int sub = 20;
  State s{c.r0, 0.0, kPi / 2};
  // Sample at cell centres, half a spacing from the starting point.
  double shift = 0.5 * spacing;
  for (int j = 0; j < sub; ++j) s = advance(s, shift / sub);
  for (int i = 0; i < total; ++i) {
    c.points.emplace_back(s.x, s.y);
    for (int j = 0; j < sub; ++j) s = advance(s, spacing / sub);
  }
  return c;
}

double circumcircle_curvature(const Point& a, const Point& b, const Point& c) {
  Point ab = b - a, bc = c - b, ac = c - a;
  double cross = ab.x() * bc.y() - ab.y() * bc.x();
  return 2.0 * cross / (ab.norm() * bc.norm() * ac.norm());
}

IntrinsicCurvature intrinsic_curvature(const Point& prev, const Point& here, const Point& next) {
  // Non-uniform centred differences with chord lengths standing in for arclength.
  double h0 = (here - prev).norm(), h1 = (next - here).norm();
  auto first = [&](double f0, double f1, double f2) {
    return (h0 * h0 * (f2 - f1) + h1 * h1 * (f1 - f0)) / (h0 * h1 * (h0 + h1));
  };
  auto second = [&](double f0, double f1, double f2) {
    return 2.0 * (h0 * (f2 - f1) - h1 * (f1 - f0)) / (h0 * h1 * (h0 + h1));
  };
  double u = here.x(), v = here.y();
  double du = first(prev.x(), u, next.x()), dv = first(prev.y(), v, next.y());
  double ddu = second(prev.x(), u, next.x()), ddv = second(prev.y(), v, next.y());
  // Normalise the tangent so |(u', v')| = 1 exactly at this order.
  double speed = std::hypot(du, dv);
  du /= speed;
  dv /= speed;
  IntrinsicCurvature k;
  k.K[0][1] = k.K[1][0] = -ddu / u;
  k.K[0][2] = k.K[2][0] = -ddv / v;
  k.K[1][1] = (1.0 - du * du) / (u * u);
  k.K[2][2] = (1.0 - dv * dv) / (v * v);
  k.K[1][2] = k.K[2][1] = -du * dv / (u * v);
  return k;
}

}  // namespace oracle
