#pragma once

// Reference values computed independently of the library: closed forms,
// direct ODE integration and finite differences on raw sample positions.

#include <Eigen/Dense>
#include <vector>

namespace oracle {

using Point = Eigen::Vector2d;

// Area of the unit k-sphere from the Gamma function.
double unit_sphere_area(int k);

// Entropy of S^k(sqrt(2k)) x R^m: (k/(2 pi e))^{k/2} |S^k|, and 1 for k = 0.
double cylinder_entropy(int k);

// Gaussian area F_{0,1} of the circle of radius r in the plane.
double circle_F(double r);

// Radius at rescaled time s of a round circle that starts at r0 under the
// rescaled curve shortening flow, r' = -1/r + r/2.
double radial_radius(double r0, double s);

// Closed shrinker curve with `lobes` symmetric half-period pairs. The starting
// radius is found by bisection so that each half period sweeps polar angle
// turns * pi / lobes.
struct ShrinkerCurve {
  double r0 = 0.0;
  double half_period = 0.0;  // arclength
  std::vector<Point> points;
};
ShrinkerCurve closed_shrinker_curve(int turns, int lobes, int samples_per_half_period);

// Curvature of the circle through three consecutive samples, signed so that a
// counterclockwise circle has positive curvature.
double circumcircle_curvature(const Point& a, const Point& b, const Point& c);

// Sectional curvatures of the rotation metric ds^2 + u^2 g_{S^p} + v^2 g_{S^q}
// computed from the profile samples alone, by centred differences in arclength.
// Entries are indexed by frame block: 0 profile, 1 first orbit, 2 second orbit.
struct IntrinsicCurvature {
  double K[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
};
IntrinsicCurvature intrinsic_curvature(const Point& prev, const Point& here, const Point& next);

}  // namespace oracle
