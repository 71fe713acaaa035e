#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "mcf/errors.hpp"

namespace mcf {

using Vec2 = Eigen::Vector2d;
using VecN = Eigen::VectorXd;

// Surface area of the unit sphere S^m in R^{m+1}.
double sphere_area(int m);

// The surface is {(u*w1, v*w2) : w1 in S^p, w2 in S^q} for a profile curve (u, v).
// A factor of dimension zero is treated as a signed coordinate rather than the
// two-point set S^0, so p = 0 lets u take either sign and contributes no orbit.
struct RotationSignature {
  int p = 0;
  int q = 0;
  int n() const { return p + q + 1; }
  int ambient_dim() const { return p + q + 2; }
  bool operator==(const RotationSignature&) const = default;
};

enum class Topology { open, closed };

// How an open profile terminates: on a rotation axis (the orbit collapses and
// the surface closes up smoothly) or at a truncation cut.
enum class EndKind { axis, free };

enum class Provenance { analytic, discretized, perturbed };

struct ProfileCurve {
  std::vector<Vec2> samples;
  Topology topology = Topology::open;
};

struct Cell {
  Vec2 position;                // (u, v)
  Vec2 normal;                  // unit normal inside the profile plane
  Vec2 tangent;                 // unit tangent pointing toward increasing index
  double kappa_profile = 0.0;   // curvature along the profile direction
  double kappa_first = 0.0;     // curvature of the p orbit directions
  double kappa_second = 0.0;    // curvature of the q orbit directions
  double ds = 0.0;              // profile arclength attributed to the cell
  double full_weight = 0.0;     // orbit measure of the whole cell
  double clip = 1.0;            // retained fraction after ball restriction
  double weight = 0.0;          // full_weight * clip
  Vec2 edge_lo;                 // half-edge point toward prev
  Vec2 edge_hi;                 // half-edge point toward next
  int prev = -1;
  int next = -1;
  bool resolved = true;         // geometry is second-order accurate here
  bool boundary = false;        // excluded from operator stencils
};

// Exact flat-factor data kept for analytic generalized cylinders, so that the
// Gaussian integral beyond the truncation can be added back in closed form.
struct FlatTail {
  int sphere_dim = 0;        // k
  double sphere_radius = 0;  // sqrt(2k) times any later scaling
  int flat_dim = 0;          // n - k
  double truncation = 0;     // cells cover |flat coordinate| <= truncation
};

class DiscreteHypersurface {
 public:
  RotationSignature signature;
  Provenance provenance = Provenance::discretized;
  Topology topology = Topology::open;
  EndKind front = EndKind::free;
  EndKind back = EndKind::free;
  std::vector<Cell> cells;
  std::optional<FlatTail> flat_tail;

  int size() const { return static_cast<int>(cells.size()); }
  bool empty() const { return cells.empty(); }
  int n() const { return signature.n(); }

  double mean_curvature(int i) const;
  double norm_A_sq(int i) const;
  // n principal curvatures: profile first, then p copies, then q copies.
  std::vector<double> principal_curvatures(int i) const;
  double support(int i) const { return cells[i].position.dot(cells[i].normal); }
  // Ambient representative: first orbit point (1,0,..), second orbit point (1,0,..).
  VecN ambient_position(int i) const;
  VecN ambient_normal(int i) const;
  bool stencil_ok(int i) const {
    const Cell& c = cells[i];
    return !c.boundary && c.prev >= 0 && c.next >= 0;
  }
  std::vector<int> stencil_cells() const;
  double mean_spacing() const;
};

struct GeneralizedCylinderSpec {
  int k = 1;
  int n = 2;
  double radius() const;
};

// Builds cells from profile samples. Samples are cell centres; ends that lie
// within 0.75h of a rotation axis are treated as axis ends.
DiscreteHypersurface build_from_profile(const ProfileCurve& profile, RotationSignature sig);

// Samples S^k(sqrt(2k)) x R^{n-k} exactly, truncating flat directions at
// |coordinate| <= truncation.
DiscreteHypersurface analytic_shrinker(const GeneralizedCylinderSpec& spec, int resolution,
                                       double truncation = 24.0);

struct NormSummary {
  double sup = 0.0;
  double l2 = 0.0;  // Gaussian-weighted L2 over the summarised cells
};

struct ShrinkerResidual {
  std::vector<double> values;  // H - <x,n>/2 per cell
  NormSummary norms;           // over resolved cells
};

ShrinkerResidual shrinker_residual(const DiscreteHypersurface& s);

DiscreteHypersurface restrict_to_ball(const DiscreteHypersurface& s, double R);

// Fraction of the cell's weight inside B_R, treating |x| as linear along each
// half of the cell and never exceeding an earlier clip.
double ball_fraction(const Cell& c, double R);

// Moves each sample by phi along its normal. With recompute the geometry is
// rebuilt from the moved samples; otherwise normals, curvatures and weights are
// carried over unchanged.
DiscreteHypersurface perturb_normal(const DiscreteHypersurface& s, const std::vector<double>& phi,
                                    bool recompute);

DiscreteHypersurface scaled(const DiscreteHypersurface& s, double factor);

// Shifts the profile plane. Only signed (zero-dimensional) factors can move
// without breaking the rotational symmetry, so a nonzero shift of an orbit
// coordinate is rejected.
DiscreteHypersurface translated(const DiscreteHypersurface& s, double du, double dv);

// Rebuilds geometry for new sample positions while keeping topology, end
// kinds and signature. Used by perturbation, flow and remeshing.
DiscreteHypersurface rebuild_geometry(const DiscreteHypersurface& like, const std::vector<Vec2>& pts,
                                      Provenance provenance);

std::vector<Vec2> profile_points(const DiscreteHypersurface& s);

// amplitude * cos(wavenumber * t) per cell, where t is the polar angle for
// closed profiles, the angle from the axis for profiles closing up at both
// ends, and pi/10 times the second profile coordinate otherwise (wavelength
// 20/wavenumber along a flat axis). Feeds perturb_normal.
std::vector<double> profile_wave(const DiscreteHypersurface& s, double amplitude, int wavenumber);

// Throws if two samples that are not neighbours come closer than h/2.
void check_embedded(const std::vector<Vec2>& pts, Topology topology, double h);

}  // namespace mcf
