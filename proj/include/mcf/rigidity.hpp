#pragma once

#include <string>
#include <vector>

#include "mcf/drift.hpp"
#include "mcf/surface.hpp"

namespace mcf {

// Principal curvatures (eigenvalues of A) are called near-zero below
// 1/sqrt(near_zero_scale * n) and spherical from 1/sqrt(spherical_scale * n) up.
// On S^k(sqrt(2k)) x R^{n-k} they are 0 and 1/sqrt(2k).
struct ClusterOptions {
  double near_zero_scale = 100.0;
  double spherical_scale = 4.0;
  double near_zero_threshold(int n) const;
  double spherical_threshold(int n) const;
};

enum class Cluster { near_zero, spherical, unclustered };

struct SpectrumReport {
  std::vector<int> cells;                         // cells examined
  std::vector<std::vector<double>> eigenvalues;   // A/H per examined cell, frame order
  std::vector<std::vector<Cluster>> clusters;     // labels of the matching principal curvatures
  int k = -1;                  // n minus the near-zero count; -1 if cells disagree
  bool consistent = false;     // every eigenvalue clustered and all cells agree on k
  double cluster_gap = 0.0;    // min over cells of (smallest spherical - largest |near-zero|) curvature
  double trace_error = 0.0;    // max |tr(A/H) - 1|
};

// Spectrum of A/H on resolved cells, clustered by the principal curvatures.
// Throws, listing the cells, when H < h_min anywhere on them.
SpectrumReport tau_spectrum(const DiscreteHypersurface& s, double h_min, const ClusterOptions& opt = {});

// 2 eps (1/|kappa| + 1/kappa^2).
double almost_parallel_curvature_bound(double eps, double kappa);

struct ProductBound {
  double bound = 0.0;
  double product = 0.0;
  bool pass = false;
};

// |kappa1 kappa2| against 2 eps / delta^2 (1/|kappa1 - kappa2| + 1/|kappa1 - kappa2|^2).
ProductBound eigenvalue_product_bound(double eps, double delta, double kappa1, double kappa2);

struct AxisCoherence {
  double dev_v = 0.0;     // sup |v_i - v_i(p)|
  double tau_v = 0.0;     // sup |(A/H)(v_i)|
  double gradA_v = 0.0;   // sup |∇_{v_i} A|
  double bound_dev = 0.0;     // C (L + L²) eps
  double bound_tau = 0.0;     // C (1 + L²) eps
  double bound_gradA = 0.0;   // C (1 + L)(1 + L²) eps
  bool pass = false;
  int directions = 0;
  std::vector<int> region;
};

// Freezes the near-zero eigendirections of A/H at cell p as constant vectors,
// projects them onto the tangent spaces of the profile cells connected to p
// within distance L, and measures how far they are from being parallel, in
// the kernel of A/H, and A-parallel.
AxisCoherence axis_coherence_check(const DiscreteHypersurface& s, int p, double L, double eps_tau, double C = 100.0,
                                   const ClusterOptions& opt = {});

struct CheckOutcome {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ClassifyOptions {
  double C_tau = 1.0;
  double residual_tolerance = 0.02;  // d_V to the best-fit exact cylinder
  double trace_tolerance = 1e-10;
  int test_functions = 64;
  int reference_resolution = 0;  // samples of the reference cylinder; 0 matches the tested surface
  ClusterOptions clusters;
};

struct RigidityCertificate {
  double R = 0.0;
  HypothesisConstants constants;
  double min_H = 0.0;
  double max_A = 0.0;
  double eps_tau = 0.0;
  double tau_bound = 0.0;
  double cluster_gap = 0.0;
  double trace_error = 0.0;
  double residual = 0.0;
  int k = -1;
  std::vector<CheckOutcome> checks;
  std::string failed_stage;  // empty when every check passed
  SpectrumReport spectrum;
  bool is_cylinder() const { return failed_stage.empty() && k >= 0; }
  std::string verdict() const;  // "cylinder-k" or "inconclusive"
};

RigidityCertificate classify_cylinder(const DiscreteHypersurface& s, double R, const HypothesisConstants& c,
                                      const ClassifyOptions& opt = {});

struct IterationOptions {
  double theta = 0.1;
  double delta0 = 0.1;  // relaxed bounds
  double C0 = 4.0;
  double sharp_H = 0.25;
  double sharp_A = 2.0;
  int rounds = 5;
};

struct IterationRound {
  int round = 0;
  double R = 0.0;
  double relaxed_radius = 0.0;  // (1 + theta) R
  double sharp_radius = 0.0;    // (1 + theta) R - 3
  double relaxed_min_H = 0.0, relaxed_max_A = 0.0;
  double sharp_min_H = 0.0, sharp_max_A = 0.0;
  bool relaxed_pass = false;
  bool sharp_pass = false;
};

struct IterationTable {
  std::vector<IterationRound> rounds;
  std::string stop_reason;     // "rounds", "truncation" or the failing bound
  bool pass = false;
};

// Alternates the relaxed bounds on B_{(1+θ)R} with the sharp bounds on
// B_{(1+θ)R-3}, then sets R to (1+θ)R. Stops after the requested rounds, at the
// first failure, or when the ball reaches the edge of the surface.
IterationTable iteration_experiment(const DiscreteHypersurface& s, double R_init, const IterationOptions& opt = {});

}  // namespace mcf
