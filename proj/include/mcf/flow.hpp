#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mcf/surface.hpp"

namespace mcf {

struct FlowOptions {
  double stability = 0.2;        // ds <= stability * h_min² / (1 + max|A|²)
  double max_step = 0.0;         // optional cap on ds (0 = none)
  double cadence = 0.1;          // snapshot spacing in s
  double spacing_drift = 0.1;    // remesh once a gap leaves mean ± this fraction
  double curvature_cap = 50.0;   // |A| beyond this also ends the run as singular
};

struct Snapshot {
  double s = 0.0;
  DiscreteHypersurface surface;
  double F = 0.0;  // F_{0,1}(surface)
  double max_A = 0.0;
  double min_H = 0.0;
  double dV = 0.0;  // filled by observers that track a reference; 0 otherwise
};

struct RemeshEvent {
  double s = 0.0;
  double spacing_ratio = 0.0;  // max gap / min gap before the remesh
};

struct FlowTrajectory {
  std::vector<Snapshot> snapshots;
  std::vector<RemeshEvent> remeshes;
  int steps = 0;
  double smallest_step = 0.0;
  double largest_step = 0.0;
  bool singular = false;
  double singular_s = 0.0;
  std::string singular_reason;
};

// Largest explicit step allowed by the curvature-limited stability rule.
double stable_step(const DiscreteHypersurface& s, double stability = 0.2);

// One Heun step of the rescaled flow (∂_s x)^⊥ = -H ν + x^⊥/2. Free ends stay
// pinned. Throws when ds exceeds the stability bound.
DiscreteHypersurface rescaled_flow_step(const DiscreteHypersurface& s, double ds, const FlowOptions& opt = {});

// Arclength resampling of the profile with monotone cubic interpolation.
DiscreteHypersurface remesh(const DiscreteHypersurface& s);

using SnapshotObserver = std::function<void(Snapshot&)>;

FlowTrajectory run_rescaled_flow(const DiscreteHypersurface& s, double s_max, const FlowOptions& opt = {},
                                 const SnapshotObserver& observer = {});

struct MonotonicityAudit {
  double max_increase = 0.0;
  bool pass = false;
};

MonotonicityAudit monotonicity_audit(const FlowTrajectory& traj, double tolerance = 1e-6);

// Parabolic rescaling N_s = (M_t - x0)/sqrt(t0 - t) with s = -log(t0 - t).
// Only the signed profile coordinates of x0 can be nonzero.
FlowTrajectory rescale_about(const std::vector<std::pair<double, DiscreteHypersurface>>& flow, const VecN& x0,
                             double t0);

struct PerturbationSpec {
  double amplitude = 0.0;  // normal displacement amplitude * cos(wavenumber * t), see profile_wave
  int wavenumber = 0;
};

struct GapOptions {
  double s_budget = 6.0;
  int resolution = 256;
  double return_threshold = 0.02;  // final d_V to the best-fit cylinder counted as a return
  double lambda0 = 1.6;
  int test_functions = 64;
  FlowOptions flow = {0.2, 0.0, 0.1, 0.1, 5.0};
};

struct GapInterval {
  double s_start = 0.0;
  double s_end = 0.0;
  double F_drop = 0.0;    // F(N_start) - F(N_end)
  double dV_drift = 0.0;  // max over the interval of d_V(N_s, N_start)
};

struct GapReport {
  std::string outcome;  // returned-to-cylinder | escaped | escaped-with-singularity
  double initial_entropy = 0.0;
  double final_F = 0.0;
  double final_dV = 0.0;
  double entropy_drop = 0.0;  // lambda of the exact cylinder minus F_{0,1} of the last slice
  std::vector<GapInterval> intervals;
  FlowTrajectory trajectory;
};

// Entropy of S^k(sqrt(2k)) x R^{n-k}, which does not depend on n.
double cylinder_entropy(int k);

// Perturbs the exact cylinder S^k x R^{n-k}, runs the rescaled flow for the
// budget and compares the outcome with the cylinder.
GapReport gap_experiment(int k, int n, const PerturbationSpec& perturbation, const GapOptions& opt = {});

}  // namespace mcf
