#pragma once

#include <cstdint>
#include <vector>

#include "mcf/surface.hpp"

namespace mcf {

struct GaussianWindow {
  VecN x0;
  double t0 = 1.0;
  static GaussianWindow standard(int ambient_dim) { return {VecN::Zero(ambient_dim), 1.0}; }
};

// (4π t0)^{-n/2} ∫ exp(-|x - x0|²/(4 t0)) dμ. Orbits are integrated in closed
// form (Bessel functions), and analytic cylinders add back the part of the flat
// factor beyond their truncation.
double f_functional(const DiscreteHypersurface& s, const GaussianWindow& w);

// Same functional without the analytic truncation term.
double f_functional_cells(const DiscreteHypersurface& s, const GaussianWindow& w);

// The analytic term alone (zero when the surface carries no flat-tail data).
double flat_tail_term(const DiscreteHypersurface& s, const GaussianWindow& w);

// Per-cell contributions to F_{x0,t0}, in cell order.
std::vector<double> f_contributions(const DiscreteHypersurface& s, const GaussianWindow& w);

struct EntropySearch {
  double log_t_range = 6.0;   // log t0 in [-range, range]
  int grid_x = 13;            // lattice points per reduced centre coordinate
  int grid_t = 25;
  int grid_starts = 4;        // best grid points refined by the simplex
  int random_starts = 2;
  double tolerance = 1e-4;    // simplex diameter
  int max_evaluations = 500;  // per refinement
  std::uint64_t seed = 1;
};

struct TracePoint {
  GaussianWindow window;
  double value = 0.0;
};

struct EntropyReport {
  double lambda = 0.0;
  GaussianWindow argmax;
  std::vector<TracePoint> trace;
  double tolerance_achieved = 0.0;  // final simplex diameter of the winning run
  bool budget_exhausted = false;
  int evaluations = 0;
};

EntropyReport entropy(const DiscreteHypersurface& s, const EntropySearch& search = {});

struct TailCheck {
  double tail = 0.0;
  double bound = 0.0;
  bool pass = false;
};

// F_{0,1} mass carried by |x| > R against 2^{n/2} e^{-R²/8} λ0.
TailCheck gaussian_tail(const DiscreteHypersurface& s, double R, double lambda0);

struct RescalingCheck {
  double lhs = 0.0;  // F_{s y, 1 + a s²}
  double rhs = 0.0;  // F_{y, 1 + a}
  bool pass = false;
};

RescalingCheck rescaling_inequality_check(const DiscreteHypersurface& s, const VecN& y, double a, double scale,
                                          double shrinker_tolerance = 1e-3, double quadrature_tolerance = 1e-9);

}  // namespace mcf
