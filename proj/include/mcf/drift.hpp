#pragma once

#include <vector>

#include "mcf/field.hpp"
#include "mcf/surface.hpp"

namespace mcf {

// Density multiplying the divergence-form operator: `plain` gives the
// Laplace-Beltrami operator, `gaussian` the drift Laplacian Δ - ½∇_{x^T}.
enum class BaseWeight { plain, gaussian };

// Conservative second differences along the profile for the operator
//   u -> (1/ρ) div(ρ ∇u),  ρ = |u|^p |v|^q · base(x) · g,
// plus the reaction terms that the orbit connection adds for diagonal tensors.
class OperatorStencil {
 public:
  static OperatorStencil assemble(const DiscreteHypersurface& s, BaseWeight base = BaseWeight::gaussian,
                                  const std::vector<double>* g = nullptr);

  // Values at interior cells; zero elsewhere.
  Field apply(const Field& f) const;

  const std::vector<int>& interior() const { return interior_; }
  bool is_interior(int i) const { return mask_[i] != 0; }
  double lower(int i) const { return lower_[i]; }
  double upper(int i) const { return upper_[i]; }

 private:
  RotationSignature sig_;
  std::vector<int> interior_, prev_, next_;
  std::vector<char> mask_;
  std::vector<double> lower_, upper_, react1_, react2_;
};

Field drift_laplacian(const DiscreteHypersurface& s, const Field& u);
Field stability_operator(const DiscreteHypersurface& s, const Field& u);
Field weighted_drift_laplacian(const DiscreteHypersurface& s, const Field& u, const std::vector<double>& g);

// Profile-direction derivatives with second-order centred differences on the
// (possibly nonuniform) sample spacing. Only valid at stencil cells.
double d_ds(const DiscreteHypersurface& s, const std::vector<double>& f, int i);
double d2_ds2(const DiscreteHypersurface& s, const std::vector<double>& f, int i);

// Orbit connection coefficients u_s/u and v_s/v (zero for signed factors).
double first_warp(const DiscreteHypersurface& s, int i);
double second_warp(const DiscreteHypersurface& s, int i);

// |∇f|^2 and |∇²f|^2 per cell (zero off the stencil set).
std::vector<double> gradient_sq(const DiscreteHypersurface& s, const Field& f);
std::vector<double> hessian_sq(const DiscreteHypersurface& s, const Field& f);
// ∇u·∇v for scalar fields.
std::vector<double> gradient_dot(const DiscreteHypersurface& s, const Field& u, const Field& v);

struct QuotientComparison {
  Field lhs;  // 𝓛_{g²}(τ/g)
  Field rhs;  // (g 𝓛τ - τ 𝓛g)/g²
  std::vector<int> cells;
  double sup_difference = 0.0;
};

QuotientComparison weighted_quotient_laplacian(const DiscreteHypersurface& s, const Field& tau,
                                               const std::vector<double>& g, double g_min = 1e-3);

struct SimonsOptions {
  double g_min = 1e-3;
  double shrinker_tolerance = 1e-3;
  // Cells closer than this to a rotation axis are left out of the tensor
  // norms: the orbit reaction terms scale like 1/distance² there.
  double axis_margin = 0.5;
  BaseWeight base = BaseWeight::gaussian;
};

struct IdentityNorm {
  double sup = 0.0;
  double l2 = 0.0;
};

struct SimonsReport {
  IdentityNorm res1;        // 𝓛_{H²}(A/H)
  IdentityNorm res2;        // 𝓛_{H²}(|A|²/H²) - 2|∇(A/H)|²
  IdentityNorm coordinate;  // 𝓛|x|² - (2n - |x|²), detects a wrong drift term
  double shrinker_residual = 0.0;
  int cells_used = 0;
};

SimonsReport simons_identity_check(const DiscreteHypersurface& s, const SimonsOptions& opt = {});

// Distance from cell i to the nearest collapsing orbit axis (infinity if none).
double axis_distance(const DiscreteHypersurface& s, int i);

struct EffectiveBoundResult {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

EffectiveBoundResult effective_gradient_bound(const DiscreteHypersurface& s, double R, double width,
                                              double tolerance = 1e-10);

struct HypothesisConstants {
  double delta0 = 0.1;
  double C0 = 4.0;
  double lambda0 = 1.6;
};

struct TauCertificate {
  double eps_tau = 0.0;  // sup over B_{R-2} of (|∇τ|² + R^{-2}|∇²τ|²)^{1/2}
  double bound = 0.0;    // C_τ R^{2n} e^{-R/4}
  bool certified = false;
  double min_H = 0.0;
  double max_A = 0.0;
  double gradient_sup = 0.0;  // sup |∇τ| alone
  double hessian_sup = 0.0;   // sup |∇²τ| alone
};

TauCertificate tau_gradient_certificate(const DiscreteHypersurface& s, double R, const HypothesisConstants& c,
                                        double C_tau = 1.0);

}  // namespace mcf
