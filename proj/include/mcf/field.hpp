#pragma once

#include <vector>

#include "mcf/surface.hpp"

namespace mcf {

enum class FieldKind { scalar, tensor };

// Per-cell data. A symmetric 2-tensor on a rotationally symmetric surface is
// diagonal in the frame (profile direction, p orbit directions, q orbit
// directions), so it is stored as three eigencomponents; a scalar uses
// `profile` only.
struct Field {
  FieldKind kind = FieldKind::scalar;
  std::vector<double> profile;
  std::vector<double> first;
  std::vector<double> second;

  static Field scalar(std::vector<double> values);
  static Field tensor(std::vector<double> profile, std::vector<double> first, std::vector<double> second);
  static Field zeros_like(const Field& f);

  int size() const { return static_cast<int>(profile.size()); }
  bool is_tensor() const { return kind == FieldKind::tensor; }

  // |B|^2 = profile^2 + p first^2 + q second^2 for tensors, value^2 for scalars.
  double norm_sq(int i, RotationSignature sig) const;
  double trace(int i, RotationSignature sig) const;
};

Field operator-(const Field& a, const Field& b);
Field operator+(const Field& a, const Field& b);
// Multiplies every component at cell i by w[i].
Field pointwise(const Field& f, const std::vector<double>& w);

Field mean_curvature_field(const DiscreteHypersurface& s);
Field second_fundamental_form(const DiscreteHypersurface& s);
// A/H; cells with H == 0 get zero components.
Field shape_quotient(const DiscreteHypersurface& s);
Field norm_A_sq_field(const DiscreteHypersurface& s);

}  // namespace mcf
