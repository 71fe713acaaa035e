#include "mcf/field.hpp"

#include <stdexcept>

namespace mcf {

Field Field::scalar(std::vector<double> values) {
  Field f;
  f.kind = FieldKind::scalar;
  f.profile = std::move(values);
  return f;
}

Field Field::tensor(std::vector<double> profile, std::vector<double> first, std::vector<double> second) {
  if (profile.size() != first.size() || profile.size() != second.size())
    throw std::invalid_argument("tensor components differ in length");
  Field f;
  f.kind = FieldKind::tensor;
  f.profile = std::move(profile);
  f.first = std::move(first);
  f.second = std::move(second);
  return f;
}

Field Field::zeros_like(const Field& f) {
  Field z = f;
  std::fill(z.profile.begin(), z.profile.end(), 0.0);
  std::fill(z.first.begin(), z.first.end(), 0.0);
  std::fill(z.second.begin(), z.second.end(), 0.0);
  return z;
}

double Field::norm_sq(int i, RotationSignature sig) const {
  if (!is_tensor()) return profile[i] * profile[i];
  return profile[i] * profile[i] + sig.p * first[i] * first[i] + sig.q * second[i] * second[i];
}

double Field::trace(int i, RotationSignature sig) const {
  if (!is_tensor()) return profile[i];
  return profile[i] + sig.p * first[i] + sig.q * second[i];
}

namespace {

template <class Op>
Field combine(const Field& a, const Field& b, Op op) {
  if (a.kind != b.kind || a.size() != b.size()) throw std::invalid_argument("field shapes differ");
  Field out = a;
  for (int i = 0; i < a.size(); ++i) {
    out.profile[i] = op(a.profile[i], b.profile[i]);
    if (a.is_tensor()) {
      out.first[i] = op(a.first[i], b.first[i]);
      out.second[i] = op(a.second[i], b.second[i]);
    }
  }
  return out;
}

}  // namespace

Field operator-(const Field& a, const Field& b) {
  return combine(a, b, [](double x, double y) { return x - y; });
}

Field operator+(const Field& a, const Field& b) {
  return combine(a, b, [](double x, double y) { return x + y; });
}

Field pointwise(const Field& f, const std::vector<double>& w) {
  if (static_cast<int>(w.size()) != f.size()) throw std::invalid_argument("weight length differs from field");
  Field out = f;
  for (int i = 0; i < f.size(); ++i) {
    out.profile[i] *= w[i];
    if (f.is_tensor()) {
      out.first[i] *= w[i];
      out.second[i] *= w[i];
    }
  }
  return out;
}

Field mean_curvature_field(const DiscreteHypersurface& s) {
  std::vector<double> h(s.size());
  for (int i = 0; i < s.size(); ++i) h[i] = s.mean_curvature(i);
  return Field::scalar(std::move(h));
}

Field second_fundamental_form(const DiscreteHypersurface& s) {
  std::vector<double> a(s.size()), b(s.size()), c(s.size());
  for (int i = 0; i < s.size(); ++i) {
    a[i] = s.cells[i].kappa_profile;
    b[i] = s.cells[i].kappa_first;
    c[i] = s.cells[i].kappa_second;
  }
  return Field::tensor(std::move(a), std::move(b), std::move(c));
}

Field shape_quotient(const DiscreteHypersurface& s) {
  Field A = second_fundamental_form(s);
  std::vector<double> inv(s.size());
  for (int i = 0; i < s.size(); ++i) {
    double H = s.mean_curvature(i);
    inv[i] = H != 0.0 ? 1.0 / H : 0.0;
  }
  return pointwise(A, inv);
}

Field norm_A_sq_field(const DiscreteHypersurface& s) {
  std::vector<double> v(s.size());
  for (int i = 0; i < s.size(); ++i) v[i] = s.norm_A_sq(i);
  return Field::scalar(std::move(v));
}

}  // namespace mcf
