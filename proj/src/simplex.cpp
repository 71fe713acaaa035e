#include "mcf/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mcf {

namespace {

double diameter(const std::vector<std::vector<double>>& pts) {
  double d = 0.0;
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = i + 1; j < pts.size(); ++j) {
      double s = 0.0;
      for (size_t k = 0; k < pts[i].size(); ++k) s += (pts[i][k] - pts[j][k]) * (pts[i][k] - pts[j][k]);
      d = std::max(d, std::sqrt(s));
    }
  return d;
}

}  // namespace

SimplexResult nelder_mead_minimize(const std::function<double(const std::vector<double>&)>& f,
                                   const std::vector<double>& start, const std::vector<double>& steps,
                                   const SimplexOptions& opt) {
  const size_t d = start.size();
  std::vector<std::vector<double>> pts(d + 1, start);
  for (size_t i = 0; i < d; ++i) pts[i + 1][i] += steps[i];
  std::vector<double> vals(d + 1);
  SimplexResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    double v = f(x);
    return std::isnan(v) ? HUGE_VAL : v;
  };
  for (size_t i = 0; i <= d; ++i) vals[i] = eval(pts[i]);
  std::vector<size_t> order(d + 1);

  auto affine = [&](const std::vector<double>& a, const std::vector<double>& b, double t) {
    std::vector<double> out(d);
    for (size_t k = 0; k < d; ++k) out[k] = a[k] + t * (b[k] - a[k]);
    return out;
  };

  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return vals[a] < vals[b]; });
    res.diameter = diameter(pts);
    if (res.diameter < opt.tolerance) {
      res.converged = true;
      break;
    }
    if (res.evaluations >= opt.max_evaluations) break;
    const size_t worst = order[d], second = order[d - 1], best = order[0];
    std::vector<double> centroid(d, 0.0);
    for (size_t i = 0; i < d; ++i)
      for (size_t k = 0; k < d; ++k) centroid[k] += pts[order[i]][k] / static_cast<double>(d);

    std::vector<double> xr = affine(centroid, pts[worst], -1.0);
    double fr = eval(xr);
    if (fr < vals[best]) {
      std::vector<double> xe = affine(centroid, pts[worst], -2.0);
      double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    bool outside = fr < vals[worst];
    std::vector<double> xc = outside ? affine(centroid, xr, 0.5) : affine(centroid, pts[worst], 0.5);
    double fc = eval(xc);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }
    for (size_t i = 1; i <= d; ++i) {
      size_t idx = order[i];
      pts[idx] = affine(pts[best], pts[idx], 0.5);
      vals[idx] = eval(pts[idx]);
    }
  }
  size_t best = static_cast<size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  res.x = pts[best];
  res.value = vals[best];
  return res;
}

}  // namespace mcf
