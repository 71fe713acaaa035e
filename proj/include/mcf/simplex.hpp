#pragma once

#include <functional>
#include <vector>

namespace mcf {

struct SimplexOptions {
  double tolerance = 1e-4;  // stop once the simplex diameter falls below this
  int max_evaluations = 500;
};

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  double diameter = 0.0;
  bool converged = false;
};

// Nelder-Mead minimisation with reflection 1, expansion 2, contraction 0.5 and
// shrink 0.5. `steps` gives the initial simplex offsets along each axis.
SimplexResult nelder_mead_minimize(const std::function<double(const std::vector<double>&)>& f,
                                   const std::vector<double>& start, const std::vector<double>& steps,
                                   const SimplexOptions& opt = {});

}  // namespace mcf
