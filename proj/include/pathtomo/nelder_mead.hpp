#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace pathtomo {

/// Coordinates with a box are folded back into [lo, hi] by mirror reflection
/// before every evaluation. Unbounded coordinates are left alone.
struct CoordinateBox {
  double lo = 0.0;
  double hi = 0.0;
};

struct NelderMeadOptions {
  double diameter_tol = 1e-9;   // max-norm distance of every vertex to the best one
  std::size_t max_evaluations = 10000;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

double reflect_into(double x, double lo, double hi);

/// Downhill simplex (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> start, const std::vector<double>& step,
                             const std::vector<std::optional<CoordinateBox>>& boxes,
                             const NelderMeadOptions& opts = {});

}  // namespace pathtomo
