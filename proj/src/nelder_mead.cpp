#include "pathtomo/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pathtomo/errors.hpp"

namespace pathtomo {

double reflect_into(double x, double lo, double hi) {
  const double w = hi - lo;
  if (!(w > 0.0)) return lo;
  double y = std::fmod(x - lo, 2.0 * w);
  if (y < 0.0) y += 2.0 * w;
  if (y > w) y = 2.0 * w - y;
  return lo + y;
}

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> start, const std::vector<double>& step,
                             const std::vector<std::optional<CoordinateBox>>& boxes,
                             const NelderMeadOptions& opts) {
  const std::size_t dim = start.size();
  if (step.size() != dim || boxes.size() != dim) {
    throw DimensionError("nelder_mead: start, step and boxes must have equal length");
  }

  NelderMeadResult res;
  auto fold = [&](std::vector<double>& x) {
    for (std::size_t i = 0; i < dim; ++i)
      if (boxes[i]) x[i] = reflect_into(x[i], boxes[i]->lo, boxes[i]->hi);
  };
  auto eval = [&](std::vector<double>& x) {
    fold(x);
    ++res.evaluations;
    return f(x);
  };

  std::vector<std::vector<double>> simplex(dim + 1, start);
  for (std::size_t i = 0; i < dim; ++i) simplex[i + 1][i] += step[i];
  std::vector<double> values(dim + 1);
  for (std::size_t i = 0; i <= dim; ++i) values[i] = eval(simplex[i]);

  std::vector<std::size_t> order(dim + 1);
  auto diameter = [&](std::size_t best) {
    double d = 0.0;
    for (const auto& v : simplex)
      for (std::size_t i = 0; i < dim; ++i) d = std::max(d, std::abs(v[i] - simplex[best][i]));
    return d;
  };

  for (;;) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[dim - 1];

    if (diameter(best) < opts.diameter_tol) {
      res.converged = true;
      break;
    }
    // An iteration costs at most dim + 2 evaluations.
    if (res.evaluations + dim + 2 > opts.max_evaluations) break;

    std::vector<double> centroid(dim, 0.0);
    for (std::size_t k = 0; k < dim; ++k) {
      const auto& v = simplex[order[k]];
      for (std::size_t i = 0; i < dim; ++i) centroid[i] += v[i] / static_cast<double>(dim);
    }
    auto along = [&](double t) {
      std::vector<double> p(dim);
      for (std::size_t i = 0; i < dim; ++i) p[i] = centroid[i] + t * (simplex[worst][i] - centroid[i]);
      return p;
    };

    auto xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < values[best]) {
      auto xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[worst] = std::move(xe);
        values[worst] = fe;
      } else {
        simplex[worst] = std::move(xr);
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = std::move(xr);
      values[worst] = fr;
      continue;
    }
    if (fr < values[worst]) {
      auto xc = along(-0.5);
      const double fc = eval(xc);
      if (fc <= fr) {
        simplex[worst] = std::move(xc);
        values[worst] = fc;
        continue;
      }
    } else {
      auto xc = along(0.5);
      const double fc = eval(xc);
      if (fc < values[worst]) {
        simplex[worst] = std::move(xc);
        values[worst] = fc;
        continue;
      }
    }
    for (std::size_t k = 1; k <= dim; ++k) {
      auto& v = simplex[order[k]];
      for (std::size_t i = 0; i < dim; ++i) v[i] = simplex[best][i] + 0.5 * (v[i] - simplex[best][i]);
      values[order[k]] = eval(v);
    }
  }

  const auto best_it = std::min_element(values.begin(), values.end());
  const std::size_t best = static_cast<std::size_t>(best_it - values.begin());
  res.x = simplex[best];
  res.value = values[best];
  return res;
}

}  // namespace pathtomo
