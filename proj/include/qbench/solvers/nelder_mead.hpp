#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

namespace qbench {

struct SimplexResult {
  std::vector<double> x;
  double value = 0;
  std::size_t evaluations = 0;
};

// Nelder-Mead downhill simplex with the standard coefficients
// (reflect 1, expand 2, contract 1/2, shrink 1/2). Stops after
// max_iterations or when the spread of simplex values drops below ftol.
template <class F>
SimplexResult nelder_mead(F&& f, std::vector<double> x0, double step,
                          std::size_t max_iterations, double ftol = 1e-13) {
  const std::size_t dim = x0.size();
  SimplexResult res;
  if (dim == 0) {
    res.value = f(x0);
    res.evaluations = 1;
    res.x = std::move(x0);
    return res;
  }
  auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    return f(x);
  };

  std::vector<std::vector<double>> pts(dim + 1, x0);
  for (std::size_t k = 0; k < dim; ++k) pts[k + 1][k] += step;
  std::vector<double> vals(dim + 1);
  for (std::size_t k = 0; k <= dim; ++k) vals[k] = eval(pts[k]);

  std::vector<std::size_t> order(dim + 1);
  std::vector<double> centroid(dim), trial(dim), trial2(dim);
  auto along = [&](double t, std::vector<double>& out,
                   const std::vector<double>& worst) {
    for (std::size_t k = 0; k < dim; ++k)
      out[k] = centroid[k] + t * (worst[k] - centroid[k]);
  };

  for (std::size_t it = 0; it < max_iterations; ++it) {
    std::iota(order.begin(), order.end(), 0);
    // stable so equal values keep a deterministic order
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front(), worst = order.back(),
                      second = order[dim - 1];
    if (vals[worst] - vals[best] <= ftol) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t k = 0; k < dim; ++k)
      for (std::size_t j = 0; j < dim; ++j)
        centroid[j] += pts[order[k]][j] / static_cast<double>(dim);

    along(-1.0, trial, pts[worst]);
    const double fr = eval(trial);
    if (fr < vals[best]) {
      along(-2.0, trial2, pts[worst]);
      const double fe = eval(trial2);
      if (fe < fr) {
        pts[worst] = trial2;
        vals[worst] = fe;
      } else {
        pts[worst] = trial;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = trial;
      vals[worst] = fr;
      continue;
    }
    // contraction: outside if the reflection improved on the worst point
    const bool outside = fr < vals[worst];
    along(outside ? -0.5 : 0.5, trial2, pts[worst]);
    const double fc = eval(trial2);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = trial2;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t k = 0; k <= dim; ++k) {
      if (k == best) continue;
      for (std::size_t j = 0; j < dim; ++j)
        pts[k][j] = pts[best][j] + 0.5 * (pts[k][j] - pts[best][j]);
      vals[k] = eval(pts[k]);
    }
  }
  const auto best_it = std::min_element(vals.begin(), vals.end());
  res.x = pts[static_cast<std::size_t>(best_it - vals.begin())];
  res.value = *best_it;
  return res;
}

}  // namespace qbench
