#pragma once

// Exact oracles: exhaustive bitstring search and exhaustive tour search.

#include <algorithm>
#include <numeric>
#include <vector>

#include "qbench/solvers/compiled.hpp"
#include "qbench/solvers/result.hpp"

namespace qbench {

inline constexpr std::size_t kDefaultOracleCap = 24;

// Energies within this distance of the optimum count as optimal.
inline double tie_tolerance(const CompiledProblem& cp) {
  return 1e-9 * cp.magnitude();
}

// Global minimum over all 2^n bitstrings. Among optimal bitstrings the
// lexicographically smallest is returned; optimum_count is exact.
inline SolveResult brute_force(const CompiledProblem& cp,
                               std::size_t cap = kDefaultOracleCap,
                               const Deadline& deadline = {}) {
  if (cp.n() > cap)
    throw CapExceeded("exhaustive search refused: " + std::to_string(cp.n()) +
                      " variables exceeds cap of " + std::to_string(cap));
  Stopwatch sw;
  const double tol = tie_tolerance(cp);
  double best = std::numeric_limits<double>::infinity();
  std::uint64_t best_idx = 0;
  std::uint64_t count = 0;
  for_each_state(
      cp,
      [&](std::uint64_t idx, double e) {
        if (e < best - tol) {
          best = cp.energy_of_index(idx);
          best_idx = idx;
          count = 1;
        } else if (e <= best + tol) {
          ++count;
          if (lex_less(idx, best_idx)) best_idx = idx;
        }
      },
      deadline);
  SolveResult r;
  r.algorithm = "oracle";
  r.best_bits = bits_from_index(best_idx, cp.n());
  r.best_energy = cp.energy(r.best_bits);
  r.optimum_count = count;
  r.evaluations = std::uint64_t{1} << cp.n();
  r.wall_time = sw.seconds();
  return r;
}

template <class P>
SolveResult brute_force(const P& problem, std::size_t cap = kDefaultOracleCap,
                        const Deadline& deadline = {}) {
  return brute_force(CompiledProblem(problem), cap, deadline);
}

// Basis indices of every optimal state of a cost diagonal.
inline std::vector<std::uint64_t> optimal_indices(std::span<const double> costs,
                                                  double tol) {
  const double best = *std::min_element(costs.begin(), costs.end());
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < costs.size(); ++i)
    if (costs[i] <= best + tol) out.push_back(i);
  return out;
}

inline constexpr std::size_t kDefaultTourCap = 8;

struct TourSolution {
  Tour tour;
  double cost = 0;
};

// Exhaustive over all N! * 2^N tours; returns the lexicographically smallest
// optimal tour.
inline TourSolution brute_force_tour(const SeamInstance& inst,
                                     std::size_t cap = kDefaultTourCap,
                                     const Deadline& deadline = {}) {
  inst.validate();
  const std::size_t n = inst.size();
  if (n > cap)
    throw CapExceeded("exhaustive tour search refused: " + std::to_string(n) +
                      " seams exceeds cap of " + std::to_string(cap));
  // gap[(s,d)][(s2,d2)] with flat endpoint index 2s + d
  std::vector<double> gap(4 * n * n);
  for (std::size_t u = 0; u < 2 * n; ++u)
    for (std::size_t v = 0; v < 2 * n; ++v)
      gap[u * 2 * n + v] =
          transition_cost(inst, {u / 2, (u & 1) != 0}, {v / 2, (v & 1) != 0});
  const double seam_total = inst.total_seam_length();
  const double tol = 1e-9 * std::max(1.0, seam_total + static_cast<double>(n) *
                                                           max_transition_cost(inst));

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  TourSolution best{{}, std::numeric_limits<double>::infinity()};
  Tour candidate{std::vector<TourStep>(n)};
  std::uint64_t visited = 0;
  do {
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
      // step t's direction is bit (n-1-t) so masks ascend lexicographically
      double cost = seam_total;
      std::size_t prev = 0;
      for (std::size_t t = 0; t < n; ++t) {
        const std::size_t cur = 2 * perm[t] + ((mask >> (n - 1 - t)) & 1U);
        if (t > 0) cost += gap[prev * 2 * n + cur];
        prev = cur;
      }
      if (inst.closed_tour)
        cost += gap[prev * 2 * n + 2 * perm[0] + ((mask >> (n - 1)) & 1U)];
      if (cost <= best.cost + tol) {
        for (std::size_t t = 0; t < n; ++t)
          candidate.steps[t] = {perm[t], ((mask >> (n - 1 - t)) & 1U) != 0};
        if (cost < best.cost - tol || candidate < best.tour) {
          best.tour = candidate;
          best.cost = cost;
        }
      }
      if ((++visited & 0xFFFFU) == 0) deadline.check();
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  best.cost = tour_cost(inst, best.tour);
  return best;
}

}  // namespace qbench
