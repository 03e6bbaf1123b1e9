#pragma once

// One entry point over all backends.

#include <string>
#include <string_view>
#include <variant>

#include "qbench/serialize.hpp"
#include "qbench/solvers/anneal.hpp"
#include "qbench/solvers/brute_force.hpp"
#include "qbench/solvers/qaoa.hpp"

namespace qbench {

enum class Backend { oracle, anneal, qaoa, random };

inline std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::oracle: return "oracle";
    case Backend::anneal: return "anneal";
    case Backend::qaoa: return "qaoa";
    case Backend::random: return "random";
  }
  return "?";
}

inline Backend backend_from_string(std::string_view s) {
  if (s == "oracle") return Backend::oracle;
  if (s == "anneal") return Backend::anneal;
  if (s == "qaoa") return Backend::qaoa;
  if (s == "random") return Backend::random;
  throw ValidationError("unknown backend '" + std::string(s) + "'");
}

struct SolverSpec {
  Backend backend = Backend::oracle;
  std::size_t oracle_cap = kDefaultOracleCap;
  AnnealSchedule anneal;
  // Replace `anneal` by scaled_schedule(problem) at solve time.
  bool scale_schedule = false;
  QaoaConfig qaoa;
};

// A single uniformly random bitstring: the zero-skill reference solver.
inline SolveResult random_guess(const CompiledProblem& cp, std::uint64_t seed) {
  Rng rng(seed);
  SolveResult r;
  r.algorithm = "random";
  r.seed = seed;
  r.best_bits.resize(cp.n());
  for (auto& b : r.best_bits) b = rng.bit() ? 1 : 0;
  r.best_energy = cp.energy(r.best_bits);
  r.evaluations = 1;
  return r;
}

inline SolveResult solve(const Problem& problem, const SolverSpec& spec,
                         std::uint64_t seed, const Deadline& deadline = {}) {
  const CompiledProblem cp(problem);
  switch (spec.backend) {
    case Backend::oracle: {
      auto r = brute_force(cp, spec.oracle_cap, deadline);
      r.seed = seed;
      return r;
    }
    case Backend::anneal: {
      const AnnealSchedule sched =
          spec.scale_schedule
              ? scaled_schedule(cp, spec.anneal.sweeps, spec.anneal.restarts)
              : spec.anneal;
      return std::visit(
          [&](const auto& p) { return simulated_anneal(p, sched, seed, deadline); },
          problem);
    }
    case Backend::qaoa:
      return qaoa_optimize(cp, spec.qaoa, seed, deadline);
    case Backend::random:
      return random_guess(cp, seed);
  }
  throw std::logic_error("unhandled backend");
}

}  // namespace qbench
