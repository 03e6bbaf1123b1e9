#pragma once

// Seeded instance generators. Output is a pure function of the config.

#include <cmath>
#include <numbers>
#include <optional>
#include <utility>

#include "qbench/model.hpp"
#include "qbench/rng.hpp"

namespace qbench {

struct SeamGenParams {
  std::size_t count = 5;
  Point3 box{1000.0, 1000.0, 1000.0};  // axis-aligned [0, box] in mm
  double min_length = 50.0;
  double max_length = 300.0;
  bool closed_tour = false;
};

struct SatGenParams {
  std::size_t num_components = 8;
  std::size_t clause_count = 20;
  std::size_t max_clause_size = 3;
  bool planted = true;
};

struct GeneratorConfig {
  std::uint64_t seed = 0;
  SeamGenParams seams;
  SatGenParams sat;
};

inline void validate(const SeamGenParams& p) {
  if (p.count < 1) throw ConfigError("seam count must be >= 1");
  for (double e : p.box)
    if (!(e > 0) || !std::isfinite(e))
      throw ConfigError("seam bounding box must have positive extent");
  if (!(p.min_length >= 0) || !std::isfinite(p.max_length))
    throw ConfigError("seam lengths must be finite and non-negative");
  if (p.min_length > p.max_length)
    throw ConfigError("min seam length exceeds max seam length");
  const double diag = std::hypot(p.box[0], p.box[1], p.box[2]);
  if (p.min_length > diag)
    throw ConfigError("min seam length does not fit in the bounding box");
}

inline void validate(const SatGenParams& p) {
  if (p.max_clause_size < 1) throw ConfigError("max_clause_size must be >= 1");
  if (p.max_clause_size > p.num_components)
    throw ConfigError("max_clause_size exceeds the number of components");
}

// endpoint_a uniform in the box; endpoint_b at a uniform direction and a
// uniform length in [min, max], clamped to the box (clamping can only
// shorten a seam).
inline SeamInstance gen_seam_instance(const GeneratorConfig& cfg) {
  const auto& p = cfg.seams;
  validate(p);
  Rng rng(cfg.seed);
  SeamInstance inst;
  inst.closed_tour = p.closed_tour;
  inst.seams.reserve(p.count);
  for (std::size_t s = 0; s < p.count; ++s) {
    Seam seam;
    for (int k = 0; k < 3; ++k) seam.a[k] = rng.uniform(0.0, p.box[k]);
    const double z = rng.uniform(-1.0, 1.0);
    const double phi = rng.uniform(0.0, 2 * std::numbers::pi);
    const double r = std::sqrt(std::max(0.0, 1 - z * z));
    const Point3 dir{r * std::cos(phi), r * std::sin(phi), z};
    const double len = p.min_length == p.max_length
                           ? p.min_length
                           : rng.uniform(p.min_length, p.max_length);
    for (int k = 0; k < 3; ++k)
      seam.b[k] = std::clamp(seam.a[k] + len * dir[k], 0.0, p.box[k]);
    inst.seams.push_back(seam);
  }
  return inst;
}

struct GeneratedSat {
  SatInstance instance;
  std::optional<Assignment> planted;
};

// Clause sizes uniform in 1..max_clause_size, components drawn without
// replacement. With planting, a clause the planted assignment violates is
// redrawn until it is satisfied.
inline GeneratedSat gen_sat_instance(const GeneratorConfig& cfg) {
  const auto& p = cfg.sat;
  validate(p);
  Rng rng(cfg.seed);
  GeneratedSat out;
  out.instance.num_components = p.num_components;
  if (p.planted) {
    Assignment a(p.num_components);
    for (auto& b : a) b = rng.bit() ? 1 : 0;
    out.planted = std::move(a);
  }
  std::vector<std::size_t> pool(p.num_components);
  for (std::size_t c = 0; c < p.clause_count; ++c) {
    Clause clause;
    do {
      clause.clear();
      const std::size_t k = 1 + rng.below(p.max_clause_size);
      for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
      for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng.below(pool.size() - i);
        std::swap(pool[i], pool[j]);
        clause.push_back({pool[i], rng.bit()});
      }
    } while (out.planted && !clause_satisfied(clause, *out.planted));
    out.instance.clauses.push_back(std::move(clause));
  }
  return out;
}

// Dense random QUBO with coefficients uniform in [-1, 1]; each upper
// triangular entry is present with probability `density`.
inline Qubo random_qubo(std::size_t n, double density, std::uint64_t seed) {
  Rng rng(seed);
  Qubo q(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      if (rng.uniform() < density) q.add(i, j, rng.uniform(-1.0, 1.0));
  return q;
}

// Random PUBO with integer coefficients in [-max_coeff, max_coeff] and term
// degrees uniform in 1..max_degree.
inline Pubo random_pubo(std::size_t n, std::size_t num_terms,
                        std::size_t max_degree, int max_coeff,
                        std::uint64_t seed) {
  Rng rng(seed);
  Pubo p(n);
  std::vector<std::size_t> pool(n);
  max_degree = std::min(max_degree, n);
  for (std::size_t t = 0; t < num_terms; ++t) {
    const std::size_t k = 1 + rng.below(max_degree);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    Pubo::Vars vars;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + rng.below(n - i);
      std::swap(pool[i], pool[j]);
      vars.push_back(pool[i]);
    }
    int c = 0;
    while (c == 0)
      c = static_cast<int>(rng.below(2 * max_coeff + 1)) - max_coeff;
    p.add(c, std::move(vars));
  }
  return p;
}

}  // namespace qbench
