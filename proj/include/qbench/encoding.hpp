#pragma once

// Native problem -> binary formulation mappings and their decoders:
//   seam traversal  -> time-indexed QUBO over 2 N^2 variables
//   SAT clauses     -> PUBO counting unsatisfied clauses
//   PUBO            -> QUBO by pairwise ancilla substitution

#include <algorithm>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qbench/model.hpp"

namespace qbench {

struct PenaltyWeights {
  // Constraint penalty A. Unset means the instance-dependent default
  // B * (N * c_max + L + 1), which puts every infeasible state above every
  // feasible one.
  std::optional<double> constraint_penalty;
  double objective_scale = 1.0;  // B
  double clause_weight = 1.0;
  double coverage_weight = 1.0;
};

// ---------------------------------------------------------------------------
// Seams

// Variable x_{s,d,t}: seam s is traversed in direction d at time slot t.
class SeamVarMap {
 public:
  struct Key {
    std::size_t seam;
    bool reversed;
    std::size_t slot;
    friend bool operator==(const Key&, const Key&) = default;
  };

  SeamVarMap() = default;
  explicit SeamVarMap(std::size_t num_seams) : n_(num_seams) {}

  std::size_t num_seams() const { return n_; }
  std::size_t num_variables() const { return 2 * n_ * n_; }

  std::size_t index(std::size_t seam, bool reversed, std::size_t slot) const {
    return (slot * n_ + seam) * 2 + (reversed ? 1 : 0);
  }
  Key key(std::size_t index) const {
    return {(index / 2) % n_, (index & 1) != 0, index / (2 * n_)};
  }

 private:
  std::size_t n_ = 0;
};

inline double default_constraint_penalty(const SeamInstance& inst,
                                         double objective_scale) {
  return objective_scale * (static_cast<double>(inst.size()) *
                                max_transition_cost(inst) +
                            inst.total_seam_length() + 1.0);
}

struct SeamEncoding {
  Qubo qubo;
  SeamVarMap var_map;
  double constraint_penalty = 0;
};

namespace detail {

// A * (1 - sum_{v in group} x_v)^2 with x^2 = x; returns the constant A.
inline double add_one_hot_penalty(std::vector<Qubo::Entry>& out,
                                  const std::vector<std::size_t>& group,
                                  double a) {
  for (std::size_t u = 0; u < group.size(); ++u) {
    out.push_back({group[u], group[u], -a});
    for (std::size_t v = u + 1; v < group.size(); ++v)
      out.push_back({group[u], group[v], 2 * a});
  }
  return a;
}

}  // namespace detail

// On every one-hot-feasible state the energy equals B * tour_cost of the
// decoded tour exactly; the seam lengths enter as a constant offset.
inline SeamEncoding encode_seam_qubo(const SeamInstance& inst,
                                     const PenaltyWeights& w = {}) {
  inst.validate();
  const double b = w.objective_scale;
  if (!(b > 0)) throw ConfigError("objective scale B must be > 0");
  const double a =
      w.constraint_penalty.value_or(default_constraint_penalty(inst, b));
  if (!(a > 0)) throw ConfigError("constraint penalty A must be > 0");

  const std::size_t n = inst.size();
  const SeamVarMap vm(n);
  std::vector<Qubo::Entry> entries;
  entries.reserve(8 * n * n * n + 4 * n * n);
  double offset = 0;

  std::vector<std::size_t> group;
  for (std::size_t t = 0; t < n; ++t) {
    group.clear();
    for (std::size_t s = 0; s < n; ++s)
      for (int d = 0; d < 2; ++d) group.push_back(vm.index(s, d != 0, t));
    offset += detail::add_one_hot_penalty(entries, group, a);
  }
  for (std::size_t s = 0; s < n; ++s) {
    group.clear();
    for (std::size_t t = 0; t < n; ++t)
      for (int d = 0; d < 2; ++d) group.push_back(vm.index(s, d != 0, t));
    offset += detail::add_one_hot_penalty(entries, group, a);
  }

  offset += b * inst.total_seam_length();
  // gap[(s,d) -> (s2,d2)], flat endpoint index 2s + d
  std::vector<double> gap(4 * n * n);
  for (std::size_t u = 0; u < 2 * n; ++u)
    for (std::size_t v = 0; v < 2 * n; ++v)
      gap[u * 2 * n + v] =
          b * transition_cost(inst, {u / 2, (u & 1) != 0}, {v / 2, (v & 1) != 0});
  auto link_slots = [&](std::size_t t, std::size_t t_next) {
    for (std::size_t u = 0; u < 2 * n; ++u)
      for (std::size_t v = 0; v < 2 * n; ++v)
        if (gap[u * 2 * n + v] != 0)
          entries.push_back({vm.index(u / 2, (u & 1) != 0, t),
                             vm.index(v / 2, (v & 1) != 0, t_next),
                             gap[u * 2 * n + v]});
  };
  for (std::size_t t = 0; t + 1 < n; ++t) link_slots(t, t + 1);
  if (inst.closed_tour) link_slots(n - 1, 0);

  return {Qubo::from_entries(2 * n * n, offset, std::move(entries)), vm, a};
}

struct ConstraintViolation {
  enum class Kind { time_slot, seam };
  Kind kind;
  std::size_t index;
  std::size_t active;  // number of variables set in the group (!= 1)

  std::string describe() const {
    return std::string(kind == Kind::time_slot ? "time slot " : "seam ") +
           std::to_string(index) + " has " + std::to_string(active) +
           " active variables";
  }
  friend bool operator==(const ConstraintViolation&,
                         const ConstraintViolation&) = default;
};

struct SeamDecode {
  std::optional<Tour> tour;
  std::vector<ConstraintViolation> violations;

  bool feasible() const { return tour.has_value(); }
};

inline SeamDecode decode_seam_solution(BitsView bits, const SeamVarMap& vm) {
  check_bits(bits, vm.num_variables(), "decode_seam_solution");
  const std::size_t n = vm.num_seams();
  std::vector<std::size_t> slot_count(n, 0), seam_count(n, 0);
  std::vector<TourStep> at_slot(n);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (!bits[i]) continue;
    const auto k = vm.key(i);
    ++slot_count[k.slot];
    ++seam_count[k.seam];
    at_slot[k.slot] = {k.seam, k.reversed};
  }
  SeamDecode out;
  for (std::size_t t = 0; t < n; ++t)
    if (slot_count[t] != 1)
      out.violations.push_back(
          {ConstraintViolation::Kind::time_slot, t, slot_count[t]});
  for (std::size_t s = 0; s < n; ++s)
    if (seam_count[s] != 1)
      out.violations.push_back(
          {ConstraintViolation::Kind::seam, s, seam_count[s]});
  if (out.violations.empty()) out.tour = Tour{std::move(at_slot)};
  return out;
}

inline Bits encode_tour_bits(const Tour& tour, const SeamVarMap& vm) {
  Bits bits(vm.num_variables(), 0);
  for (std::size_t t = 0; t < tour.steps.size(); ++t)
    bits[vm.index(tour.steps[t].seam, tour.steps[t].reversed, t)] = 1;
  return bits;
}

// ---------------------------------------------------------------------------
// SAT

// Each clause contributes w * prod_l f_l with f_l = x_i for a negated literal
// and (1 - x_i) otherwise, i.e. w exactly when the clause is violated.
inline Pubo encode_sat_pubo(const SatInstance& inst,
                            const PenaltyWeights& w = {}) {
  inst.validate();
  if (!(w.clause_weight > 0)) throw ConfigError("clause weight must be > 0");
  Pubo p(inst.num_components);
  for (const auto& clause : inst.clauses) {
    Pubo::Vars fixed, expand;
    for (const auto& lit : clause)
      (lit.negated ? fixed : expand).push_back(lit.component);
    // prod_{fixed} x * prod_{expand} (1 - x) = sum_{S subset expand} (-1)^|S| ...
    const std::size_t subsets = std::size_t{1} << expand.size();
    for (std::size_t mask = 0; mask < subsets; ++mask) {
      Pubo::Vars vars = fixed;
      int sign = 1;
      for (std::size_t k = 0; k < expand.size(); ++k)
        if (mask >> k & 1) {
          vars.push_back(expand[k]);
          sign = -sign;
        }
      p.add(sign * w.clause_weight, std::move(vars));
    }
  }
  return p;
}

// Clause penalty minus a reward for every component not yet covered by an
// earlier test vehicle.
inline Pubo vehicle_config_objective(const SatInstance& inst,
                                     const std::set<std::size_t>& covered,
                                     const PenaltyWeights& w) {
  const auto v = static_cast<double>(inst.num_components);
  if (!(w.coverage_weight >= 0))
    throw ConfigError("coverage weight must be >= 0");
  if (!(w.clause_weight > w.coverage_weight * v))
    throw ConfigError(
        "clause weight must exceed coverage_weight * num_components");
  for (auto c : covered)
    if (c >= inst.num_components)
      throw ValidationError("covered component out of range");
  Pubo p = encode_sat_pubo(inst, w);
  for (std::size_t i = 0; i < inst.num_components; ++i)
    if (!covered.count(i)) p.add(-w.coverage_weight, {i});
  return p;
}

struct VehiclePlan {
  std::vector<Assignment> vehicles;
  std::set<std::size_t> covered;
  // Components no produced vehicle could include.
  std::set<std::size_t> uncovered;
  bool infeasible_vehicle = false;  // the solver returned a clause violation
};

// Greedy covering: one single-vehicle PUBO solve per round, each rewarding
// components not yet built into any vehicle. Stops when everything is
// covered, when a round adds nothing new, or when a vehicle violates a clause.
inline VehiclePlan plan_test_vehicles(
    const SatInstance& inst, const PenaltyWeights& w,
    const std::function<Assignment(const Pubo&)>& solve_vehicle) {
  VehiclePlan plan;
  for (std::size_t round = 0; round < inst.num_components; ++round) {
    if (plan.covered.size() == inst.num_components) break;
    const Pubo objective = vehicle_config_objective(inst, plan.covered, w);
    Assignment a = solve_vehicle(objective);
    if (count_unsat(inst, a) != 0) {
      plan.infeasible_vehicle = true;
      break;
    }
    bool progress = false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] && plan.covered.insert(i).second) progress = true;
    if (!progress) break;
    plan.vehicles.push_back(std::move(a));
  }
  for (std::size_t i = 0; i < inst.num_components; ++i)
    if (!plan.covered.count(i)) plan.uncovered.insert(i);
  return plan;
}

// ---------------------------------------------------------------------------
// Quadratization

struct QuadratizationMap {
  struct Ancilla {
    std::size_t index;  // ancilla variable z
    std::size_t i, j;   // z stands for x_i x_j
    friend bool operator==(const Ancilla&, const Ancilla&) = default;
  };

  std::size_t num_original = 0;
  std::vector<Ancilla> ancillas;
  double penalty = 0;

  std::size_t num_variables() const { return num_original + ancillas.size(); }

  // Ancilla values implied by the original variables (z = x_i x_j).
  Bits extend(BitsView original) const {
    check_bits(original, num_original, "QuadratizationMap::extend");
    Bits x(original.begin(), original.end());
    x.resize(num_variables());
    for (const auto& a : ancillas) x[a.index] = x[a.i] & x[a.j];
    return x;
  }

  bool consistent(BitsView x) const {
    check_bits(x, num_variables(), "QuadratizationMap::consistent");
    return std::all_of(ancillas.begin(), ancillas.end(), [&](const Ancilla& a) {
      return x[a.index] == (x[a.i] & x[a.j]);
    });
  }
};

struct Quadratized {
  Qubo qubo;
  QuadratizationMap map;
};

// Replaces the most frequent pair (ties: lowest (i, j)) among terms of
// degree >= 3 by an ancilla z with penalty P (x_i x_j - 2 x_i z - 2 x_j z + 3z)
// until the polynomial is quadratic. P = 1 + sum |coefficients|.
inline Quadratized quadratize(const Pubo& p) {
  QuadratizationMap qmap;
  qmap.num_original = p.n();
  qmap.penalty = 1.0 + p.sum_abs_coeffs();
  const double pen = qmap.penalty;

  Pubo::Map terms = p.terms();
  std::size_t next_var = p.n();
  auto add_term = [&](Pubo::Vars vars, double c) {
    if (c == 0) return;
    auto [it, inserted] = terms.try_emplace(std::move(vars), c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms.erase(it);
    }
  };

  for (;;) {
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> freq;
    for (const auto& [vars, c] : terms) {
      if (vars.size() < 3) continue;
      for (std::size_t u = 0; u < vars.size(); ++u)
        for (std::size_t v = u + 1; v < vars.size(); ++v)
          ++freq[{vars[u], vars[v]}];
    }
    if (freq.empty()) break;
    auto best = freq.begin();
    for (auto it = freq.begin(); it != freq.end(); ++it)
      if (it->second > best->second) best = it;
    const auto [i, j] = best->first;
    const std::size_t z = next_var++;
    qmap.ancillas.push_back({z, i, j});

    std::vector<std::pair<Pubo::Vars, double>> moved;
    for (auto it = terms.begin(); it != terms.end();) {
      const auto& vars = it->first;
      if (vars.size() >= 3 && std::binary_search(vars.begin(), vars.end(), i) &&
          std::binary_search(vars.begin(), vars.end(), j)) {
        Pubo::Vars nv;
        for (auto v : vars)
          if (v != i && v != j) nv.push_back(v);
        nv.push_back(z);  // z exceeds every existing index, order is kept
        moved.emplace_back(std::move(nv), it->second);
        it = terms.erase(it);
      } else {
        ++it;
      }
    }
    for (auto& [vars, c] : moved) add_term(std::move(vars), c);
    add_term({i, j}, pen);
    add_term({i, z}, -2 * pen);
    add_term({j, z}, -2 * pen);
    add_term({z}, 3 * pen);
  }

  std::vector<Qubo::Entry> entries;
  for (const auto& [vars, c] : terms)
    entries.push_back({vars.front(), vars.back(), c});
  return {Qubo::from_entries(next_var, p.offset(), std::move(entries)),
          std::move(qmap)};
}

}  // namespace qbench
