#pragma once

// Single-bit-flip Metropolis simulated annealing with a geometric schedule.

#include <cmath>
#include <stdexcept>
#include <variant>
#include <vector>

#include "qbench/rng.hpp"
#include "qbench/solvers/compiled.hpp"
#include "qbench/solvers/result.hpp"

#ifndef QBENCH_DEBUG_CHECKS
#ifdef NDEBUG
#define QBENCH_DEBUG_CHECKS 0
#else
#define QBENCH_DEBUG_CHECKS 1
#endif
#endif

namespace qbench {

namespace detail {

// QUBO engine: cached local fields f_i = Q_ii + sum_j Q_ij x_j, so the flip
// cost is (1 - 2 x_i) f_i.
class QuboFlipState {
 public:
  explicit QuboFlipState(const Qubo& q) : q_(&q), n_(q.n()) {
    diag_.assign(n_, 0.0);
    std::vector<std::size_t> deg(n_ + 1, 0);
    for (const auto& [i, j, c] : q.coeffs())
      if (i != j) {
        ++deg[i + 1];
        ++deg[j + 1];
      }
    for (std::size_t i = 0; i < n_; ++i) deg[i + 1] += deg[i];
    nb_begin_ = deg;
    nb_.resize(deg[n_]);
    std::vector<std::size_t> fill(deg.begin(), deg.end() - 1);
    for (const auto& [i, j, c] : q.coeffs()) {
      if (i == j) {
        diag_[i] = c;
      } else {
        nb_[fill[i]++] = {j, c};
        nb_[fill[j]++] = {i, c};
      }
    }
    assign(Bits(n_, 0));
  }

  void assign(BitsView x) {
    x_.assign(x.begin(), x.end());
    field_ = diag_;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t e = nb_begin_[i]; e < nb_begin_[i + 1]; ++e)
        if (x_[nb_[e].first]) field_[i] += nb_[e].second;
    energy_ = qubo_energy(*q_, x_);
  }

  const Bits& bits() const { return x_; }
  double energy() const { return energy_; }
  double delta(std::size_t i) const { return x_[i] ? -field_[i] : field_[i]; }

  void flip(std::size_t i) {
    energy_ += delta(i);
    const double s = x_[i] ? -1.0 : 1.0;
    for (std::size_t e = nb_begin_[i]; e < nb_begin_[i + 1]; ++e)
      field_[nb_[e].first] += s * nb_[e].second;
    x_[i] ^= 1U;
  }

  double full_energy() const { return qubo_energy(*q_, x_); }
  double magnitude() const {
    return std::max(1.0, q_->sum_abs_coeffs() + std::abs(q_->offset()));
  }

 private:
  const Qubo* q_;
  std::size_t n_;
  Bits x_;
  std::vector<double> diag_, field_;
  std::vector<std::size_t> nb_begin_;
  std::vector<std::pair<std::size_t, double>> nb_;
  double energy_ = 0;
};

// PUBO engine over the term-count tracker.
class PuboFlipState {
 public:
  explicit PuboFlipState(const Pubo& p) : cp_(p), st_(cp_) {}

  void assign(BitsView x) { st_.assign(x); }
  const Bits& bits() const { return st_.bits(); }
  double energy() const { return st_.energy(); }
  double delta(std::size_t i) const { return st_.delta(i); }
  void flip(std::size_t i) { st_.flip(i); }
  double full_energy() const { return cp_.energy(st_.bits()); }
  double magnitude() const { return cp_.magnitude(); }

 private:
  CompiledProblem cp_;
  FlipState st_;
};

template <class Engine>
SolveResult anneal_with(Engine& engine, std::size_t n,
                        const AnnealSchedule& sched, std::uint64_t seed,
                        const Deadline& deadline,
                        std::vector<double>* trace) {
  Stopwatch sw;
  Rng rng(seed);
  SolveResult r;
  r.algorithm = "anneal";
  r.seed = seed;
  r.best_energy = std::numeric_limits<double>::infinity();
  Bits x(n);
  for (std::size_t restart = 0; restart < sched.restarts; ++restart) {
    for (auto& b : x) b = rng.bit() ? 1 : 0;
    engine.assign(x);
    if (engine.energy() < r.best_energy) {
      r.best_energy = engine.energy();
      r.best_bits = engine.bits();
    }
    if (trace) trace->push_back(engine.energy());
    double temp = sched.t_initial;
    for (std::size_t sweep = 0; sweep < sched.sweeps; ++sweep) {
      for (std::size_t i = 0; i < n; ++i) {
        const double d = engine.delta(i);
        ++r.evaluations;
        if (d <= 0 || rng.uniform() < std::exp(-d / temp)) {
          engine.flip(i);
          if (trace) trace->push_back(engine.energy());
          if (engine.energy() < r.best_energy) {
            r.best_energy = engine.energy();
            r.best_bits = engine.bits();
          }
        }
      }
      if constexpr (QBENCH_DEBUG_CHECKS) {
        const double full = engine.full_energy();
        if (std::abs(full - engine.energy()) > 1e-7 * engine.magnitude())
          throw std::logic_error("annealer incremental energy drifted");
      }
      temp *= sched.alpha;
      if ((sweep & 15U) == 0) deadline.check();
    }
  }
  engine.assign(r.best_bits);
  r.best_energy = engine.full_energy();
  r.wall_time = sw.seconds();
  return r;
}

}  // namespace detail

// Returns the best state seen across all restarts. Restarts draw their
// initial states from one seeded stream, so restart k is identical for any
// restart count >= k. `trace`, if given, receives the energy after every
// accepted move.
inline SolveResult simulated_anneal(const Qubo& q, const AnnealSchedule& sched,
                                    std::uint64_t seed,
                                    const Deadline& deadline = {},
                                    std::vector<double>* trace = nullptr) {
  sched.validate();
  detail::QuboFlipState engine(q);
  return detail::anneal_with(engine, q.n(), sched, seed, deadline, trace);
}

inline SolveResult simulated_anneal(const Pubo& p, const AnnealSchedule& sched,
                                    std::uint64_t seed,
                                    const Deadline& deadline = {},
                                    std::vector<double>* trace = nullptr) {
  sched.validate();
  detail::PuboFlipState engine(p);
  return detail::anneal_with(engine, p.n(), sched, seed, deadline, trace);
}

// Schedule scaled to the problem: starts at the largest single-flip energy
// bound and cools to 1e-3 of it over the sweeps.
inline AnnealSchedule scaled_schedule(const CompiledProblem& cp,
                                      std::size_t sweeps = 300,
                                      std::size_t restarts = 5) {
  double t0 = 0;
  for (std::size_t v = 0; v < cp.n(); ++v) {
    double s = 0;
    for (auto t : cp.incident(v)) s += std::abs(cp.coeff(t));
    t0 = std::max(t0, s);
  }
  AnnealSchedule sched;
  sched.t_initial = t0 > 0 ? t0 : 1.0;
  sched.sweeps = sweeps;
  sched.restarts = restarts;
  sched.alpha = std::pow(1e-3, 1.0 / static_cast<double>(sweeps));
  return sched;
}

}  // namespace qbench
