#pragma once

// Statevector QAOA over a diagonal cost: |+>^n, then p rounds of
// exp(-i gamma_k C) followed by exp(-i beta_k sum_q X_q). Angles are chosen
// by a coarse grid (p = 1) or seeded random starts (p > 1), each refined with
// Nelder-Mead, and the final distribution is sampled.

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "qbench/rng.hpp"
#include "qbench/solvers/brute_force.hpp"
#include "qbench/solvers/compiled.hpp"
#include "qbench/solvers/nelder_mead.hpp"
#include "qbench/solvers/result.hpp"

namespace qbench {

class QaoaSimulator {
 public:
  using amplitude = std::complex<double>;

  // costs[z] is the energy of basis state z; size must be 2^n.
  explicit QaoaSimulator(std::span<const double> costs,
                         std::size_t max_qubits = 24)
      : costs_(costs) {
    if (costs.empty() || !std::has_single_bit(costs.size()))
      throw ValidationError("cost diagonal length must be a power of two");
    n_ = static_cast<std::size_t>(std::countr_zero(costs.size()));
    if (n_ > max_qubits)
      throw CapExceeded("statevector simulation refused: " +
                        std::to_string(n_) + " qubits exceeds cap of " +
                        std::to_string(max_qubits));
  }

  std::size_t num_qubits() const { return n_; }
  const std::vector<amplitude>& state() const { return state_; }
  // Squared norm after each completed layer of the last run.
  const std::vector<double>& layer_norms() const { return layer_norms_; }

  void run(std::span<const double> gammas, std::span<const double> betas) {
    if (gammas.size() != betas.size())
      throw ValidationError("gammas and betas must have equal length");
    const double amp0 = 1.0 / std::sqrt(static_cast<double>(costs_.size()));
    state_.assign(costs_.size(), amplitude(amp0, 0.0));
    layer_norms_.clear();
    for (std::size_t k = 0; k < gammas.size(); ++k) {
      apply_phase(gammas[k]);
      apply_mixer(betas[k]);
      layer_norms_.push_back(norm());
    }
  }

  double norm() const {
    double s = 0;
    for (const auto& a : state_) s += std::norm(a);
    return s;
  }

  double expectation() const {
    double e = 0;
    for (std::size_t z = 0; z < state_.size(); ++z)
      e += std::norm(state_[z]) * costs_[z];
    return e;
  }

  std::vector<double> probabilities() const {
    std::vector<double> p(state_.size());
    for (std::size_t z = 0; z < state_.size(); ++z) p[z] = std::norm(state_[z]);
    return p;
  }

 private:
  void apply_phase(double gamma) {
    for (std::size_t z = 0; z < state_.size(); ++z) {
      const double c = std::cos(gamma * costs_[z]), s = -std::sin(gamma * costs_[z]);
      const double re = state_[z].real(), im = state_[z].imag();
      state_[z] = amplitude(c * re - s * im, c * im + s * re);
    }
  }

  // RX(2 beta) on every qubit: a' = cos(b) a - i sin(b) a_partner.
  void apply_mixer(double beta) {
    // real arithmetic; std::complex multiply is much slower here
    const double c = std::cos(beta), s = std::sin(beta);
    const std::size_t dim = state_.size();
    for (std::size_t q = 0; q < n_; ++q) {
      const std::size_t stride = std::size_t{1} << q;
      for (std::size_t base = 0; base < dim; base += 2 * stride)
        for (std::size_t i = base; i < base + stride; ++i) {
          const double ar = state_[i].real(), ai = state_[i].imag();
          const double br = state_[i + stride].real(), bi = state_[i + stride].imag();
          state_[i] = amplitude(c * ar + s * bi, c * ai - s * br);
          state_[i + stride] = amplitude(c * br + s * ai, c * bi - s * ar);
        }
    }
  }

  std::span<const double> costs_;
  std::size_t n_ = 0;
  std::vector<amplitude> state_;
  std::vector<double> layer_norms_;
};

inline double qaoa_expectation(std::span<const double> costs,
                               std::span<const double> gammas,
                               std::span<const double> betas,
                               std::size_t max_qubits = 24) {
  QaoaSimulator sim(costs, max_qubits);
  sim.run(gammas, betas);
  return sim.expectation();
}

inline SolveResult qaoa_optimize(const CompiledProblem& cp,
                                 const QaoaConfig& cfg, std::uint64_t seed,
                                 const Deadline& deadline = {}) {
  cfg.validate();
  if (cp.n() > cfg.max_qubits)
    throw CapExceeded("QAOA refused: " + std::to_string(cp.n()) +
                      " qubits exceeds cap of " +
                      std::to_string(cfg.max_qubits));
  Stopwatch sw;
  const std::vector<double> costs = diagonal_costs(cp, deadline);
  QaoaSimulator sim(costs, cfg.max_qubits);
  const std::size_t p = cfg.layers;
  std::uint64_t evals = 0;

  // angles packed as [gamma_1..gamma_p, beta_1..beta_p]
  auto objective = [&](const std::vector<double>& a) {
    ++evals;
    if ((evals & 31U) == 0) deadline.check();
    sim.run(std::span(a).first(p), std::span(a).subspan(p));
    return sim.expectation();
  };

  const double pi = std::numbers::pi;
  std::vector<double> best_angles;
  double best_value = std::numeric_limits<double>::infinity();
  Rng rng(mix_seed(seed, 1));
  if (p == 1) {
    const std::size_t r = cfg.grid_resolution;
    std::vector<double> a(2);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j) {
        a[0] = pi * static_cast<double>(i) / static_cast<double>(r);
        a[1] = pi * static_cast<double>(j) / static_cast<double>(r);
        const double v = objective(a);
        if (v < best_value) {
          best_value = v;
          best_angles = a;
        }
      }
    auto refined = nelder_mead(objective, best_angles,
                               pi / static_cast<double>(r),
                               cfg.refine_iterations);
    if (refined.value < best_value) {
      best_value = refined.value;
      best_angles = refined.x;
    }
  } else {
    for (std::size_t start = 0; start < cfg.multistarts; ++start) {
      std::vector<double> a(2 * p);
      for (auto& v : a) v = rng.uniform(0.0, pi);
      auto refined = nelder_mead(objective, a, pi / 8, cfg.refine_iterations);
      if (refined.value < best_value) {
        best_value = refined.value;
        best_angles = refined.x;
      }
    }
  }

  sim.run(std::span(best_angles).first(p), std::span(best_angles).subspan(p));
  std::vector<double> probs = sim.probabilities();

  // Inverse-CDF sampling; lowest sampled energy wins, ties lexicographic.
  std::vector<double> cdf(probs.size());
  std::partial_sum(probs.begin(), probs.end(), cdf.begin());
  Rng sampler(mix_seed(seed, 2));
  std::uint64_t best_idx = 0;
  double best_sample = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < cfg.samples; ++s) {
    const double u = sampler.uniform() * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    const auto z = static_cast<std::uint64_t>(it - cdf.begin());
    if (costs[z] < best_sample || (costs[z] == best_sample && lex_less(z, best_idx))) {
      best_sample = costs[z];
      best_idx = z;
    }
  }

  const double tol = tie_tolerance(cp);
  double success = 0;
  for (auto z : optimal_indices(costs, tol)) success += probs[z];

  SolveResult r;
  r.algorithm = "qaoa";
  r.seed = seed;
  r.best_bits = bits_from_index(best_idx, cp.n());
  r.best_energy = cp.energy(r.best_bits);
  r.evaluations = evals;
  r.expectation = best_value;
  r.angles = QaoaAngles{{best_angles.begin(), best_angles.begin() + static_cast<std::ptrdiff_t>(p)},
                        {best_angles.begin() + static_cast<std::ptrdiff_t>(p), best_angles.end()}};
  r.success_probability = success;
  r.distribution = std::move(probs);
  r.wall_time = sw.seconds();
  return r;
}

template <class P>
SolveResult qaoa_optimize(const P& problem, const QaoaConfig& cfg,
                          std::uint64_t seed, const Deadline& deadline = {}) {
  return qaoa_optimize(CompiledProblem(problem), cfg, seed, deadline);
}

}  // namespace qbench
