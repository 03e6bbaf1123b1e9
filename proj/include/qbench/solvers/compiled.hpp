#pragma once

// Flat, cache-friendly form of a QUBO or PUBO used by the solvers:
// terms in CSR layout plus a variable -> incident-terms index.

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "qbench/errors.hpp"
#include "qbench/model.hpp"
#include "qbench/serialize.hpp"

namespace qbench {

class CompiledProblem {
 public:
  explicit CompiledProblem(const Pubo& p) : n_(p.n()), offset_(p.offset()) {
    term_begin_.push_back(0);
    for (const auto& [vars, c] : p.terms()) {
      coeff_.push_back(c);
      for (auto v : vars) vars_.push_back(static_cast<std::uint32_t>(v));
      term_begin_.push_back(static_cast<std::uint32_t>(vars_.size()));
    }
    build_incidence();
  }
  explicit CompiledProblem(const Qubo& q) : n_(q.n()), offset_(q.offset()) {
    term_begin_.push_back(0);
    for (const auto& [i, j, c] : q.coeffs()) {
      coeff_.push_back(c);
      vars_.push_back(static_cast<std::uint32_t>(i));
      if (j != i) vars_.push_back(static_cast<std::uint32_t>(j));
      term_begin_.push_back(static_cast<std::uint32_t>(vars_.size()));
    }
    build_incidence();
  }
  explicit CompiledProblem(const Problem& p)
      : CompiledProblem(std::visit(
            [](const auto& v) { return CompiledProblem(v); }, p)) {}

  std::size_t n() const { return n_; }
  double offset() const { return offset_; }
  std::size_t num_terms() const { return coeff_.size(); }
  double coeff(std::size_t t) const { return coeff_[t]; }
  std::size_t term_size(std::size_t t) const {
    return term_begin_[t + 1] - term_begin_[t];
  }
  std::span<const std::uint32_t> term_vars(std::size_t t) const {
    return {vars_.data() + term_begin_[t], term_size(t)};
  }
  std::span<const std::uint32_t> incident(std::size_t v) const {
    return {inc_terms_.data() + inc_begin_[v], inc_begin_[v + 1] - inc_begin_[v]};
  }

  double sum_abs_coeffs() const {
    double s = 0;
    for (double c : coeff_) s += std::abs(c);
    return s;
  }

  // Scale used for floating-point tie tolerances.
  double magnitude() const {
    return std::max(1.0, sum_abs_coeffs() + std::abs(offset_));
  }

  double energy(BitsView x) const {
    check_bits(x, n_, "energy");
    double e = offset_;
    for (std::size_t t = 0; t < num_terms(); ++t) {
      bool on = true;
      for (auto v : term_vars(t)) on = on && x[v];
      if (on) e += coeff_[t];
    }
    return e;
  }

  // Basis index with bit i = x_i; n <= 64.
  double energy_of_index(std::uint64_t idx) const {
    double e = offset_;
    for (std::size_t t = 0; t < num_terms(); ++t) {
      bool on = true;
      for (auto v : term_vars(t)) on = on && ((idx >> v) & 1U);
      if (on) e += coeff_[t];
    }
    return e;
  }

  // Exact mean energy over uniformly random bitstrings.
  double mean_energy() const {
    double m = offset_;
    for (std::size_t t = 0; t < num_terms(); ++t)
      m += std::ldexp(coeff_[t], -static_cast<int>(term_size(t)));
    return m;
  }

 private:
  void build_incidence() {
    inc_begin_.assign(n_ + 1, 0);
    for (auto v : vars_) ++inc_begin_[v + 1];
    for (std::size_t v = 0; v < n_; ++v) inc_begin_[v + 1] += inc_begin_[v];
    inc_terms_.resize(vars_.size());
    std::vector<std::uint32_t> fill(inc_begin_.begin(), inc_begin_.end() - 1);
    for (std::size_t t = 0; t < num_terms(); ++t)
      for (auto v : term_vars(t))
        inc_terms_[fill[v]++] = static_cast<std::uint32_t>(t);
  }

  std::size_t n_;
  double offset_;
  std::vector<double> coeff_;
  std::vector<std::uint32_t> term_begin_;
  std::vector<std::uint32_t> vars_;
  std::vector<std::uint32_t> inc_begin_;
  std::vector<std::uint32_t> inc_terms_;
};

// Single-flip state tracker over a CompiledProblem. Keeps, per term, how many
// of its variables are set; a term is active when all are.
class FlipState {
 public:
  explicit FlipState(const CompiledProblem& cp)
      : cp_(&cp), x_(cp.n(), 0), ones_(cp.num_terms(), 0) {
    resync();
  }

  void assign(BitsView x) {
    check_bits(x, cp_->n(), "FlipState::assign");
    x_.assign(x.begin(), x.end());
    for (std::size_t t = 0; t < cp_->num_terms(); ++t) {
      std::uint32_t k = 0;
      for (auto v : cp_->term_vars(t)) k += x_[v];
      ones_[t] = k;
    }
    resync();
  }

  const Bits& bits() const { return x_; }
  double energy() const { return energy_; }

  double delta(std::size_t v) const {
    double d = 0;
    if (x_[v]) {
      for (auto t : cp_->incident(v))
        if (ones_[t] == cp_->term_size(t)) d -= cp_->coeff(t);
    } else {
      for (auto t : cp_->incident(v))
        if (ones_[t] + 1 == cp_->term_size(t)) d += cp_->coeff(t);
    }
    return d;
  }

  void flip(std::size_t v) {
    energy_ += delta(v);
    if (x_[v]) {
      for (auto t : cp_->incident(v)) --ones_[t];
    } else {
      for (auto t : cp_->incident(v)) ++ones_[t];
    }
    x_[v] ^= 1U;
  }

  // Recompute the energy from the term counters, discarding rounding drift.
  void resync() {
    double e = cp_->offset();
    for (std::size_t t = 0; t < cp_->num_terms(); ++t)
      if (ones_[t] == cp_->term_size(t)) e += cp_->coeff(t);
    energy_ = e;
  }

 private:
  const CompiledProblem* cp_;
  Bits x_;
  std::vector<std::uint32_t> ones_;
  double energy_ = 0;
};

// Visits all 2^n states in Gray-code order, calling fn(index, energy).
// Energies are tracked incrementally and resynchronized every 1024 steps.
template <class Fn>
void for_each_state(const CompiledProblem& cp, Fn&& fn,
                    const Deadline& deadline = {}) {
  const std::size_t n = cp.n();
  if (n >= 63) throw CapExceeded("cannot enumerate 2^" + std::to_string(n));
  FlipState st(cp);
  std::uint64_t idx = 0;
  fn(idx, st.energy());
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t step = 1; step < total; ++step) {
    const int k = std::countr_zero(step);
    st.flip(static_cast<std::size_t>(k));
    idx ^= std::uint64_t{1} << k;
    if ((step & 1023U) == 0) {
      st.resync();
      if ((step & 0xFFFFU) == 0) deadline.check();
    }
    fn(idx, st.energy());
  }
}

// Energy of every basis state, indexed by basis index.
inline std::vector<double> diagonal_costs(const CompiledProblem& cp,
                                          const Deadline& deadline = {}) {
  std::vector<double> costs(std::size_t{1} << cp.n());
  for_each_state(
      cp, [&](std::uint64_t idx, double e) { costs[idx] = e; }, deadline);
  return costs;
}

}  // namespace qbench
