#pragma once

// Domain types for the two reference problems (robot seam traversal and
// vehicle configuration) and the three binary formulations (QUBO, PUBO,
// Ising), with exact energy / cost evaluation.

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qbench/errors.hpp"

namespace qbench {

// One byte per binary variable, values 0 or 1.
using Bits = std::vector<std::uint8_t>;
using BitsView = std::span<const std::uint8_t>;
// Spin vector, values -1 or +1.
using Spins = std::vector<std::int8_t>;
using SpinsView = std::span<const std::int8_t>;
using Assignment = Bits;

inline std::string bits_to_string(BitsView bits) {
  std::string s(bits.size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) s[i] = '1';
  return s;
}

inline Bits bits_from_string(const std::string& s) {
  Bits b(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '0' && s[i] != '1')
      throw ValidationError("bitstring may only contain '0' and '1'");
    b[i] = static_cast<std::uint8_t>(s[i] == '1');
  }
  return b;
}

// Bit i of `index` is variable i.
inline Bits bits_from_index(std::uint64_t index, std::size_t n) {
  Bits b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = (index >> i) & 1U;
  return b;
}

inline std::uint64_t index_from_bits(BitsView bits) {
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < bits.size() && i < 64; ++i)
    if (bits[i]) idx |= std::uint64_t{1} << i;
  return idx;
}

// Lexicographic order on bitstrings written x0 x1 x2 ..., applied to basis
// indices: the first differing variable decides, 0 before 1.
constexpr bool lex_less(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t diff = a ^ b;
  if (diff == 0) return false;
  const std::uint64_t low = diff & (~diff + 1);
  return (a & low) == 0;
}

inline void check_bits(BitsView bits, std::size_t n, const char* what) {
  if (bits.size() != n)
    throw ValidationError(std::string(what) + ": expected " +
                          std::to_string(n) + " bits, got " +
                          std::to_string(bits.size()));
  for (auto b : bits)
    if (b > 1) throw ValidationError(std::string(what) + ": bit value not 0/1");
}

// ---------------------------------------------------------------------------
// Robot path problem

using Point3 = std::array<double, 3>;

inline double distance(const Point3& p, const Point3& q) {
  const double dx = p[0] - q[0], dy = p[1] - q[1], dz = p[2] - q[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Coordinates in millimeters.
struct Seam {
  Point3 a{};
  Point3 b{};

  double length() const { return distance(a, b); }
  // reversed == false traverses a -> b.
  const Point3& entry(bool reversed) const { return reversed ? b : a; }
  const Point3& exit(bool reversed) const { return reversed ? a : b; }

  friend bool operator==(const Seam&, const Seam&) = default;
};

struct SeamInstance {
  std::vector<Seam> seams;
  // Open path by default: the robot ends wherever the last seam ends.
  bool closed_tour = false;

  std::size_t size() const { return seams.size(); }

  double total_seam_length() const {
    double l = 0;
    for (const auto& s : seams) l += s.length();
    return l;
  }

  void validate() const {
    if (seams.empty()) throw ValidationError("seam instance has no seams");
    for (const auto& s : seams)
      for (int k = 0; k < 3; ++k)
        if (!std::isfinite(s.a[k]) || !std::isfinite(s.b[k]))
          throw ValidationError("seam coordinate is not finite");
  }

  friend bool operator==(const SeamInstance&, const SeamInstance&) = default;
};

struct TourStep {
  std::size_t seam = 0;
  bool reversed = false;

  friend auto operator<=>(const TourStep&, const TourStep&) = default;
};

struct Tour {
  std::vector<TourStep> steps;

  friend auto operator<=>(const Tour&, const Tour&) = default;
  friend bool operator==(const Tour&, const Tour&) = default;
};

inline void validate_tour(const SeamInstance& inst, const Tour& tour) {
  const std::size_t n = inst.size();
  if (tour.steps.size() != n)
    throw ValidationError("tour has " + std::to_string(tour.steps.size()) +
                          " steps, instance has " + std::to_string(n) +
                          " seams");
  std::vector<bool> seen(n, false);
  for (const auto& st : tour.steps) {
    if (st.seam >= n)
      throw ValidationError("tour seam index " + std::to_string(st.seam) +
                            " out of range");
    if (seen[st.seam])
      throw ValidationError("tour visits seam " + std::to_string(st.seam) +
                            " twice");
    seen[st.seam] = true;
  }
}

// Gap travelled from the exit of `from` to the entry of `to`.
inline double transition_cost(const SeamInstance& inst, TourStep from,
                              TourStep to) {
  return distance(inst.seams[from.seam].exit(from.reversed),
                  inst.seams[to.seam].entry(to.reversed));
}

// Largest gap between any two seam ends.
inline double max_transition_cost(const SeamInstance& inst) {
  double c = 0;
  for (std::size_t s = 0; s < inst.size(); ++s)
    for (std::size_t s2 = 0; s2 < inst.size(); ++s2)
      for (int d = 0; d < 2; ++d)
        for (int d2 = 0; d2 < 2; ++d2)
          c = std::max(c, transition_cost(inst, {s, d != 0}, {s2, d2 != 0}));
  return c;
}

// Seam lengths plus straight-line gaps between consecutive seams (and back to
// the start when closed_tour is set).
inline double tour_cost(const SeamInstance& inst, const Tour& tour) {
  validate_tour(inst, tour);
  double cost = 0;
  const auto& st = tour.steps;
  for (std::size_t t = 0; t < st.size(); ++t) {
    cost += inst.seams[st[t].seam].length();
    if (t + 1 < st.size()) cost += transition_cost(inst, st[t], st[t + 1]);
  }
  if (inst.closed_tour) cost += transition_cost(inst, st.back(), st.front());
  return cost;
}

// ---------------------------------------------------------------------------
// Vehicle configuration problem

struct Literal {
  std::size_t component = 0;
  bool negated = false;

  bool satisfied_by(BitsView a) const {
    return negated ? a[component] == 0 : a[component] != 0;
  }
  friend auto operator<=>(const Literal&, const Literal&) = default;
};

using Clause = std::vector<Literal>;

struct SatInstance {
  std::size_t num_components = 0;
  std::vector<Clause> clauses;

  std::size_t max_clause_size() const {
    std::size_t m = 0;
    for (const auto& c : clauses) m = std::max(m, c.size());
    return m;
  }

  void validate() const {
    for (std::size_t ci = 0; ci < clauses.size(); ++ci) {
      const auto& c = clauses[ci];
      if (c.empty())
        throw ValidationError("clause " + std::to_string(ci) + " is empty");
      std::vector<std::size_t> comps;
      for (const auto& lit : c) {
        if (lit.component >= num_components)
          throw ValidationError("clause " + std::to_string(ci) +
                                " references component " +
                                std::to_string(lit.component) +
                                " >= num_components");
        comps.push_back(lit.component);
      }
      std::sort(comps.begin(), comps.end());
      if (std::adjacent_find(comps.begin(), comps.end()) != comps.end())
        throw ValidationError("clause " + std::to_string(ci) +
                              " repeats a component");
    }
  }

  friend bool operator==(const SatInstance&, const SatInstance&) = default;
};

inline bool clause_satisfied(const Clause& c, BitsView a) {
  return std::any_of(c.begin(), c.end(),
                     [&](const Literal& l) { return l.satisfied_by(a); });
}

inline std::size_t count_unsat(const SatInstance& inst, BitsView a) {
  check_bits(a, inst.num_components, "count_unsat");
  std::size_t unsat = 0;
  for (const auto& c : inst.clauses)
    if (!clause_satisfied(c, a)) ++unsat;
  return unsat;
}

// ---------------------------------------------------------------------------
// Formulations

// Upper-triangular sparse QUBO: E(x) = offset + sum_{i<=j} Q_ij x_i x_j.
// Entries are kept sorted by (i, j); duplicate insertions merge and entries
// that cancel to zero are dropped.
class Qubo {
 public:
  struct Entry {
    std::size_t i;
    std::size_t j;
    double value;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  Qubo() = default;
  explicit Qubo(std::size_t n, double offset = 0) : n_(n), offset_(offset) {}

  // Bulk construction: canonicalizes, sorts and merges in one pass.
  static Qubo from_entries(std::size_t n, double offset,
                           std::vector<Entry> entries) {
    Qubo q(n, offset);
    std::vector<std::size_t> start(n + 1, 0);
    for (auto& e : entries) {
      q.check(e.i, e.j, e.value);
      if (e.i > e.j) std::swap(e.i, e.j);
      ++start[e.i + 1];
    }
    // bucket by row, then sort each (short) row by column
    std::partial_sum(start.begin(), start.end(), start.begin());
    const std::size_t m = entries.size();
    std::unique_ptr<Entry[]> rows(new Entry[m]);
    {
      std::vector<std::size_t> fill(start.begin(), start.end() - 1);
      for (const auto& e : entries) rows[fill[e.i]++] = e;
    }
    for (std::size_t i = 0; i < n; ++i)
      std::sort(rows.get() + start[i], rows.get() + start[i + 1],
                [](const Entry& a, const Entry& b) { return a.j < b.j; });
    entries.clear();
    for (std::size_t k = 0; k < m;) {
      Entry acc = rows[k++];
      while (k < m && rows[k].i == acc.i && rows[k].j == acc.j) acc.value += rows[k++].value;
      if (acc.value != 0) entries.push_back(acc);
    }
    q.coeffs_ = std::move(entries);
    return q;
  }

  std::size_t n() const { return n_; }
  double offset() const { return offset_; }
  const std::vector<Entry>& coeffs() const { return coeffs_; }
  std::size_t num_terms() const { return coeffs_.size(); }

  void add_offset(double c) { offset_ += c; }
  void set_offset(double c) { offset_ = c; }

  // O(num_terms) per call; use from_entries for large models.
  void add(std::size_t i, std::size_t j, double c) {
    check(i, j, c);
    if (c == 0) return;
    if (i > j) std::swap(i, j);
    auto it = lower(coeffs_, i, j);
    if (it != coeffs_.end() && it->i == i && it->j == j) {
      it->value += c;
      if (it->value == 0) coeffs_.erase(it);
    } else {
      coeffs_.insert(it, Entry{i, j, c});
    }
  }

  double coeff(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    auto it = lower(coeffs_, i, j);
    return it != coeffs_.end() && it->i == i && it->j == j ? it->value : 0.0;
  }

  double sum_abs_coeffs() const {
    double s = 0;
    for (const auto& e : coeffs_) s += std::abs(e.value);
    return s;
  }

  friend bool operator==(const Qubo&, const Qubo&) = default;

 private:
  void check(std::size_t i, std::size_t j, double c) const {
    if (i >= n_ || j >= n_)
      throw ValidationError("qubo index out of range: (" + std::to_string(i) +
                            "," + std::to_string(j) + ") with n=" +
                            std::to_string(n_));
    if (!std::isfinite(c)) throw ValidationError("qubo coefficient not finite");
  }

  template <class Vec>
  static auto lower(Vec& v, std::size_t i, std::size_t j) -> decltype(v.begin()) {
    return std::lower_bound(v.begin(), v.end(), std::pair{i, j},
                            [](const Entry& e, const std::pair<std::size_t, std::size_t>& k) {
                              return e.i != k.first ? e.i < k.first : e.j < k.second;
                            });
  }

  std::size_t n_ = 0;
  double offset_ = 0;
  std::vector<Entry> coeffs_;
};

inline double qubo_energy(const Qubo& q, BitsView x) {
  check_bits(x, q.n(), "qubo_energy");
  double e = q.offset();
  for (const auto& [i, j, c] : q.coeffs())
    if (x[i] && x[j]) e += c;
  return e;
}

// E(x) = offset + sum_terms c * prod_{v in vars} x_v. Variable sets are
// sorted and unique; at most one term per set; constants live in offset.
class Pubo {
 public:
  using Vars = std::vector<std::size_t>;
  using Map = std::map<Vars, double>;

  Pubo() = default;
  explicit Pubo(std::size_t n, double offset = 0) : n_(n), offset_(offset) {}

  std::size_t n() const { return n_; }
  double offset() const { return offset_; }
  const Map& terms() const { return terms_; }
  std::size_t num_terms() const { return terms_.size(); }

  void add_offset(double c) { offset_ += c; }
  void set_offset(double c) { offset_ = c; }

  // x_i^2 == x_i, so repeated indices collapse.
  void add(double c, Vars vars) {
    if (!std::isfinite(c)) throw ValidationError("pubo coefficient not finite");
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    for (auto v : vars)
      if (v >= n_)
        throw ValidationError("pubo index " + std::to_string(v) +
                              " out of range with n=" + std::to_string(n_));
    if (c == 0) return;
    if (vars.empty()) {
      offset_ += c;
      return;
    }
    auto [it, inserted] = terms_.try_emplace(std::move(vars), c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  std::size_t degree() const {
    std::size_t d = 0;
    for (const auto& [v, c] : terms_) d = std::max(d, v.size());
    return d;
  }

  double sum_abs_coeffs() const {
    double s = 0;
    for (const auto& [v, c] : terms_) s += std::abs(c);
    return s;
  }

  friend bool operator==(const Pubo&, const Pubo&) = default;

 private:
  std::size_t n_ = 0;
  double offset_ = 0;
  Map terms_;
};

inline double pubo_energy(const Pubo& p, BitsView x) {
  check_bits(x, p.n(), "pubo_energy");
  double e = p.offset();
  for (const auto& [vars, c] : p.terms())
    if (std::all_of(vars.begin(), vars.end(),
                    [&](std::size_t v) { return x[v] != 0; }))
      e += c;
  return e;
}

inline Pubo to_pubo(const Qubo& q) {
  Pubo p(q.n(), q.offset());
  for (const auto& [i, j, c] : q.coeffs()) p.add(c, {i, j});
  return p;
}

// E(s) = offset + sum_i h_i s_i + sum_{i<j} J_ij s_i s_j, s in {-1,+1}.
struct IsingModel {
  std::size_t n = 0;
  std::vector<double> h;
  std::map<std::pair<std::size_t, std::size_t>, double> J;
  double offset = 0;
};

inline double ising_energy(const IsingModel& m, SpinsView s) {
  if (s.size() != m.n)
    throw ValidationError("ising_energy: expected " + std::to_string(m.n) +
                          " spins, got " + std::to_string(s.size()));
  for (auto v : s)
    if (v != 1 && v != -1) throw ValidationError("spin value not +-1");
  double e = m.offset;
  for (std::size_t i = 0; i < m.n; ++i) e += m.h[i] * s[i];
  for (const auto& [k, c] : m.J) e += c * s[k.first] * s[k.second];
  return e;
}

// Fixed variable map x_i = (1 - s_i) / 2, i.e. spin +1 <-> bit 0.
inline Bits bits_from_spins(SpinsView s) {
  Bits x(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) x[i] = s[i] < 0 ? 1 : 0;
  return x;
}

inline Spins spins_from_bits(BitsView x) {
  Spins s(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) s[i] = x[i] ? -1 : 1;
  return s;
}

inline IsingModel qubo_to_ising(const Qubo& q) {
  IsingModel m;
  m.n = q.n();
  m.h.assign(q.n(), 0.0);
  m.offset = q.offset();
  for (const auto& [i, j, c] : q.coeffs()) {
    if (i == j) {
      // c (1 - s_i) / 2
      m.offset += c / 2;
      m.h[i] -= c / 2;
    } else {
      // c (1 - s_i)(1 - s_j) / 4
      m.offset += c / 4;
      m.h[i] -= c / 4;
      m.h[j] -= c / 4;
      m.J[{i, j}] += c / 4;
    }
  }
  return m;
}

}  // namespace qbench
