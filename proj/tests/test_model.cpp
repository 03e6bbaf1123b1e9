#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <vector>

#include "qbench/generator.hpp"
#include "qbench/model.hpp"
#include "qbench/serialize.hpp"

using namespace qbench;
using Catch::Matchers::WithinAbs;

namespace {

// Independent naive tour length: walk the visiting sequence point by point.
double naive_tour_length(const SeamInstance& inst, const Tour& tour) {
  std::vector<Point3> path;
  for (const auto& st : tour.steps) {
    const auto& s = inst.seams[st.seam];
    path.push_back(st.reversed ? s.b : s.a);
    path.push_back(st.reversed ? s.a : s.b);
  }
  if (inst.closed_tour) path.push_back(path.front());
  double total = 0;
  for (std::size_t k = 1; k < path.size(); ++k) {
    double sq = 0;
    for (int c = 0; c < 3; ++c) sq += std::pow(path[k][c] - path[k - 1][c], 2);
    total += std::sqrt(sq);
  }
  return total;
}

// Dense double-loop evaluator, independent of Qubo's sparse iteration.
double dense_qubo_energy(const Qubo& q, const Bits& x) {
  std::vector<std::vector<double>> m(q.n(), std::vector<double>(q.n(), 0.0));
  for (std::size_t i = 0; i < q.n(); ++i)
    for (std::size_t j = i; j < q.n(); ++j) m[i][j] = q.coeff(i, j);
  double e = q.offset();
  for (std::size_t i = 0; i < q.n(); ++i)
    for (std::size_t j = 0; j < q.n(); ++j) e += m[i][j] * x[i] * x[j];
  return e;
}

std::vector<Tour> all_tours(std::size_t n) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::vector<Tour> out;
  do {
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      Tour t;
      for (std::size_t k = 0; k < n; ++k)
        t.steps.push_back({perm[k], ((mask >> k) & 1U) != 0});
      out.push_back(t);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

}  // namespace

TEST_CASE("tour_cost of a single seam is its length", "[model][tour]") {
  SeamInstance inst{{{{0, 0, 0}, {5, 0, 0}}}};
  CHECK(tour_cost(inst, Tour{{{0, false}}}) == 5.0);
  CHECK(tour_cost(inst, Tour{{{0, true}}}) == 5.0);
}

TEST_CASE("tour_cost adds the gap between collinear seams", "[model][tour]") {
  SeamInstance inst{{{{0, 0, 0}, {1, 0, 0}}, {{2, 0, 0}, {3, 0, 0}}}};
  CHECK(tour_cost(inst, Tour{{{0, false}, {1, false}}}) == 3.0);
}

TEST_CASE("tour_cost matches a naive distance summer on every N=4 tour",
          "[model][tour]") {
  GeneratorConfig cfg;
  cfg.seed = 11;
  cfg.seams.count = 4;
  for (bool closed : {false, true}) {
    cfg.seams.closed_tour = closed;
    const auto inst = gen_seam_instance(cfg);
    const auto tours = all_tours(4);
    REQUIRE(tours.size() == 24 * 16);
    for (const auto& t : tours)
      REQUIRE_THAT(tour_cost(inst, t), WithinAbs(naive_tour_length(inst, t), 1e-9));
  }
}

TEST_CASE("closed tours cost the same reversed", "[model][tour][property]") {
  GeneratorConfig cfg;
  cfg.seams.count = 5;
  cfg.seams.closed_tour = true;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    cfg.seed = seed;
    const auto inst = gen_seam_instance(cfg);
    Rng rng(seed);
    Tour t;
    std::vector<std::size_t> perm{0, 1, 2, 3, 4};
    for (std::size_t i = 4; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    for (auto s : perm) t.steps.push_back({s, rng.bit()});
    Tour rev;
    for (auto it = t.steps.rbegin(); it != t.steps.rend(); ++it)
      rev.steps.push_back({it->seam, !it->reversed});
    REQUIRE_THAT(tour_cost(inst, rev), WithinAbs(tour_cost(inst, t), 1e-9));
  }
}

TEST_CASE("tour validation", "[model][tour][errors]") {
  SeamInstance inst{{{{0, 0, 0}, {1, 0, 0}}, {{2, 0, 0}, {3, 0, 0}}}};
  CHECK_THROWS_AS(tour_cost(inst, Tour{{{0, false}, {0, true}}}), ValidationError);
  CHECK_THROWS_AS(tour_cost(inst, Tour{{{0, false}, {2, true}}}), ValidationError);
  CHECK_THROWS_AS(tour_cost(inst, Tour{{{0, false}}}), ValidationError);
  CHECK_THROWS_AS(SeamInstance{}.validate(), ValidationError);
  SeamInstance bad{{{{0, 0, NAN}, {1, 0, 0}}}};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("count_unsat basics", "[model][sat]") {
  SatInstance empty{3, {}};
  CHECK(count_unsat(empty, Bits{0, 1, 0}) == 0);
  SatInstance unit{1, {{{0, false}}}};
  CHECK(count_unsat(unit, Bits{0}) == 1);
  CHECK(count_unsat(unit, Bits{1}) == 0);
  CHECK_THROWS_AS(count_unsat(unit, Bits{0, 1}), ValidationError);
}

TEST_CASE("count_unsat matches a truth table on a random instance",
          "[model][sat]") {
  GeneratorConfig cfg;
  cfg.seed = 3;
  cfg.sat = {8, 20, 4, false};
  const auto inst = gen_sat_instance(cfg).instance;
  for (std::uint32_t a = 0; a < 256; ++a) {
    // truth table: a clause is violated iff every literal evaluates false
    std::size_t expected = 0;
    for (const auto& c : inst.clauses) {
      bool any = false;
      for (const auto& l : c) {
        const bool v = (a >> l.component) & 1U;
        any = any || (l.negated ? !v : v);
      }
      expected += any ? 0 : 1;
    }
    REQUIRE(count_unsat(inst, bits_from_index(a, 8)) == expected);
  }
}

TEST_CASE("SatInstance validation", "[model][sat][errors]") {
  CHECK_THROWS_AS((SatInstance{2, {{{2, false}}}}.validate()), ValidationError);
  CHECK_THROWS_AS((SatInstance{2, {{{1, false}, {1, true}}}}.validate()),
                  ValidationError);
  CHECK_THROWS_AS((SatInstance{2, {{}}}.validate()), ValidationError);
}

TEST_CASE("energy evaluators", "[model][energy]") {
  Qubo q(4, 3.0);
  CHECK(qubo_energy(q, Bits{1, 0, 1, 1}) == 3.0);

  Pubo p(3);
  p.add(2.0, {0, 1, 2});
  CHECK(pubo_energy(p, Bits{1, 1, 1}) == 2.0);
  CHECK(pubo_energy(p, Bits{1, 1, 0}) == 0.0);
  CHECK(p.degree() == 3);

  CHECK_THROWS_AS(qubo_energy(q, Bits{1, 0}), ValidationError);
  CHECK_THROWS_AS(pubo_energy(p, Bits{1, 0, 2}), ValidationError);
}

TEST_CASE("random n=10 QUBO agrees with a dense evaluator", "[model][energy]") {
  const Qubo q = random_qubo(10, 0.6, 99);
  for (std::uint32_t a = 0; a < 1024; ++a) {
    const Bits x = bits_from_index(a, 10);
    REQUIRE_THAT(qubo_energy(q, x), WithinAbs(dense_qubo_energy(q, x), 1e-12));
  }
}

TEST_CASE("Qubo storage is canonical", "[model][qubo]") {
  Qubo a(3), b(3);
  a.add(2, 0, 1.5);
  a.add(0, 2, 0.5);
  a.add(1, 1, 1.0);
  a.add(1, 1, -1.0);
  b.add(0, 2, 2.0);
  CHECK(a == b);
  CHECK(a.num_terms() == 1);
  CHECK_THROWS_AS(a.add(0, 3, 1.0), ValidationError);
}

TEST_CASE("Pubo merges terms and reports degree", "[model][pubo]") {
  Pubo p(4);
  p.add(1.0, {2, 0});
  p.add(2.0, {0, 2});
  p.add(-1.0, {3, 1, 0});
  p.add(1.0, {3, 1, 0});
  p.add(5.0, {});
  CHECK(p.num_terms() == 1);
  CHECK(p.terms().begin()->first == Pubo::Vars{0, 2});
  CHECK(p.terms().begin()->second == 3.0);
  CHECK(p.offset() == 5.0);
  CHECK(p.degree() == 2);
}

TEST_CASE("qubo_to_ising expansions", "[model][ising]") {
  Qubo q(1);
  q.add(0, 0, 1.0);
  const auto m = qubo_to_ising(q);
  CHECK(m.h[0] == -0.5);
  CHECK(m.offset == 0.5);

  const auto z = qubo_to_ising(Qubo(3, 7.0));
  CHECK(z.h == std::vector<double>{0, 0, 0});
  CHECK(z.J.empty());
  CHECK(z.offset == 7.0);
}

TEST_CASE("qubo_to_ising preserves energy for every spin vector",
          "[model][ising][property]") {
  for (std::size_t n = 1; n <= 12; ++n) {
    const Qubo q = random_qubo(n, 0.7, 1000 + n);
    const auto m = qubo_to_ising(q);
    for (std::uint32_t a = 0; a < (1U << n); ++a) {
      Spins s(n);
      for (std::size_t i = 0; i < n; ++i) s[i] = (a >> i) & 1U ? -1 : 1;
      REQUIRE_THAT(ising_energy(m, s),
                   WithinAbs(qubo_energy(q, bits_from_spins(s)), 1e-12));
    }
  }
}

TEST_CASE("energy evaluation is pure", "[model][energy]") {
  const Qubo q = random_qubo(10, 0.5, 5);
  const Bits x = bits_from_index(0x2A5, 10);
  const double e1 = qubo_energy(q, x);
  const double e2 = qubo_energy(q, x);
  CHECK(std::memcmp(&e1, &e2, sizeof e1) == 0);
}

TEST_CASE("lex_less follows written bit order", "[model][bits]") {
  // "10" (index 1) vs "01" (index 2): "01" is lexicographically smaller
  CHECK(lex_less(2, 1));
  CHECK_FALSE(lex_less(1, 2));
  CHECK_FALSE(lex_less(5, 5));
  CHECK(bits_to_string(bits_from_index(6, 4)) == "0110");
  CHECK(bits_from_string("0110") == bits_from_index(6, 4));
}

TEST_CASE("JSON documents reject unknown fields", "[model][json]") {
  CHECK_THROWS_AS(seam_instance_from_json(json::parse(
                      R"({"seams": [[[0,0,0],[1,0,0]]], "colour": 1})")),
                  ValidationError);
  CHECK_THROWS_AS(qubo_from_json(json::parse(R"({"n": 2, "terms": [], "x": 0})")),
                  ValidationError);
  CHECK_THROWS_AS(sat_instance_from_json(json::parse(R"({"clauses": []})")),
                  ValidationError);
}

TEST_CASE("JSON round trips", "[model][json]") {
  GeneratorConfig cfg;
  cfg.seed = 4;
  const auto seams = gen_seam_instance(cfg);
  CHECK(seam_instance_from_json(json::parse(seam_instance_to_json(seams).dump())) ==
        seams);
  const auto sat = gen_sat_instance(cfg).instance;
  CHECK(sat_instance_from_json(sat_instance_to_json(sat)) == sat);
  const Qubo q = random_qubo(6, 0.5, 1);
  CHECK(qubo_from_json(json::parse(qubo_to_json(q).dump())) == q);
  const Pubo p = random_pubo(6, 10, 4, 3, 2);
  CHECK(pubo_from_json(json::parse(pubo_to_json(p).dump())) == p);
  CHECK(std::holds_alternative<Pubo>(problem_from_json(pubo_to_json(p))));
  CHECK(std::holds_alternative<Qubo>(problem_from_json(qubo_to_json(q))));
}
