#pragma once

// JSON documents for instances and formulations. Field order is free on
// input; unknown fields are rejected.

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <variant>

#include "json.hpp"
#include "qbench/model.hpp"

namespace qbench {

using json = nlohmann::json;

namespace detail {

inline void require_object(const json& j, const char* what,
                           std::initializer_list<const char*> required,
                           std::initializer_list<const char*> optional = {}) {
  if (!j.is_object())
    throw ValidationError(std::string(what) + ": expected a JSON object");
  for (const auto* key : required)
    if (!j.contains(key))
      throw ValidationError(std::string(what) + ": missing field \"" + key +
                            "\"");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const auto* k : required) known = known || key == k;
    for (const auto* k : optional) known = known || key == k;
    if (!known)
      throw ValidationError(std::string(what) + ": unknown field \"" + key +
                            "\"");
  }
}

inline double as_number(const json& j, const char* what) {
  if (!j.is_number()) throw ValidationError(std::string(what) + ": expected number");
  return j.get<double>();
}

inline std::size_t as_index(const json& j, const char* what) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    throw ValidationError(std::string(what) + ": expected non-negative integer");
  return j.get<std::size_t>();
}

inline bool as_bit(const json& j, const char* what) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) {
    auto v = j.get<long long>();
    if (v == 0 || v == 1) return v == 1;
  }
  throw ValidationError(std::string(what) + ": expected 0/1 or boolean");
}

inline const json& as_array(const json& j, const char* what,
                            std::size_t exact_size = 0) {
  if (!j.is_array()) throw ValidationError(std::string(what) + ": expected array");
  if (exact_size && j.size() != exact_size)
    throw ValidationError(std::string(what) + ": expected array of " +
                          std::to_string(exact_size));
  return j;
}

inline Point3 as_point(const json& j) {
  as_array(j, "seam endpoint", 3);
  return {as_number(j[0], "x"), as_number(j[1], "y"), as_number(j[2], "z")};
}

}  // namespace detail

// --- SeamInstance: {"seams": [[[x,y,z],[x,y,z]],...], "closed_tour": bool}

inline json seam_instance_to_json(const SeamInstance& inst) {
  json seams = json::array();
  for (const auto& s : inst.seams)
    seams.push_back(json::array({json::array({s.a[0], s.a[1], s.a[2]}),
                                 json::array({s.b[0], s.b[1], s.b[2]})}));
  return json{{"seams", std::move(seams)}, {"closed_tour", inst.closed_tour}};
}

inline SeamInstance seam_instance_from_json(const json& j) {
  detail::require_object(j, "SeamInstance", {"seams"}, {"closed_tour"});
  SeamInstance inst;
  for (const auto& s : detail::as_array(j["seams"], "seams")) {
    detail::as_array(s, "seam", 2);
    inst.seams.push_back({detail::as_point(s[0]), detail::as_point(s[1])});
  }
  if (j.contains("closed_tour")) {
    if (!j["closed_tour"].is_boolean())
      throw ValidationError("closed_tour: expected boolean");
    inst.closed_tour = j["closed_tour"].get<bool>();
  }
  inst.validate();
  return inst;
}

// --- SatInstance: {"num_components": V, "clauses": [[[idx, negated],...],...]}

inline json sat_instance_to_json(const SatInstance& inst) {
  json clauses = json::array();
  for (const auto& c : inst.clauses) {
    json lits = json::array();
    for (const auto& l : c) lits.push_back(json::array({l.component, l.negated ? 1 : 0}));
    clauses.push_back(std::move(lits));
  }
  return json{{"num_components", inst.num_components},
              {"clauses", std::move(clauses)}};
}

inline SatInstance sat_instance_from_json(const json& j) {
  detail::require_object(j, "SatInstance", {"num_components", "clauses"});
  SatInstance inst;
  inst.num_components = detail::as_index(j["num_components"], "num_components");
  for (const auto& c : detail::as_array(j["clauses"], "clauses")) {
    Clause clause;
    for (const auto& l : detail::as_array(c, "clause")) {
      detail::as_array(l, "literal", 2);
      clause.push_back({detail::as_index(l[0], "literal component"),
                        detail::as_bit(l[1], "literal negated")});
    }
    inst.clauses.push_back(std::move(clause));
  }
  inst.validate();
  return inst;
}

// --- Qubo: {"n": n, "offset": c, "terms": [[i, j, coeff],...]}

inline json qubo_to_json(const Qubo& q) {
  json terms = json::array();
  for (const auto& [i, j, c] : q.coeffs()) terms.push_back(json::array({i, j, c}));
  return json{{"n", q.n()}, {"offset", q.offset()}, {"terms", std::move(terms)}};
}

inline Qubo qubo_from_json(const json& j) {
  detail::require_object(j, "Qubo", {"n", "terms"}, {"offset"});
  std::vector<Qubo::Entry> entries;
  for (const auto& t : detail::as_array(j["terms"], "terms")) {
    detail::as_array(t, "qubo term", 3);
    entries.push_back({detail::as_index(t[0], "i"), detail::as_index(t[1], "j"),
                       detail::as_number(t[2], "coeff")});
  }
  return Qubo::from_entries(
      detail::as_index(j["n"], "n"),
      j.contains("offset") ? detail::as_number(j["offset"], "offset") : 0.0,
      std::move(entries));
}

// --- Pubo: {"n": n, "offset": c, "terms": [[coeff, [i,...]],...]}

inline json pubo_to_json(const Pubo& p) {
  json terms = json::array();
  for (const auto& [vars, c] : p.terms()) terms.push_back(json::array({c, vars}));
  return json{{"n", p.n()}, {"offset", p.offset()}, {"terms", std::move(terms)}};
}

inline Pubo pubo_from_json(const json& j) {
  detail::require_object(j, "Pubo", {"n", "terms"}, {"offset"});
  Pubo p(detail::as_index(j["n"], "n"),
         j.contains("offset") ? detail::as_number(j["offset"], "offset") : 0.0);
  for (const auto& t : detail::as_array(j["terms"], "terms")) {
    detail::as_array(t, "pubo term", 2);
    Pubo::Vars vars;
    for (const auto& v : detail::as_array(t[1], "pubo vars"))
      vars.push_back(detail::as_index(v, "pubo var"));
    p.add(detail::as_number(t[0], "coeff"), std::move(vars));
  }
  return p;
}

// --- Ising: {"n": n, "offset": c, "h": [...], "J": [[i, j, coupling],...]}
// Spin +1 stands for bit 0.

inline json ising_to_json(const IsingModel& m) {
  json couplings = json::array();
  for (const auto& [ij, c] : m.J) couplings.push_back(json::array({ij.first, ij.second, c}));
  return json{{"n", m.n}, {"offset", m.offset}, {"h", m.h}, {"J", std::move(couplings)}};
}

// The two problem documents differ only in term shape; a problem with no
// terms reads as a Qubo, which has identical energy semantics.
using Problem = std::variant<Qubo, Pubo>;

inline Problem problem_from_json(const json& j) {
  if (j.is_object() && j.contains("terms") && j["terms"].is_array() &&
      !j["terms"].empty() && j["terms"][0].is_array() &&
      j["terms"][0].size() == 2)
    return pubo_from_json(j);
  return qubo_from_json(j);
}

inline json problem_to_json(const Problem& p) {
  return std::visit(
      [](const auto& v) -> json {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, Qubo>)
          return qubo_to_json(v);
        else
          return pubo_to_json(v);
      },
      p);
}

// --- files

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace qbench
