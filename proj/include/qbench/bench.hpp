#pragma once

// Benchmark harness: sweeps family x size x seed x formulation x solver,
// scores every cell against a reference optimum and a random baseline, and
// runs the Q-score-style size scan.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "qbench/encoding.hpp"
#include "qbench/generator.hpp"
#include "qbench/serialize.hpp"
#include "qbench/solvers/solve.hpp"

namespace qbench {

enum class Family { seams, sat };
enum class Formulation { qubo, pubo };

inline std::string_view to_string(Family f) {
  return f == Family::seams ? "seams" : "sat";
}
inline std::string_view to_string(Formulation f) {
  return f == Formulation::qubo ? "qubo" : "pubo";
}
inline std::string_view domain_of(Family f) {
  return f == Family::seams ? "robot_path_optimization" : "vehicle_configuration";
}
inline std::string_view class_of(Family f) {
  return f == Family::seams ? "tsp" : "sat";
}

inline Family family_from_string(std::string_view s) {
  if (s == "seams") return Family::seams;
  if (s == "sat") return Family::sat;
  throw ValidationError("unknown family '" + std::string(s) + "'");
}
inline Formulation formulation_from_string(std::string_view s) {
  if (s == "qubo") return Formulation::qubo;
  if (s == "pubo") return Formulation::pubo;
  throw ValidationError("unknown formulation '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Metrics

// (baseline - found) / (baseline - optimum), clamped to [0, 1]; a flat
// instance (baseline == optimum) scores 1. `found` within 1e-9 (relative) of
// the optimum scores exactly 1, so summation order cannot matter.
inline double approximation_quality(double found, double optimum,
                                    double random_baseline) {
  const double tol = 1e-9 * std::max(1.0, std::abs(optimum));
  if (found <= optimum + tol) return 1.0;
  const double span = random_baseline - optimum;
  if (!(span > tol)) return 1.0;
  return std::clamp((random_baseline - found) / span, 0.0, 1.0);
}

// Probability mass on the given optimal bitstrings. Empty when the result
// carries no distribution (not applicable, as opposed to zero).
inline std::optional<double> success_probability(const SolveResult& r,
                                                 const std::vector<Bits>& optima) {
  if (!r.distribution) return std::nullopt;
  double s = 0;
  for (const auto& o : optima) {
    const auto idx = index_from_bits(o);
    if (idx < r.distribution->size()) s += (*r.distribution)[idx];
  }
  return s;
}

struct SampledMean {
  double mean = 0;
  double standard_error = 0;
};

// Mean energy of uniformly random bitstrings from `samples` draws.
inline SampledMean sample_mean_energy(const CompiledProblem& cp,
                                      std::size_t samples, std::uint64_t seed) {
  if (samples < 2) throw ConfigError("need at least 2 samples");
  Rng rng(seed);
  Bits x(cp.n());
  double sum = 0, sq = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    for (auto& b : x) b = rng.bit() ? 1 : 0;
    const double e = cp.energy(x);
    sum += e;
    sq += e * e;
  }
  const double m = sum / static_cast<double>(samples);
  const double var = std::max(0.0, (sq - m * sum) / static_cast<double>(samples - 1));
  return {m, std::sqrt(var / static_cast<double>(samples))};
}

// Mean cost of a tour with a uniformly random order and random directions.
inline double random_tour_mean_cost(const SeamInstance& inst) {
  const std::size_t n = inst.size();
  double self = 0, cross = 0;
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t s2 = 0; s2 < n; ++s2)
      for (int d = 0; d < 2; ++d)
        for (int d2 = 0; d2 < 2; ++d2) {
          const double g = transition_cost(inst, {s, d != 0}, {s2, d2 != 0});
          if (s == s2) {
            if (d == d2) self += g;
          } else {
            cross += g;
          }
        }
  const double nd = static_cast<double>(n);
  const double mean_cross = n > 1 ? cross / (4 * nd * (nd - 1)) : 0.0;
  double m = inst.total_seam_length() + (nd - 1) * mean_cross;
  if (inst.closed_tour) m += n > 1 ? mean_cross : self / 2;
  return m;
}

// Expected number of violated clauses under a uniformly random assignment.
inline double random_assignment_mean_unsat(const SatInstance& inst) {
  double m = 0;
  for (const auto& clause : inst.clauses) {
    std::map<std::size_t, bool> polarity;
    bool tautology = false;
    for (const auto& lit : clause) {
      auto [it, fresh] = polarity.try_emplace(lit.component, lit.negated);
      if (!fresh && it->second != lit.negated) tautology = true;
    }
    if (!tautology) m += std::ldexp(1.0, -static_cast<int>(polarity.size()));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Records

struct BenchmarkRecord {
  std::string domain, problem_class, formulation, algorithm;
  std::string instance_id;
  std::uint64_t instance_seed = 0;
  std::uint64_t solver_seed = 0;
  std::size_t size = 0;       // N seams or V components
  std::size_t variables = 0;  // encoded variable count
  std::string status = "ok";  // ok | failed | timeout
  std::string error;

  std::optional<double> best_energy;
  // Native objective of the decoded result: tour cost or unsatisfied clauses.
  std::optional<double> objective;
  std::optional<double> oracle_optimum;
  std::string optimum_kind;  // exact | planted | best_known, empty if none
  std::optional<double> random_baseline;
  std::optional<double> approximation_quality;
  std::optional<double> success_probability;
  bool feasible = false;
  double wall_time = 0;

  friend bool operator==(const BenchmarkRecord&, const BenchmarkRecord&) = default;
};

namespace detail {

template <class T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

inline std::optional<double> opt_double(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return as_number(v, key);
}

}  // namespace detail

inline json record_to_json(const BenchmarkRecord& r) {
  return {{"domain", r.domain},
          {"class", r.problem_class},
          {"formulation", r.formulation},
          {"algorithm", r.algorithm},
          {"instance_id", r.instance_id},
          {"instance_seed", r.instance_seed},
          {"solver_seed", r.solver_seed},
          {"size", r.size},
          {"variables", r.variables},
          {"status", r.status},
          {"error", r.error},
          {"best_energy", detail::opt_json(r.best_energy)},
          {"objective", detail::opt_json(r.objective)},
          {"oracle_optimum", detail::opt_json(r.oracle_optimum)},
          {"optimum_kind", r.optimum_kind},
          {"random_baseline", detail::opt_json(r.random_baseline)},
          {"approximation_quality", detail::opt_json(r.approximation_quality)},
          {"success_probability", detail::opt_json(r.success_probability)},
          {"feasible", r.feasible},
          {"wall_time_s", r.wall_time}};
}

inline BenchmarkRecord record_from_json(const json& j) {
  detail::require_object(
      j, "record",
      {"domain", "class", "formulation", "algorithm", "instance_id",
       "instance_seed", "solver_seed", "size", "variables", "status", "error",
       "best_energy", "objective", "oracle_optimum", "optimum_kind",
       "random_baseline", "approximation_quality", "success_probability",
       "feasible", "wall_time_s"});
  BenchmarkRecord r;
  try {
    r.domain = j.at("domain").get<std::string>();
    r.problem_class = j.at("class").get<std::string>();
    r.formulation = j.at("formulation").get<std::string>();
    r.algorithm = j.at("algorithm").get<std::string>();
    r.instance_id = j.at("instance_id").get<std::string>();
    r.instance_seed = j.at("instance_seed").get<std::uint64_t>();
    r.solver_seed = j.at("solver_seed").get<std::uint64_t>();
    r.size = j.at("size").get<std::size_t>();
    r.variables = j.at("variables").get<std::size_t>();
    r.status = j.at("status").get<std::string>();
    r.error = j.at("error").get<std::string>();
    r.optimum_kind = j.at("optimum_kind").get<std::string>();
    r.feasible = j.at("feasible").get<bool>();
    r.wall_time = j.at("wall_time_s").get<double>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("record: ") + e.what());
  }
  r.best_energy = detail::opt_double(j, "best_energy");
  r.objective = detail::opt_double(j, "objective");
  r.oracle_optimum = detail::opt_double(j, "oracle_optimum");
  r.random_baseline = detail::opt_double(j, "random_baseline");
  r.approximation_quality = detail::opt_double(j, "approximation_quality");
  r.success_probability = detail::opt_double(j, "success_probability");
  if (r.approximation_quality &&
      !(*r.approximation_quality >= 0 && *r.approximation_quality <= 1))
    throw ValidationError("record: approximation_quality outside [0,1]");
  return r;
}

inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline constexpr const char* kCsvHeader =
    "domain,class,formulation,algorithm,size,variables,seed,energy,optimum,"
    "quality,success_prob,feasible,wall_time_s";

inline std::string record_csv_row(const BenchmarkRecord& r) {
  auto opt = [](const std::optional<double>& v) {
    return v ? format_number(*v) : std::string("n/a");
  };
  std::ostringstream os;
  os << r.domain << ',' << r.problem_class << ',' << r.formulation << ','
     << r.algorithm << ',' << r.size << ',' << r.variables << ','
     << r.instance_seed << ',' << opt(r.best_energy) << ','
     << opt(r.oracle_optimum) << ',' << opt(r.approximation_quality) << ','
     << opt(r.success_probability) << ',' << (r.feasible ? "true" : "false")
     << ',' << format_number(r.wall_time);
  return os.str();
}

inline void write_csv(std::ostream& os, const std::vector<BenchmarkRecord>& records) {
  os << kCsvHeader << '\n';
  for (const auto& r : records) os << record_csv_row(r) << '\n';
}

// ---------------------------------------------------------------------------
// Sweep configuration

struct FamilySweep {
  Family family = Family::seams;
  std::vector<std::size_t> sizes;
  std::vector<Formulation> formulations{Formulation::qubo};
  // seams
  bool closed_tour = false;
  // sat: clause count = ceil(clause_ratio * V)
  double clause_ratio = 2.5;
  std::size_t max_clause_size = 3;
  bool planted = true;
};

struct SweepConfig {
  std::vector<FamilySweep> families;
  std::size_t seeds = 3;  // instances per size
  std::uint64_t base_seed = 0;
  std::vector<SolverSpec> solvers;
  double threshold = 0.2;         // beta*
  double cell_time_budget = 0;    // seconds per cell, 0 = none
  std::size_t workers = 1;

  void validate() const {
    if (seeds < 1) throw ConfigError("seeds must be >= 1");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (!(threshold > 0 && threshold < 1))
      throw ConfigError("threshold must be in (0,1)");
    if (!(cell_time_budget >= 0)) throw ConfigError("time budget must be >= 0");
    for (const auto& f : families) {
      for (std::size_t k = 0; k < f.sizes.size(); ++k) {
        if (f.sizes[k] < 1) throw ConfigError("sizes must be >= 1");
        if (k > 0 && f.sizes[k] <= f.sizes[k - 1])
          throw ConfigError("sizes must be strictly increasing");
      }
      if (f.formulations.empty()) throw ConfigError("no formulation given");
      for (auto form : f.formulations)
        if (f.family == Family::seams && form != Formulation::qubo)
          throw ConfigError("the seams family only has a qubo formulation");
      if (f.family == Family::sat) {
        if (!(f.clause_ratio >= 0)) throw ConfigError("clause ratio must be >= 0");
        if (f.max_clause_size < 1) throw ConfigError("max clause size must be >= 1");
      }
    }
    for (const auto& s : solvers) {
      s.anneal.validate();
      s.qaoa.validate();
    }
  }
};

// Seams N = 3..6 and SAT V = 8..16, five instances each, all four solvers.
inline SweepConfig default_sweep() {
  SweepConfig cfg;
  FamilySweep seams;
  seams.family = Family::seams;
  seams.sizes = {3, 4, 5, 6};
  FamilySweep sat;
  sat.family = Family::sat;
  sat.sizes = {8, 9, 10, 11, 12, 13, 14, 15, 16};
  sat.formulations = {Formulation::pubo, Formulation::qubo};
  cfg.families = {seams, sat};
  cfg.seeds = 5;
  for (Backend b : {Backend::oracle, Backend::anneal, Backend::qaoa, Backend::random}) {
    SolverSpec s;
    s.backend = b;
    s.scale_schedule = true;
    s.qaoa.max_qubits = 18;
    cfg.solvers.push_back(s);
  }
  return cfg;
}

// JSON form of a sweep. Every field is optional on read and defaults as in
// the structs above.
inline json solver_spec_to_json(const SolverSpec& s) {
  return {{"backend", to_string(s.backend)},
          {"oracle_cap", s.oracle_cap},
          {"scale_schedule", s.scale_schedule},
          {"anneal",
           {{"t_initial", s.anneal.t_initial},
            {"alpha", s.anneal.alpha},
            {"sweeps", s.anneal.sweeps},
            {"restarts", s.anneal.restarts}}},
          {"qaoa",
           {{"layers", s.qaoa.layers},
            {"grid_resolution", s.qaoa.grid_resolution},
            {"refine_iterations", s.qaoa.refine_iterations},
            {"multistarts", s.qaoa.multistarts},
            {"samples", s.qaoa.samples},
            {"max_qubits", s.qaoa.max_qubits}}}};
}

namespace detail {

template <class T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("sweep config: bad value for \"") + key + "\"");
  }
}

}  // namespace detail

inline SolverSpec solver_spec_from_json(const json& j) {
  detail::require_object(j, "solver", {},
                         {"backend", "oracle_cap", "scale_schedule", "anneal", "qaoa"});
  SolverSpec s;
  std::string backend = "oracle";
  detail::read_field(j, "backend", backend);
  s.backend = backend_from_string(backend);
  detail::read_field(j, "oracle_cap", s.oracle_cap);
  detail::read_field(j, "scale_schedule", s.scale_schedule);
  if (j.contains("anneal")) {
    const auto& a = j.at("anneal");
    detail::require_object(a, "anneal", {}, {"t_initial", "alpha", "sweeps", "restarts"});
    detail::read_field(a, "t_initial", s.anneal.t_initial);
    detail::read_field(a, "alpha", s.anneal.alpha);
    detail::read_field(a, "sweeps", s.anneal.sweeps);
    detail::read_field(a, "restarts", s.anneal.restarts);
  }
  if (j.contains("qaoa")) {
    const auto& q = j.at("qaoa");
    detail::require_object(q, "qaoa", {},
                           {"layers", "grid_resolution", "refine_iterations",
                            "multistarts", "samples", "max_qubits"});
    detail::read_field(q, "layers", s.qaoa.layers);
    detail::read_field(q, "grid_resolution", s.qaoa.grid_resolution);
    detail::read_field(q, "refine_iterations", s.qaoa.refine_iterations);
    detail::read_field(q, "multistarts", s.qaoa.multistarts);
    detail::read_field(q, "samples", s.qaoa.samples);
    detail::read_field(q, "max_qubits", s.qaoa.max_qubits);
  }
  return s;
}

inline json sweep_config_to_json(const SweepConfig& cfg) {
  json fams = json::array();
  for (const auto& f : cfg.families) {
    json forms = json::array();
    for (auto x : f.formulations) forms.push_back(to_string(x));
    fams.push_back({{"family", to_string(f.family)},
                    {"sizes", f.sizes},
                    {"formulations", forms},
                    {"closed_tour", f.closed_tour},
                    {"clause_ratio", f.clause_ratio},
                    {"max_clause_size", f.max_clause_size},
                    {"planted", f.planted}});
  }
  json solvers = json::array();
  for (const auto& s : cfg.solvers) solvers.push_back(solver_spec_to_json(s));
  return {{"families", fams},
          {"seeds", cfg.seeds},
          {"base_seed", cfg.base_seed},
          {"solvers", solvers},
          {"threshold", cfg.threshold},
          {"cell_time_budget", cfg.cell_time_budget},
          {"workers", cfg.workers}};
}

inline SweepConfig sweep_config_from_json(const json& j) {
  detail::require_object(j, "sweep config", {},
                         {"families", "seeds", "base_seed", "solvers", "threshold",
                          "cell_time_budget", "workers"});
  SweepConfig cfg;
  if (j.contains("families")) {
    for (const auto& fj : detail::as_array(j.at("families"), "families")) {
      detail::require_object(fj, "family", {"family"},
                             {"sizes", "formulations", "closed_tour", "clause_ratio",
                              "max_clause_size", "planted"});
      FamilySweep f;
      std::string name;
      detail::read_field(fj, "family", name);
      f.family = family_from_string(name);
      if (f.family == Family::sat) f.formulations = {Formulation::pubo};
      detail::read_field(fj, "sizes", f.sizes);
      if (fj.contains("formulations")) {
        std::vector<std::string> forms;
        detail::read_field(fj, "formulations", forms);
        f.formulations.clear();
        for (const auto& x : forms) f.formulations.push_back(formulation_from_string(x));
      }
      detail::read_field(fj, "closed_tour", f.closed_tour);
      detail::read_field(fj, "clause_ratio", f.clause_ratio);
      detail::read_field(fj, "max_clause_size", f.max_clause_size);
      detail::read_field(fj, "planted", f.planted);
      cfg.families.push_back(std::move(f));
    }
  }
  detail::read_field(j, "seeds", cfg.seeds);
  detail::read_field(j, "base_seed", cfg.base_seed);
  if (j.contains("solvers"))
    for (const auto& sj : detail::as_array(j.at("solvers"), "solvers"))
      cfg.solvers.push_back(solver_spec_from_json(sj));
  detail::read_field(j, "threshold", cfg.threshold);
  detail::read_field(j, "cell_time_budget", cfg.cell_time_budget);
  detail::read_field(j, "workers", cfg.workers);
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// Running

namespace detail {

struct PreparedInstance {
  Family family;
  std::size_t size;
  std::size_t seed_index;
  std::uint64_t seed;
  std::string id;
  std::optional<SeamInstance> seams;
  std::optional<SatInstance> sat;
  double baseline = 0;
  std::optional<double> optimum;
  std::string optimum_kind;
};

struct Cell {
  std::size_t instance;
  Formulation formulation;
  std::size_t formulation_index;
  std::size_t solver_index;
};

inline std::uint64_t instance_seed(std::uint64_t base, Family f, std::size_t size,
                                   std::size_t k) {
  return mix_seed(mix_seed(mix_seed(base, f == Family::seams ? 1 : 2), size), k);
}

inline PreparedInstance prepare_instance(const FamilySweep& fs, std::size_t size,
                                         std::size_t k, std::uint64_t base,
                                         std::size_t oracle_cap) {
  PreparedInstance p;
  p.family = fs.family;
  p.size = size;
  p.seed_index = k;
  p.seed = instance_seed(base, fs.family, size, k);
  GeneratorConfig g;
  g.seed = p.seed;
  if (fs.family == Family::seams) {
    p.id = "seams-N" + std::to_string(size) + "-k" + std::to_string(k);
    g.seams.count = size;
    g.seams.closed_tour = fs.closed_tour;
    p.seams = gen_seam_instance(g);
    p.baseline = random_tour_mean_cost(*p.seams);
    if (size <= kDefaultTourCap) {
      p.optimum = brute_force_tour(*p.seams).cost;
      p.optimum_kind = "exact";
    }
  } else {
    p.id = "sat-V" + std::to_string(size) + "-k" + std::to_string(k);
    g.sat.num_components = size;
    g.sat.clause_count =
        static_cast<std::size_t>(std::ceil(fs.clause_ratio * static_cast<double>(size)));
    g.sat.max_clause_size = std::min(fs.max_clause_size, size);
    g.sat.planted = fs.planted;
    p.sat = gen_sat_instance(g).instance;
    p.baseline = random_assignment_mean_unsat(*p.sat);
    if (fs.planted) {
      p.optimum = 0.0;
      p.optimum_kind = "planted";
    } else if (size <= oracle_cap) {
      p.optimum = brute_force(encode_sat_pubo(*p.sat)).best_energy;
      p.optimum_kind = "exact";
    }
  }
  return p;
}

inline void score(BenchmarkRecord& r, const PreparedInstance& inst) {
  r.random_baseline = inst.baseline;
  if (inst.optimum) {
    r.oracle_optimum = inst.optimum;
    r.optimum_kind = inst.optimum_kind;
  }
  if (r.status != "ok" || !r.oracle_optimum) return;
  if (inst.family == Family::seams && !r.feasible) {
    r.approximation_quality = 0.0;
    return;
  }
  r.approximation_quality =
      approximation_quality(*r.objective, *r.oracle_optimum, inst.baseline);
}

inline BenchmarkRecord run_cell(const Cell& cell, const PreparedInstance& inst,
                                const SolverSpec& spec, double budget) {
  BenchmarkRecord r;
  r.domain = domain_of(inst.family);
  r.problem_class = class_of(inst.family);
  r.formulation = to_string(cell.formulation);
  r.algorithm = to_string(spec.backend);
  r.instance_id = inst.id;
  r.instance_seed = inst.seed;
  r.solver_seed =
      mix_seed(mix_seed(inst.seed, cell.formulation_index + 1), cell.solver_index + 1);
  r.size = inst.size;

  Stopwatch sw;
  try {
    const Deadline deadline = Deadline::after(budget);
    if (inst.family == Family::seams) {
      const auto enc = encode_seam_qubo(*inst.seams);
      r.variables = enc.qubo.n();
      Bits bits;
      if (spec.backend == Backend::oracle) {
        // 2 N^2 outgrows bitstring enumeration quickly; search tours instead
        const auto best = brute_force_tour(*inst.seams, kDefaultTourCap, deadline);
        bits = encode_tour_bits(best.tour, enc.var_map);
        r.best_energy = qubo_energy(enc.qubo, bits);
      } else {
        const auto res = solve(Problem(enc.qubo), spec, r.solver_seed, deadline);
        bits = res.best_bits;
        r.best_energy = res.best_energy;
        r.success_probability = res.success_probability;
      }
      const auto dec = decode_seam_solution(bits, enc.var_map);
      r.feasible = dec.feasible();
      if (dec.tour) r.objective = tour_cost(*inst.seams, *dec.tour);
    } else {
      const Pubo pubo = encode_sat_pubo(*inst.sat);
      Problem prob = pubo;
      if (cell.formulation == Formulation::qubo) prob = quadratize(pubo).qubo;
      r.variables = std::visit([](const auto& p) { return p.n(); }, prob);
      const auto res = solve(prob, spec, r.solver_seed, deadline);
      r.best_energy = res.best_energy;
      r.success_probability = res.success_probability;
      const Bits x(res.best_bits.begin(),
                   res.best_bits.begin() + static_cast<std::ptrdiff_t>(inst.size));
      const auto unsat = count_unsat(*inst.sat, x);
      r.objective = static_cast<double>(unsat);
      r.feasible = unsat == 0;
    }
  } catch (const TimeoutError& e) {
    r.status = "timeout";
    r.error = e.what();
  } catch (const std::exception& e) {
    r.status = "failed";
    r.error = e.what();
  }
  r.wall_time = sw.seconds();
  if (r.status != "ok") {
    r.best_energy.reset();
    r.objective.reset();
    r.success_probability.reset();
    r.feasible = false;
  }
  score(r, inst);
  return r;
}

}  // namespace detail

using RecordSink = std::function<void(const BenchmarkRecord&)>;

// Runs every cell. `sink` sees each record as soon as it and all earlier cells
// are done, in cell order, from one thread at a time. Instances without an
// exact or planted optimum are scored afterwards against the best feasible
// objective any cell reached (optimum_kind best_known); the returned records
// carry those scores, the streamed ones do not.
inline std::vector<BenchmarkRecord> run_benchmark(const SweepConfig& cfg,
                                                  const RecordSink& sink = {}) {
  cfg.validate();
  std::size_t oracle_cap = kDefaultOracleCap;
  for (const auto& s : cfg.solvers) oracle_cap = std::min(oracle_cap, s.oracle_cap);

  std::vector<detail::PreparedInstance> instances;
  std::vector<detail::Cell> cells;
  for (const auto& fs : cfg.families)
    for (auto size : fs.sizes)
      for (std::size_t k = 0; k < cfg.seeds; ++k) {
        instances.push_back(
            detail::prepare_instance(fs, size, k, cfg.base_seed, oracle_cap));
        for (std::size_t f = 0; f < fs.formulations.size(); ++f)
          for (std::size_t s = 0; s < cfg.solvers.size(); ++s)
            cells.push_back({instances.size() - 1, fs.formulations[f], f, s});
      }

  std::vector<BenchmarkRecord> records(cells.size());
  std::vector<char> done(cells.size(), 0);
  std::mutex mu;
  std::size_t flushed = 0;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= cells.size()) return;
      const auto& cell = cells[c];
      auto rec = detail::run_cell(cell, instances[cell.instance],
                                  cfg.solvers[cell.solver_index], cfg.cell_time_budget);
      std::lock_guard lock(mu);
      records[c] = std::move(rec);
      done[c] = 1;
      while (flushed < cells.size() && done[flushed]) {
        if (sink) sink(records[flushed]);
        ++flushed;
      }
    }
  };
  const std::size_t nthreads = std::min(cfg.workers, std::max<std::size_t>(cells.size(), 1));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::map<std::string, double> best_known;
  for (const auto& r : records)
    if (!r.oracle_optimum && r.status == "ok" && r.feasible && r.objective) {
      auto [it, fresh] = best_known.try_emplace(r.instance_id, *r.objective);
      if (!fresh) it->second = std::min(it->second, *r.objective);
    }
  for (std::size_t c = 0; c < records.size(); ++c) {
    auto& r = records[c];
    auto it = best_known.find(r.instance_id);
    if (r.oracle_optimum || it == best_known.end()) continue;
    auto inst = instances[cells[c].instance];
    inst.optimum = it->second;
    inst.optimum_kind = "best_known";
    detail::score(r, inst);
  }
  return records;
}

// Streams records to a JSON-lines file as cells finish, then rewrites it with
// the final scored records.
inline std::vector<BenchmarkRecord> run_benchmark_to_file(const SweepConfig& cfg,
                                                          const std::string& path) {
  std::vector<BenchmarkRecord> records;
  {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    records = run_benchmark(cfg, [&](const BenchmarkRecord& r) {
      out << record_to_json(r).dump() << '\n';
      out.flush();
    });
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    for (const auto& r : records) out << record_to_json(r).dump() << '\n';
    if (!out) throw ValidationError("cannot write " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw ValidationError("cannot replace " + path);
  return records;
}

// ---------------------------------------------------------------------------
// Q-score-style scan

struct QScoreRow {
  std::size_t size = 0;
  double mean_quality = 0;
  bool passed = false;
  std::string note;
};

struct QScoreResult {
  std::optional<std::size_t> largest_passing;
  std::vector<QScoreRow> rows;

  std::string summary() const {
    return largest_passing ? "largest passing size " + std::to_string(*largest_passing)
                           : std::string("none passed");
  }
};

// One family, one formulation. Sizes are run in increasing order and the scan
// stops at the first size whose mean quality over seeds is below the
// threshold. Cells without quality (failures, timeouts, instances with no
// exact or planted reference) count as 0.
inline QScoreResult qscore_sweep(const SweepConfig& cfg, const SolverSpec& solver) {
  cfg.validate();
  if (cfg.families.size() != 1 || cfg.families[0].formulations.size() != 1)
    throw ConfigError("qscore needs exactly one family and one formulation");
  QScoreResult out;
  for (auto size : cfg.families[0].sizes) {
    SweepConfig one = cfg;
    one.families[0].sizes = {size};
    one.solvers = {solver};
    const auto records = run_benchmark(one);
    QScoreRow row;
    row.size = size;
    double sum = 0;
    for (const auto& r : records) {
      if (r.approximation_quality && r.optimum_kind != "best_known")
        sum += *r.approximation_quality;
      else if (row.note.empty())
        row.note = r.status != "ok" ? r.status + ": " + r.error : "no reference optimum";
    }
    row.mean_quality = sum / static_cast<double>(records.size());
    row.passed = row.mean_quality >= cfg.threshold;
    out.rows.push_back(row);
    if (!row.passed) break;
    out.largest_passing = size;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report over a JSON-lines record file

struct ReportRow {
  std::string solver;
  std::size_t size = 0;
  std::size_t records = 0;
  std::size_t scored = 0;
  std::optional<double> mean_quality, min_quality;
  bool passed = false;
};

struct LineError {
  std::size_t line;
  std::string message;
};

struct Report {
  std::vector<ReportRow> rows;
  std::vector<LineError> errors;
  double threshold = 0.2;
};

inline Report build_report(std::istream& in, double threshold) {
  Report rep;
  rep.threshold = threshold;
  std::map<std::pair<std::string, std::size_t>, ReportRow> groups;
  std::map<std::pair<std::string, std::size_t>, double> sums;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    BenchmarkRecord r;
    try {
      r = record_from_json(json::parse(line));
    } catch (const std::exception& e) {
      rep.errors.push_back({lineno, e.what()});
      continue;
    }
    const auto key = std::make_pair(r.algorithm, r.size);
    auto& row = groups[key];
    row.solver = r.algorithm;
    row.size = r.size;
    ++row.records;
    if (r.approximation_quality) {
      const double q = *r.approximation_quality;
      ++row.scored;
      sums[key] += q;
      row.min_quality = row.min_quality ? std::min(*row.min_quality, q) : q;
    }
  }
  for (auto& [key, row] : groups) {
    if (row.scored > 0) row.mean_quality = sums[key] / static_cast<double>(row.scored);
    row.passed = row.mean_quality && *row.mean_quality >= threshold;
    rep.rows.push_back(row);
  }
  return rep;
}

inline std::string report_text(const Report& rep) {
  auto q = [](const std::optional<double>& v) {
    if (!v) return std::string("n/a");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return std::string(buf);
  };
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-8s %6s %8s %8s %9s %9s  %s\n", "solver", "size",
                "records", "scored", "mean_q", "min_q", "pass");
  os << buf;
  for (const auto& r : rep.rows) {
    std::snprintf(buf, sizeof buf, "%-8s %6zu %8zu %8zu %9s %9s  %s\n",
                  r.solver.c_str(), r.size, r.records, r.scored,
                  q(r.mean_quality).c_str(), q(r.min_quality).c_str(),
                  r.passed ? "pass" : "fail");
    os << buf;
  }
  os << "threshold " << format_number(rep.threshold) << ", " << rep.rows.size()
     << " rows\n";
  for (const auto& e : rep.errors)
    os << "line " << e.line << ": " << e.message << '\n';
  return os.str();
}

inline std::string report_csv(const Report& rep) {
  std::ostringstream os;
  os << "solver,size,records,scored,mean_quality,min_quality,passed\n";
  for (const auto& r : rep.rows)
    os << r.solver << ',' << r.size << ',' << r.records << ',' << r.scored << ','
       << (r.mean_quality ? format_number(*r.mean_quality) : "n/a") << ','
       << (r.min_quality ? format_number(*r.min_quality) : "n/a") << ','
       << (r.passed ? "true" : "false") << '\n';
  return os.str();
}

}  // namespace qbench
