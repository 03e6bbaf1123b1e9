#pragma once

// Subcommand front end: generate | encode | solve | bench | qscore | report.
// Files are the only interchange and all randomness comes from --seed.
// Exit codes: 0 ok, 1 bad input (message names the flag), 2 internal error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "qbench/bench.hpp"
#include "qbench/encoding.hpp"
#include "qbench/generator.hpp"
#include "qbench/serialize.hpp"
#include "qbench/solvers/solve.hpp"

namespace qbench::cli {

struct FlagError : ValidationError {
  FlagError(const std::string& flag, const std::string& msg)
      : ValidationError(flag + ": " + msg) {}
};

inline void require_readable(const std::string& flag, const std::string& path) {
  if (std::filesystem::is_directory(path))
    throw FlagError(flag, "'" + path + "' is a directory");
  std::ifstream in(path);
  if (!in) throw FlagError(flag, "cannot read '" + path + "'");
}

inline void require_writable(const std::string& flag, const std::string& path) {
  namespace fs = std::filesystem;
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent))
    throw FlagError(flag, "no such directory for '" + path + "'");
  if (fs::is_directory(path)) throw FlagError(flag, "'" + path + "' is a directory");
}

// Input and config errors raised inside fn are attributed to `flag`.
template <class F>
auto blame(const std::string& flag, F&& fn) {
  try {
    return fn();
  } catch (const FlagError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw FlagError(flag, e.what());
  } catch (const CapExceeded& e) {
    throw FlagError(flag, e.what());
  }
}

using Instance = std::variant<SeamInstance, SatInstance>;

inline Instance instance_from_json(const json& j) {
  if (j.is_object() && j.contains("seams")) return seam_instance_from_json(j);
  if (j.is_object() && j.contains("num_components")) return sat_instance_from_json(j);
  throw ValidationError("not a seam or SAT instance");
}

inline json solve_result_to_json(const SolveResult& r) {
  json j{{"algorithm", r.algorithm},
         {"best_bits", bits_to_string(r.best_bits)},
         {"best_energy", r.best_energy},
         {"feasible", r.feasible},
         {"wall_time_s", r.wall_time},
         {"evaluations", r.evaluations},
         {"seed", r.seed}};
  if (r.optimum_count) j["optimum_count"] = *r.optimum_count;
  if (r.angles) j["angles"] = {{"gammas", r.angles->gammas}, {"betas", r.angles->betas}};
  if (r.expectation) j["expectation"] = *r.expectation;
  if (r.success_probability) j["success_probability"] = *r.success_probability;
  // the full distribution is only written for small registers
  if (r.distribution && r.best_bits.size() <= 16) {
    json d = json::object();
    for (std::size_t z = 0; z < r.distribution->size(); ++z)
      if ((*r.distribution)[z] > 0)
        d[bits_to_string(bits_from_index(z, r.best_bits.size()))] = (*r.distribution)[z];
    j["distribution"] = std::move(d);
  }
  return j;
}

inline std::vector<std::size_t> parse_sizes(const std::string& flag, const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || p != item.data() + item.size() || item.empty())
      throw FlagError(flag, "expected a comma-separated list of sizes, got '" + text + "'");
    out.push_back(v);
  }
  return out;
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

// ---------------------------------------------------------------------------

struct SolverFlags {
  std::size_t cap = kDefaultOracleCap;
  AnnealSchedule anneal;
  bool scaled = false;
  QaoaConfig qaoa;

  void add(CLI::App* app) {
    app->add_option("--cap", cap, "oracle variable cap")->check(CLI::Range(1, 62));
    app->add_option("--t-initial", anneal.t_initial, "anneal start temperature");
    app->add_option("--alpha", anneal.alpha, "anneal cooling factor");
    app->add_option("--sweeps", anneal.sweeps, "anneal sweeps per restart");
    app->add_option("--restarts", anneal.restarts, "anneal restarts");
    app->add_flag("--scaled-schedule", scaled,
                  "derive the anneal temperatures from the coefficients");
    app->add_option("--layers", qaoa.layers, "QAOA depth p");
    app->add_option("--grid", qaoa.grid_resolution, "QAOA p=1 grid points per axis");
    app->add_option("--refine", qaoa.refine_iterations, "simplex iterations");
    app->add_option("--multistarts", qaoa.multistarts, "QAOA random starts for p>1");
    app->add_option("--samples", qaoa.samples, "QAOA measurement samples");
    app->add_option("--max-qubits", qaoa.max_qubits, "statevector cap");
  }

  // Checks each parameter against its own flag.
  void validate() const {
    auto check = [](const std::string& flag, auto&& fn) { blame(flag, [&] { fn(); return 0; }); };
    AnnealSchedule a;
    a.t_initial = anneal.t_initial;
    check("--t-initial", [&] { a.validate(); });
    a.alpha = anneal.alpha;
    check("--alpha", [&] { a.validate(); });
    a.sweeps = anneal.sweeps;
    check("--sweeps", [&] { a.validate(); });
    a.restarts = anneal.restarts;
    check("--restarts", [&] { a.validate(); });
    QaoaConfig q;
    q.layers = qaoa.layers;
    check("--layers", [&] { q.validate(); });
    q.grid_resolution = qaoa.grid_resolution;
    check("--grid", [&] { q.validate(); });
    q.multistarts = qaoa.multistarts;
    check("--multistarts", [&] { q.validate(); });
    q.samples = qaoa.samples;
    check("--samples", [&] { q.validate(); });
    q.max_qubits = qaoa.max_qubits;
    check("--max-qubits", [&] { q.validate(); });
  }

  SolverSpec spec(Backend b) const {
    SolverSpec s;
    s.backend = b;
    s.oracle_cap = cap;
    s.anneal = anneal;
    s.scale_schedule = scaled;
    s.qaoa = qaoa;
    return s;
  }

  // Flag responsible for a cap refusal by this backend.
  static std::string cap_flag(Backend b) {
    return b == Backend::qaoa ? "--max-qubits" : b == Backend::oracle ? "--cap" : "--in";
  }
};

inline std::string sidecar(const std::string& out, const char* what) {
  return out + "." + what + ".json";
}

// ---------------------------------------------------------------------------

struct GenerateCmd {
  std::string family, out;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::vector<double> box{1000, 1000, 1000};
  double min_length = 50, max_length = 300;
  bool closed = false;
  std::size_t clauses = 20, max_clause_size = 3;
  bool no_plant = false;

  CLI::App* add(CLI::App& app) {
    auto* sub = app.add_subcommand("generate", "generate a random instance");
    sub->add_option("--family", family, "seams | sat")
        ->required()
        ->check(CLI::IsMember({"seams", "sat"}));
    sub->add_option("--n", n, "seam count N or component count V")
        ->required()
        ->check(CLI::Range(std::size_t{1}, std::size_t{1} << 20));
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--out", out, "instance JSON path")->required();
    sub->add_option("--box", box, "seams: bounding box x y z (mm)")->expected(3);
    sub->add_option("--min-length", min_length, "seams: minimum seam length (mm)");
    sub->add_option("--max-length", max_length, "seams: maximum seam length (mm)");
    sub->add_flag("--closed", closed, "seams: tour returns to its start");
    sub->add_option("--clauses", clauses, "sat: clause count");
    sub->add_option("--max-clause-size", max_clause_size, "sat: largest clause");
    sub->add_flag("--no-plant", no_plant, "sat: do not plant a satisfying assignment");
    return sub;
  }

  int run(std::ostream& out_stream) const {
    require_writable("--out", out);
    GeneratorConfig g;
    g.seed = seed;
    json cfg{{"command", "generate"}, {"family", family}, {"n", n}, {"seed", seed}};
    json doc;
    if (family == "seams") {
      g.seams.count = n;
      g.seams.box = {box[0], box[1], box[2]};
      g.seams.min_length = min_length;
      g.seams.max_length = max_length;
      g.seams.closed_tour = closed;
      // validate one parameter at a time so the error names its flag
      SeamGenParams staged;
      staged.box = g.seams.box;
      blame("--box", [&] { validate(staged); return 0; });
      staged.max_length = max_length;
      staged.min_length = std::min(min_length, max_length);
      blame("--max-length", [&] { validate(staged); return 0; });
      blame("--min-length", [&] { validate(g.seams); return 0; });
      doc = seam_instance_to_json(gen_seam_instance(g));
      cfg["box"] = box;
      cfg["min_length"] = min_length;
      cfg["max_length"] = max_length;
      cfg["closed"] = closed;
    } else {
      g.sat = {n, clauses, max_clause_size, !no_plant};
      blame("--max-clause-size", [&] { validate(g.sat); return 0; });
      const auto gen = gen_sat_instance(g);
      doc = sat_instance_to_json(gen.instance);
      cfg["clauses"] = clauses;
      cfg["max_clause_size"] = max_clause_size;
      cfg["planted"] = gen.planted ? json(bits_to_string(*gen.planted)) : json(nullptr);
    }
    write_json_file(out, doc);
    write_json_file(sidecar(out, "config"), cfg);
    out_stream << "wrote " << out << '\n';
    return 0;
  }
};

struct EncodeCmd {
  std::string in, out, formulation = "qubo";
  std::optional<double> penalty;
  double scale = 1.0, clause_weight = 1.0;
  bool ising = false;

  CLI::App* add(CLI::App& app) {
    auto* sub = app.add_subcommand("encode", "encode an instance as QUBO or PUBO");
    sub->add_option("--in", in, "instance JSON")->required();
    sub->add_option("--formulation", formulation, "qubo | pubo")
        ->check(CLI::IsMember({"qubo", "pubo"}));
    sub->add_option("--out", out, "problem JSON path")->required();
    sub->add_option("--penalty", penalty, "seams: constraint penalty A");
    sub->add_option("--scale", scale, "seams: objective scale B");
    sub->add_option("--clause-weight", clause_weight, "sat: clause weight");
    sub->add_flag("--ising", ising, "also write <out>.ising.json (qubo only)");
    return sub;
  }

  int run(std::ostream& os) const {
    require_readable("--in", in);
    require_writable("--out", out);
    const Instance inst = blame("--in", [&] { return instance_from_json(read_json_file(in)); });
    PenaltyWeights w;
    w.constraint_penalty = penalty;
    w.objective_scale = scale;
    w.clause_weight = clause_weight;
    json cfg{{"command", "encode"}, {"in", in}, {"formulation", formulation},
             {"scale", scale}, {"clause_weight", clause_weight},
             {"penalty", penalty ? json(*penalty) : json(nullptr)}};
    Problem prob;
    json varmap;
    if (const auto* seams = std::get_if<SeamInstance>(&inst)) {
      if (formulation != "qubo")
        throw FlagError("--formulation", "seam instances only have a qubo formulation");
      const auto enc = blame(penalty ? "--penalty" : "--scale",
                             [&] { return encode_seam_qubo(*seams, w); });
      prob = enc.qubo;
      json vars = json::array();
      for (std::size_t i = 0; i < enc.var_map.num_variables(); ++i) {
        const auto k = enc.var_map.key(i);
        vars.push_back({{"index", i}, {"seam", k.seam}, {"reversed", k.reversed}, {"slot", k.slot}});
      }
      varmap = {{"kind", "seams"},
                {"num_seams", enc.var_map.num_seams()},
                {"num_variables", enc.var_map.num_variables()},
                {"constraint_penalty", enc.constraint_penalty},
                {"variables", std::move(vars)}};
    } else {
      const auto& sat = std::get<SatInstance>(inst);
      const Pubo p = blame("--clause-weight", [&] { return encode_sat_pubo(sat, w); });
      json vars = json::array();
      for (std::size_t i = 0; i < sat.num_components; ++i)
        vars.push_back({{"index", i}, {"component", i}});
      varmap = {{"kind", "sat"}, {"num_components", sat.num_components}};
      if (formulation == "pubo") {
        prob = p;
      } else {
        auto [q, qmap] = quadratize(p);
        for (const auto& a : qmap.ancillas)
          vars.push_back({{"index", a.index}, {"ancilla", {a.i, a.j}}});
        varmap["ancilla_penalty"] = qmap.penalty;
        prob = std::move(q);
      }
      varmap["num_variables"] = vars.size();
      varmap["variables"] = std::move(vars);
    }
    if (ising && !std::holds_alternative<Qubo>(prob))
      throw FlagError("--ising", "only available for the qubo formulation");
    write_json_file(out, problem_to_json(prob));
    write_json_file(sidecar(out, "varmap"), varmap);
    write_json_file(sidecar(out, "config"), cfg);
    if (ising) write_json_file(sidecar(out, "ising"), ising_to_json(qubo_to_ising(std::get<Qubo>(prob))));
    os << "wrote " << out << " (" << varmap["num_variables"].get<std::size_t>()
       << " variables)\n";
    return 0;
  }
};

struct SolveCmd {
  std::string in, out, backend = "oracle", instance;
  std::uint64_t seed = 0;
  double time_budget = 0;
  SolverFlags solver;

  CLI::App* add(CLI::App& app) {
    auto* sub = app.add_subcommand("solve", "solve a QUBO or PUBO");
    sub->add_option("--in", in, "problem JSON")->required();
    sub->add_option("--out", out, "result JSON path")->required();
    sub->add_option("--backend", backend, "oracle | anneal | qaoa | random")
        ->check(CLI::IsMember({"oracle", "anneal", "qaoa", "random"}));
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--time-budget", time_budget, "seconds, 0 for none")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--instance", instance,
                    "native instance the problem was encoded from; decodes the result");
    solver.add(sub);
    return sub;
  }

  int run(std::ostream& os) const {
    require_readable("--in", in);
    if (!instance.empty()) require_readable("--instance", instance);
    require_writable("--out", out);
    solver.validate();
    const Problem prob = blame("--in", [&] { return problem_from_json(read_json_file(in)); });
    const std::size_t n = std::visit([](const auto& p) { return p.n(); }, prob);
    std::optional<Instance> inst;
    if (!instance.empty())
      inst = blame("--instance", [&] { return instance_from_json(read_json_file(instance)); });

    const Backend b = backend_from_string(backend);
    SolveResult r;
    try {
      r = blame(SolverFlags::cap_flag(b), [&] {
        return solve(prob, solver.spec(b), seed, Deadline::after(time_budget));
      });
    } catch (const TimeoutError& e) {
      throw FlagError("--time-budget", e.what());
    }

    json decoded;
    if (inst) {
      if (const auto* seams = std::get_if<SeamInstance>(&*inst)) {
        const SeamVarMap vm(seams->size());
        if (vm.num_variables() != n)
          throw FlagError("--instance", "problem does not encode this seam instance");
        const auto dec = decode_seam_solution(r.best_bits, vm);
        r.feasible = dec.feasible();
        if (dec.tour) {
          json steps = json::array();
          for (const auto& s : dec.tour->steps) steps.push_back({s.seam, s.reversed ? 1 : 0});
          decoded = {{"tour", steps}, {"tour_cost", tour_cost(*seams, *dec.tour)}};
        } else {
          json v = json::array();
          for (const auto& x : dec.violations) v.push_back(x.describe());
          decoded = {{"violations", v}};
        }
      } else {
        const auto& sat = std::get<SatInstance>(*inst);
        if (sat.num_components > n)
          throw FlagError("--instance", "problem has fewer variables than the instance");
        const Bits x(r.best_bits.begin(),
                     r.best_bits.begin() + static_cast<std::ptrdiff_t>(sat.num_components));
        const auto unsat = count_unsat(sat, x);
        r.feasible = unsat == 0;
        decoded = {{"assignment", bits_to_string(x)}, {"unsatisfied", unsat}};
      }
    }
    json j = solve_result_to_json(r);
    if (!decoded.is_null()) j["decoded"] = decoded;
    write_json_file(out, j);
    os << r.algorithm << " energy " << format_number(r.best_energy) << " bits "
       << bits_to_string(r.best_bits) << '\n';
    return 0;
  }
};

struct BenchCmd {
  std::string config, out, csv, seam_sizes, sat_sizes, sat_formulations = "pubo",
      solvers = "oracle,anneal,qaoa,random";
  std::uint64_t seed = 0;
  std::size_t seeds = 5, workers = 1, qaoa_max_qubits = 18, qaoa_grid = 32;
  double threshold = 0.2, time_budget = 0;
  bool closed = false;
  CLI::App* sub = nullptr;

  CLI::App* add(CLI::App& app) {
    sub = app.add_subcommand("bench", "run a benchmark sweep");
    sub->add_option("--config", config, "sweep config JSON (flags given override it)");
    sub->add_option("--out", out, "records JSON-lines path")->required();
    sub->add_option("--csv", csv, "also write a CSV export");
    sub->add_option("--seed", seed, "base seed of the sweep");
    sub->add_option("--seeds", seeds, "instances per size")->check(CLI::PositiveNumber);
    sub->add_option("--seam-sizes", seam_sizes, "comma-separated N values");
    sub->add_option("--sat-sizes", sat_sizes, "comma-separated V values");
    sub->add_option("--sat-formulations", sat_formulations, "pubo,qubo");
    sub->add_option("--solvers", solvers, "comma-separated backends");
    sub->add_option("--threshold", threshold, "quality threshold");
    sub->add_option("--time-budget", time_budget, "seconds per cell, 0 for none")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--workers", workers, "parallel cells")->check(CLI::PositiveNumber);
    sub->add_option("--qaoa-max-qubits", qaoa_max_qubits, "statevector cap in the sweep");
    sub->add_option("--qaoa-grid", qaoa_grid, "QAOA grid points per axis");
    sub->add_flag("--closed", closed, "closed seam tours");
    return sub;
  }

  bool given(const char* flag) const { return sub->get_option(flag)->count() > 0; }

  SweepConfig build() const {
    SweepConfig cfg;
    if (!config.empty()) {
      cfg = blame("--config", [&] { return sweep_config_from_json(read_json_file(config)); });
    } else if (!given("--seam-sizes") && !given("--sat-sizes")) {
      cfg = default_sweep();
    }
    if (given("--seam-sizes") || given("--sat-sizes")) {
      cfg.families.clear();
      if (given("--seam-sizes")) {
        FamilySweep f;
        f.family = Family::seams;
        f.sizes = parse_sizes("--seam-sizes", seam_sizes);
        f.closed_tour = closed;
        cfg.families.push_back(f);
      }
      if (given("--sat-sizes")) {
        FamilySweep f;
        f.family = Family::sat;
        f.sizes = parse_sizes("--sat-sizes", sat_sizes);
        f.formulations.clear();
        for (const auto& s : split_list(sat_formulations))
          f.formulations.push_back(
              blame("--sat-formulations", [&] { return formulation_from_string(s); }));
        cfg.families.push_back(f);
      }
    }
    if (given("--solvers") || config.empty()) {
      if (given("--solvers") || cfg.solvers.empty()) {
        cfg.solvers.clear();
        for (const auto& s : split_list(solvers)) {
          SolverSpec spec;
          spec.backend = blame("--solvers", [&] { return backend_from_string(s); });
          spec.scale_schedule = true;
          cfg.solvers.push_back(spec);
        }
      }
    }
    for (auto& s : cfg.solvers) {
      if (given("--qaoa-max-qubits") || config.empty()) s.qaoa.max_qubits = qaoa_max_qubits;
      if (given("--qaoa-grid") || config.empty()) s.qaoa.grid_resolution = qaoa_grid;
    }
    if (given("--seed") || config.empty()) cfg.base_seed = seed;
    if (given("--seeds") || config.empty()) cfg.seeds = seeds;
    if (given("--threshold") || config.empty()) cfg.threshold = threshold;
    if (given("--time-budget") || config.empty()) cfg.cell_time_budget = time_budget;
    if (given("--workers") || config.empty()) cfg.workers = workers;
    blame("--threshold", [&] { if (!(cfg.threshold > 0 && cfg.threshold < 1)) cfg.validate(); return 0; });
    blame("--seam-sizes", [&] { cfg.validate(); return 0; });
    return cfg;
  }

  int run(std::ostream& os) const {
    if (!config.empty()) require_readable("--config", config);
    require_writable("--out", out);
    if (!csv.empty()) require_writable("--csv", csv);
    const SweepConfig cfg = build();
    write_json_file(sidecar(out, "config"), sweep_config_to_json(cfg));
    const auto records = run_benchmark_to_file(cfg, out);
    if (!csv.empty()) {
      std::ofstream c(csv);
      write_csv(c, records);
    }
    std::size_t failed = 0, timeouts = 0;
    for (const auto& r : records) {
      failed += r.status == "failed";
      timeouts += r.status == "timeout";
    }
    os << records.size() << " records (" << failed << " failed, " << timeouts
       << " timed out) -> " << out << '\n';
    return 0;
  }
};

struct QscoreCmd {
  std::string family, sizes, formulation, backend = "oracle", out;
  std::uint64_t seed = 0;
  std::size_t seeds = 3;
  double threshold = 0.2, time_budget = 0;
  SolverFlags solver;

  CLI::App* add(CLI::App& app) {
    auto* sub = app.add_subcommand("qscore", "largest size a solver handles at the threshold");
    sub->add_option("--family", family, "seams | sat")
        ->required()
        ->check(CLI::IsMember({"seams", "sat"}));
    sub->add_option("--sizes", sizes, "comma-separated increasing sizes")->required();
    sub->add_option("--formulation", formulation, "qubo | pubo")
        ->check(CLI::IsMember({"qubo", "pubo"}));
    sub->add_option("--backend", backend, "oracle | anneal | qaoa | random")
        ->check(CLI::IsMember({"oracle", "anneal", "qaoa", "random"}));
    sub->add_option("--seed", seed, "base seed");
    sub->add_option("--seeds", seeds, "instances per size")->check(CLI::PositiveNumber);
    sub->add_option("--threshold", threshold, "quality threshold");
    sub->add_option("--time-budget", time_budget, "seconds per cell, 0 for none")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--out", out, "result JSON path");
    solver.add(sub);
    solver.scaled = true;
    return sub;
  }

  int run(std::ostream& os) const {
    if (!out.empty()) require_writable("--out", out);
    solver.validate();
    SweepConfig cfg;
    FamilySweep f;
    f.family = family_from_string(family);
    f.sizes = parse_sizes("--sizes", sizes);
    const std::string form =
        formulation.empty() ? (f.family == Family::seams ? "qubo" : "pubo") : formulation;
    f.formulations = {formulation_from_string(form)};
    cfg.families = {f};
    cfg.seeds = seeds;
    cfg.base_seed = seed;
    cfg.threshold = threshold;
    cfg.cell_time_budget = time_budget;
    blame("--threshold", [&] { if (!(threshold > 0 && threshold < 1)) cfg.validate(); return 0; });
    blame("--sizes", [&] { cfg.validate(); return 0; });
    if (f.family == Family::seams && form != "qubo")
      throw FlagError("--formulation", "seam instances only have a qubo formulation");
    const auto res = qscore_sweep(cfg, solver.spec(backend_from_string(backend)));
    json rows = json::array();
    for (const auto& row : res.rows) {
      os << "size " << row.size << "  mean quality " << format_number(row.mean_quality)
         << (row.passed ? "  pass" : "  fail")
         << (row.note.empty() ? "" : "  (" + row.note + ")") << '\n';
      rows.push_back({{"size", row.size}, {"mean_quality", row.mean_quality},
                      {"passed", row.passed}, {"note", row.note}});
    }
    os << res.summary() << '\n';
    if (!out.empty())
      write_json_file(out, {{"family", family}, {"formulation", form}, {"backend", backend},
                            {"threshold", threshold}, {"seeds", seeds}, {"seed", seed},
                            {"rows", rows},
                            {"largest_passing", res.largest_passing
                                                    ? json(*res.largest_passing)
                                                    : json(nullptr)},
                            {"summary", res.summary()}});
    return 0;
  }
};

struct ReportCmd {
  std::string in, out, csv;
  double threshold = 0.2;

  CLI::App* add(CLI::App& app) {
    auto* sub = app.add_subcommand("report", "summarize a records file");
    sub->add_option("--in", in, "records JSON-lines")->required();
    sub->add_option("--threshold", threshold, "quality threshold");
    sub->add_option("--out", out, "text report path (default stdout)");
    sub->add_option("--csv", csv, "CSV report path");
    return sub;
  }

  int run(std::ostream& os, std::ostream& err) const {
    require_readable("--in", in);
    if (!out.empty()) require_writable("--out", out);
    if (!csv.empty()) require_writable("--csv", csv);
    if (!(threshold > 0 && threshold < 1))
      throw FlagError("--threshold", "must be in (0,1)");
    std::ifstream f(in);
    const Report rep = build_report(f, threshold);
    for (const auto& e : rep.errors) err << in << ':' << e.line << ": " << e.message << '\n';
    const std::string text = report_text(rep);
    if (out.empty()) {
      os << text;
    } else {
      std::ofstream(out) << text;
    }
    if (!csv.empty()) std::ofstream(csv) << report_csv(rep);
    return 0;
  }
};

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"qbench: quantum-optimization reference benchmarks"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "suppress progress output");
  GenerateCmd gen;
  EncodeCmd enc;
  SolveCmd sol;
  BenchCmd ben;
  QscoreCmd qs;
  ReportCmd rep;
  auto* g = gen.add(app);
  auto* e = enc.add(app);
  auto* s = sol.add(app);
  auto* b = ben.add(app);
  auto* q = qs.add(app);
  auto* r = rep.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    return app.exit(ex, out, err) == 0 ? 0 : 1;
  }

  std::ostringstream sink;
  std::ostream& os = quiet ? static_cast<std::ostream&>(sink) : out;
  try {
    if (g->parsed()) return gen.run(os);
    if (e->parsed()) return enc.run(os);
    if (s->parsed()) return sol.run(os);
    if (b->parsed()) return ben.run(os);
    if (q->parsed()) return qs.run(os);
    if (r->parsed()) return rep.run(out, err);
  } catch (const std::invalid_argument& ex) {
    err << "error: " << ex.what() << '\n';
    return 1;
  } catch (const std::exception& ex) {
    err << "internal error: " << ex.what() << '\n';
    return 2;
  }
  return 2;
}

}  // namespace qbench::cli
