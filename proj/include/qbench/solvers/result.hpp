#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qbench/errors.hpp"
#include "qbench/model.hpp"

namespace qbench {

struct QaoaAngles {
  std::vector<double> gammas;
  std::vector<double> betas;
};

struct SolveResult {
  std::string algorithm;
  Bits best_bits;
  double best_energy = 0;
  // Set by the caller after decoding to native space; unconstrained
  // problems are always feasible.
  bool feasible = true;
  double wall_time = 0;
  std::uint64_t evaluations = 0;
  std::uint64_t seed = 0;

  // exhaustive search only
  std::optional<std::uint64_t> optimum_count;

  // QAOA only. Dense probability vector indexed by basis index (bit i = x_i).
  std::optional<std::vector<double>> distribution;
  std::optional<QaoaAngles> angles;
  std::optional<double> expectation;
  std::optional<double> success_probability;
};

struct AnnealSchedule {
  double t_initial = 1.0;
  double alpha = 0.95;  // T_k = t_initial * alpha^k for sweep k
  std::size_t sweeps = 200;
  std::size_t restarts = 5;

  void validate() const {
    if (!(t_initial > 0)) throw ConfigError("t_initial must be > 0");
    if (!(alpha > 0 && alpha < 1)) throw ConfigError("alpha must be in (0,1)");
    if (sweeps < 1) throw ConfigError("sweeps must be >= 1");
    if (restarts < 1) throw ConfigError("restarts must be >= 1");
  }
};

struct QaoaConfig {
  std::size_t layers = 1;            // p
  std::size_t grid_resolution = 32;  // per axis, p = 1 only
  std::size_t refine_iterations = 200;
  std::size_t multistarts = 8;  // random initial points when p > 1
  std::size_t samples = 4096;
  std::size_t max_qubits = 24;

  void validate() const {
    if (layers < 1) throw ConfigError("QAOA layers must be >= 1");
    if (grid_resolution < 2) throw ConfigError("grid resolution must be >= 2");
    if (multistarts < 1) throw ConfigError("multistarts must be >= 1");
    if (samples < 1) throw ConfigError("samples must be >= 1");
    if (max_qubits > 30) throw ConfigError("max_qubits above 30 is not supported");
  }
};

}  // namespace qbench
