#pragma once

#include <span>
#include <vector>

#include "ness/model.hpp"
#include "ness/observables.hpp"
#include "ness/qops.hpp"

namespace ness {

enum class GeneratorKind {
  memoryless,   ///< two system qubits, D = 4
  with_memory,  ///< system plus memory qubits S1 S2 M1 M2, D = 16
};

/// A GKSL generator in units of Omega, with the parameters it was built from.
struct GkslGenerator {
  Superoperator superop;
  ModelParams params;
  GeneratorKind kind = GeneratorKind::memoryless;

  int n_qubits() const { return kind == GeneratorKind::memoryless ? 2 : 4; }
};

/// Two-qubit generator: exchange coupling plus thermal dissipators on each qubit.
GkslGenerator build_memoryless_generator(const ModelParams& params);

/// Four-qubit generator: direct damping weighted by (1-p), memory damping and
/// system-memory exchange weighted by p.
GkslGenerator build_memory_generator(const ModelParams& params);

/// Steady state via the kernel of the generator, reduced to the system for the
/// memory kind, with observables attached.
///
/// At p = 0 the memory qubits are frozen and the kernel is degenerate; the
/// state is then the long-time limit reached from memory qubits prepared in
/// xi1 (x) xi2.
SteadyStateReport steady_state(const GkslGenerator& gen);

/// Full stationary state (D x D) behind steady_state(); residual in `residual`.
CMatrix stationary_state(const GkslGenerator& gen, double* residual = nullptr);

/// rho(t_k) = exp(t_k L)[rho0] for each t_k of an ascending grid starting at >= 0.
std::vector<DensityMatrix> evolve(const GkslGenerator& gen, const DensityMatrix& rho0,
                                  std::span<const double> t_grid);

/// Steady states by a direct linear solve restricted to the zero-excitation-difference
/// coherence sector, which contains every stationary state of these generators
/// because all couplings conserve excitation number. Far cheaper than the
/// eigendecomposition route; used for parameter sweeps.
class SectorSteadyStateSolver {
 public:
  /// p == 0 uses the two-qubit generator (memory decouples), p > 0 the four-qubit one.
  struct Solution {
    CMatrix rho;              ///< 4x4 for p == 0, 16x16 otherwise
    double residual = 0.0;    ///< ||L[rho]||_F
    bool ok = false;          ///< false when the sector system is singular
  };

  static Solution solve(const ModelParams& params);

  /// Reduced 4x4 system state of a solution.
  static CMatrix system_state(const Solution& s);
};

/// Generator superoperator restricted to one coherence sector (excitation difference d).
CMatrix sector_block(const GkslGenerator& gen, int difference);

}  // namespace ness
