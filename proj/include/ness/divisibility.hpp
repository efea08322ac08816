#pragma once

#include <vector>

#include "ness/analysis.hpp"
#include "ness/model.hpp"
#include "ness/qops.hpp"

namespace ness {

/// G0 = 1/2 followed by the 15 products sigma_mu (x) sigma_nu / 2, (mu, nu) != (0, 0),
/// in lexicographic (mu, nu) order with sigma_0..3 = 1, x, y, z.
std::vector<Operator> su4_basis();

/// Reduced system map in the generalized Bloch basis, F_ij = Tr[G_i Lambda_t[G_j]].
struct BlochMap {
  double t = 0.0;
  RMatrix matrix;
};

/// Lambda_t[rho] = Tr_M[exp(t L_SM)(rho (x) xi1 (x) xi2)] written as a Bloch map.
BlochMap reduced_map(const ModelParams& params, double t);

/// Bloch form B_ij = Tr[G_i L[G_j]] of the two-qubit memoryless generator.
RMatrix memoryless_bloch_generator(const ModelParams& params);

struct DivisibilityOptions {
  int n_grid = 1000;      ///< starting number of grid cells
  int max_grid = 16000;   ///< refinement cap
  double rel_tol = 0.01;  ///< stop refining once N changes by less than this fraction
  /// Also keep refining while |det F| moves by more than this fraction between adjacent
  /// grid points (checked where |det F| is resolved and at least rel_tol * N).
  double max_step_change = 0.05;
  double t_max = 0.0;     ///< 0 selects default_t_max()
  /// The grid ends where the Hadamard bound on |det F| drops below this value.
  double det_floor = 1e-40;
  /// Increments below this multiple of the rounding scale eps * Hadamard(t) are noise.
  double noise_factor = 1e3;
};

struct DivisibilityReport {
  std::vector<double> t_grid;
  std::vector<double> det_abs;
  double n_measure = 0.0;       ///< sum of positive increments of |det F|
  double n_significant = 0.0;   ///< same, counting only increments above the rounding floor
  double t_max = 0.0;           ///< relaxation horizon from the rate heuristic
  double t_end = 0.0;           ///< actual grid end (t_max or where |det F| is negligible)
  double max_step_change = 0.0; ///< largest relative |det F| change between resolved neighbours
  int n_grid = 0;
  bool converged = false;       ///< N settled to rel_tol

  /// Absolute classification, N > 1e-12.
  bool non_divisible() const { return n_measure > 1e-12; }
  /// Classification relative to the rounding floor of |det F| at each time.
  bool non_divisible_relative() const { return n_significant > 0.0; }
};

/// 50 / (smallest nonzero damping rate gamma_k z_k^{+-}, weighted by (1-p) or p), capped at 1e4.
double default_t_max(const ModelParams& params);

/// Non-divisibility measure on a uniform grid refined 2x until N settles.
DivisibilityReport non_divisibility(const ModelParams& params, const DivisibilityOptions& opt = {});

struct DivisibilityRow {
  double z1 = 0.0, z2 = 0.0;
  OptimizationResult cmax;
  bool evaluated = false;  ///< N is computed only where C_max > 0
  double n_measure = 0.0;
  double n_significant = 0.0;
  double t_end = 0.0;
  int n_grid = 0;
  bool converged = false;
};

/// C_max-optimal couplings per grid point and the N of their reduced dynamics.
std::vector<DivisibilityRow> divisibility_map(double p, const std::vector<double>& z1_values,
                                              const std::vector<double>& z2_values, const SearchOptions& search = {},
                                              const DivisibilityOptions& opt = {}, int threads = 0);

}  // namespace ness
