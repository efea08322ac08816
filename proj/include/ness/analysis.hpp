#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "ness/model.hpp"

namespace ness {

/// Steady-state quantities for one coupling choice, from the sector solver.
struct CouplingEvaluation {
  double margin = 0.0;       ///< |rho_23| - sqrt(rho_11 rho_44), unclamped
  double concurrence = 0.0;  ///< 2 max(0, margin)
  double q_dot = 0.0;        ///< scaled heat current into bath 1
  bool ok = false;
};

CouplingEvaluation evaluate_couplings(const ModelParams& params);

/// Multi-start search settings. Couplings are searched as log10 values in
/// [log_lower, log_upper]; for p = 0 only (gamma1, gamma2) are free.
struct SearchOptions {
  int random_starts = 20;
  int budget_per_start = 2000;
  std::uint64_t seed = 1;
  double log_lower = -3.0;
  double log_upper = 3.0;
};

struct OptimizationResult {
  ModelParams best_params;
  double c_max = 0.0;
  double margin = 0.0;  ///< raw concurrence margin at best_params
  double q_dot_at_best = 0.0;
  int n_evaluations = 0;
  int n_starts = 0;
  bool converged = false;
};

OptimizationResult maximize_concurrence(double z1, double z2, double p, const SearchOptions& opt = {});

/// Same search with |Q| as the objective; c_max holds the concurrence at the optimum.
OptimizationResult maximize_heat_current(double z1, double z2, double p, const SearchOptions& opt = {});

/// Roots z2 = (4 + 3 sqrt2 z1)/(4 z1 + 3 sqrt2) and (4 - 3 sqrt2 z1)/(4 z1 - 3 sqrt2).
struct BoundaryPair {
  double z2_high = 0.0;
  double z2_low = 0.0;
};
BoundaryPair memoryless_boundary(double z1);

/// z1 z2 + sqrt(9/8)|z1 - z2| > 1: the memoryless model can entangle at (z1, z2).
bool memoryless_entanglement_possible(double z1, double z2);

/// Couplings gamma1 = 2/(sqrt2 +- z1), gamma2 = 4 sqrt2 - gamma1, keeping positive pairs.
std::vector<std::pair<double, double>> boundary_couplings(double z1);

struct RegionPoint {
  double q_abs = 0.0;
  double concurrence = 0.0;
  double margin = 0.0;
  ModelParams params;
  bool refined = false;  ///< produced by a hull search rather than random sampling
};

struct RegionOptions {
  int n_samples = 10000;
  std::uint64_t seed = 1;
  int bins = 200;
  bool refine = true;
  int refine_budget = 300;
  double epsilon = 1e-3;
  int threads = 0;
};

/// Sampled (|Q|, C) cloud with per-bin hulls. Bin k covers
/// [k, k+1) * q_hi / bins; empty bins hold NaN in both hulls.
struct RegionSample {
  double z1 = 0.0, z2 = 0.0, p = 0.0;
  std::vector<RegionPoint> points;
  double q_hi = 0.0;
  std::vector<double> hull_upper;
  std::vector<double> hull_lower;
  double epsilon = 1e-3;

  int bins() const { return static_cast<int>(hull_upper.size()); }
  double bin_width() const { return bins() > 0 ? q_hi / bins() : 0.0; }
  int bin_of(double q) const;
  /// Recompute both hulls from `points`.
  void rebuild_hulls();
};

RegionSample sample_cq_region(double z1, double z2, double p, const RegionOptions& opt = {});

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Longest run of populated bins whose minimum concurrence exceeds the region's epsilon.
std::optional<Interval> detect_overhang(const RegionSample& region);

/// Smallest and largest |Q| among entangled steady states; nullopt if none is found.
std::optional<Interval> critical_heat_currents(double z1, double z2, double p, const RegionOptions& opt = {});

struct CmaxRow {
  double z1 = 0.0, z2 = 0.0;
  OptimizationResult result;
};

/// linspace(-1, 1, n) for map axes.
std::vector<double> z_axis(int n);

/// C_max over a (z1, z2) grid; rows ordered z1-major. Each point is seeded from
/// (seed, index), so output does not depend on the thread count.
std::vector<CmaxRow> cmax_map(double p, const std::vector<double>& z1_values, const std::vector<double>& z2_values,
                              const SearchOptions& opt = {}, int threads = 0);

}  // namespace ness
