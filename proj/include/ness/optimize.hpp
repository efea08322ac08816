#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace ness {

/// Box-bounded Nelder-Mead minimizer. Trial points are clamped into the box,
/// so the objective is only ever evaluated inside it.
struct NelderMeadOptions {
  int max_evaluations = 2000;
  double x_tolerance = 1e-7;   ///< largest simplex edge at convergence
  double f_tolerance = 1e-13;  ///< spread of simplex values at convergence
  double initial_step = 0.3;
  /// Stop as soon as a value at or below this is seen.
  double target = -std::numeric_limits<double>::infinity();
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

using Objective = std::function<double(const std::vector<double>&)>;

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, const std::vector<double>& lower,
                             const std::vector<double>& upper, const NelderMeadOptions& opt = {});

/// 64-bit Mersenne Twister with a fixed double conversion (top 53 bits), so a
/// seed reproduces the same stream on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 mix of (seed, stream) used to derive independent per-task seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace ness
