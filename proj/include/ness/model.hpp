#pragma once

#include <string>

namespace ness {

/// One instance of the two-qubit heat-transport model.
///
/// Couplings are ratios to the inner-system coupling Omega (gamma = Gamma/Omega,
/// upsilon = Upsilon/Omega), so every internal rate is in units of Omega and every
/// time in units of 1/Omega. `omega` and `Omega` only fix physical units.
struct ModelParams {
  double z1 = 0.0;
  double z2 = -1.0;
  double gamma1 = 2.0;
  double gamma2 = 2.0;
  double upsilon1 = 0.0;
  double upsilon2 = 0.0;
  double p = 0.0;
  double omega = 1.0;
  double Omega = 1.0;

  /// Throws ParameterError naming the first violated bound.
  void validate() const;

  /// Fermionic rates z^+ = (1+z)/2 (absorption) and z^- = (1-z)/2 (emission).
  static double z_plus(double z) { return 0.5 * (1.0 + z); }
  static double z_minus(double z) { return 0.5 * (1.0 - z); }

  std::string describe() const;
};

}  // namespace ness
