#pragma once

#include <utility>

#include "ness/model.hpp"
#include "ness/qops.hpp"

namespace ness {

/// Steady state of the two system qubits with the quantities derived from it.
struct SteadyStateReport {
  DensityMatrix rho_system{CMatrix::Identity(4, 4) / 4.0};
  double concurrence = 0.0;
  /// Scaled heat current into bath 1, Q = Q_phys / (omega * Omega).
  double q_dot = 0.0;
  /// Scaled heat current into bath 2; equals -q_dot in a steady state.
  double q_dot_bath2 = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double residual = 0.0;
};

/// Closed-form memoryless steady state rho = rho1 (x) rho2 + chi.
struct AnalyticSteadyState {
  double eta = 0.0;
  CMatrix chi;
  double s1 = 0.0;
  double s2 = 0.0;
  DensityMatrix rho{CMatrix::Identity(4, 4) / 4.0};
};

/// eta = (z1 - z2) g1 g2 / ((g1 + g2)(g1 g2 + 4)); s1 = z1 - 4 eta/g1; s2 = z2 + 4 eta/g2.
/// In the excited-first S1 (x) S2 basis chi carries +i eta at (|01>,|10>).
AnalyticSteadyState analytic_memoryless_steady_state(double z1, double z2, double g1, double g2);

/// Margins at or below this are rounding noise of the steady-state solve and count as separable.
inline constexpr double margin_noise_floor = 1e-12;

/// 2 max(0, margin) with the noise floor applied, clamped to [0, 1].
double concurrence_from_margin(double margin);

/// |rho_23| - sqrt(rho_11 rho_44) (1-based indices). Positive iff an X-state is entangled.
double concurrence_margin(const CMatrix& rho);

/// C = 2 max{0, |rho_23| - sqrt(rho_11 rho_44)}; throws ShapeError unless rho_14 = 0.
double concurrence_x_state(const DensityMatrix& rho);

/// Wootters concurrence for an arbitrary two-qubit state.
double concurrence_wootters(const DensityMatrix& rho);

/// Scaled heat current into bath 1 in the memoryless model: -2 eta.
double heat_current_analytic(double z1, double z2, double g1, double g2);

struct HeatCurrents {
  double bath1 = 0.0;
  double bath2 = 0.0;
};

/// Energy flow into each bath from the dissipators, in units of omega * Omega.
///
/// A 4x4 state is treated as directly damped (memoryless model); a 16x16 state
/// as S1 S2 M1 M2 with damping split (1-p) on S_k and p on M_k.
HeatCurrents heat_current_dissipator(const CMatrix& rho, const ModelParams& params);

/// |Q| > 2 sqrt(rho_11 rho_44): entanglement test for memoryless steady states.
bool critical_entanglement_condition(const DensityMatrix& rho, double q_dot);

/// <sigma_z> of each qubit of a two-qubit state.
std::pair<double, double> local_z(const CMatrix& rho);

/// Build the report from a stationary state (4x4 memoryless or 16x16 with memory).
SteadyStateReport make_report(const ModelParams& params, const CMatrix& rho_full, double residual);

}  // namespace ness
