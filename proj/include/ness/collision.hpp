#pragma once

#include <array>
#include <functional>
#include <vector>

#include "ness/model.hpp"
#include "ness/qops.hpp"

namespace ness {

/// Thermal qubit xi = (1 + z sigma_z)/2, i.e. diag((1+z)/2, (1-z)/2) with |0> excited.
DensityMatrix thermal_qubit(double z);

/// z = (1 - e^{1/T}) / (1 + e^{1/T}) for T in units of omega / k_B.
double z_of_temperature(double temperature);

/// Register used during one collision: S1 S2 M1 M2 B1 B2 (64 dimensional).
namespace collision_register {
inline constexpr int S1 = 0, S2 = 1, M1 = 2, M2 = 3, B1 = 4, B2 = 5;
inline constexpr int n_qubits = 6;
}  // namespace collision_register

/// Interaction unitaries of one collision, lifted to the 6-qubit register.
struct InteractionUnitaries {
  Operator U;    ///< S1-S2, angle Omega dt
  Operator W1;   ///< B1-S1, angle sqrt(Gamma1 dt)
  Operator W2;   ///< B2-S2
  Operator Wt1;  ///< B1-M1, angle sqrt(Gamma1 dt)
  Operator Wt2;  ///< B2-M2
  Operator Y1;   ///< S1-M1, angle Upsilon1 dt
  Operator Y2;   ///< S2-M2
};

/// exp(-i theta (sigma_+ sigma_- + sigma_- sigma_+)) as a 4x4 two-qubit gate.
Operator exchange_gate(double theta);

InteractionUnitaries build_interaction_unitaries(const ModelParams& params, double dt);

/// Branch operators T1..T4 (both via memory, both direct, memory on 1 only, memory on 2 only).
std::array<Operator, 4> branch_operators(const InteractionUnitaries& u);

/// Branch probabilities p^2, (1-p)^2, p(1-p), p(1-p) matching branch_operators().
std::array<double, 4> branch_weights(double p);

struct CollisionStepResult {
  DensityMatrix state;  ///< system + memory after the step (16 dimensional)
  double dE1 = 0.0;     ///< energy change of the bath-1 qubit, units of omega
  double dE2 = 0.0;     ///< energy change of the bath-2 qubit, units of omega
};

/// Precomputed one-step map of the collision model for fixed parameters and dt.
///
/// The four branches are mixed deterministically at the density-matrix level.
/// Heat is the branch-weighted change of bath-qubit excitation.
class CollisionEngine {
 public:
  CollisionEngine(const ModelParams& params, double dt);

  const ModelParams& params() const { return params_; }
  double dt() const { return dt_; }

  /// 256 x 256 superoperator of the mixed map on S1 S2 M1 M2.
  const Superoperator& channel() const { return channel_; }
  /// Superoperator of a single branch (0-based index into branch_operators()).
  const Superoperator& branch_channel(int i) const { return branch_channels_.at(static_cast<std::size_t>(i)); }

  CollisionStepResult step(const DensityMatrix& state) const;
  CMatrix apply(const CMatrix& state) const;

  /// Bath energy changes (units of omega) for one step starting from `state`.
  double bath1_energy_change(const CMatrix& state) const;
  double bath2_energy_change(const CMatrix& state) const;

  /// Fixed point of the discrete map (unique stationary state of the collision dynamics).
  DensityMatrix fixed_point() const;

 private:
  ModelParams params_;
  double dt_;
  Superoperator channel_;
  std::array<Superoperator, 4> branch_channels_;
  // Tr[M_k rho] is the expected post-collision excitation of bath qubit k.
  CMatrix bath1_observable_;
  CMatrix bath2_observable_;
};

/// One step built from scratch (convenience wrapper around CollisionEngine).
CollisionStepResult one_step_map(const DensityMatrix& state, const ModelParams& params, double dt);

struct TrajectoryPoint {
  long step = 0;
  double t = 0.0;
  double concurrence = 0.0;
  double dE1 = 0.0;
  double dE2 = 0.0;
  double cumulative_q1 = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  DensityMatrix final_state{CMatrix::Identity(16, 16) / 16.0};
};

/// Memory qubits start as xi1 (x) xi2; lift a two-qubit system state accordingly.
DensityMatrix with_thermal_memory(const DensityMatrix& system, const ModelParams& params);

/// Iterate the one-step map n_steps times. `observer`, when set, sees every
/// intermediate state (step index starting at 1).
Trajectory simulate(const DensityMatrix& initial, const ModelParams& params, double dt, long n_steps,
                    const std::function<void(long, const DensityMatrix&)>& observer = {});

}  // namespace ness
