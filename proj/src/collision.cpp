#include "ness/collision.hpp"

#include <cmath>

#include "ness/errors.hpp"
#include "ness/observables.hpp"

namespace ness {

namespace reg = collision_register;

namespace {

// Lift a 4x4 gate acting on qubits (i, j), in that tensor order, to an n-qubit register.
Operator lift_gate(const Operator& gate, int i, int j, int n_qubits) {
  const Operator id = identity(1 << n_qubits);
  Operator out = Operator::Zero(id.rows(), id.cols());
  for (int a = 0; a < 2; ++a)
    for (int c = 0; c < 2; ++c)
      for (int b = 0; b < 2; ++b)
        for (int d = 0; d < 2; ++d) {
          const cplx g = gate(2 * a + b, 2 * c + d);
          if (g == cplx(0.0)) continue;
          Operator ea = Operator::Zero(2, 2), eb = Operator::Zero(2, 2);
          ea(a, c) = 1.0;
          eb(b, d) = 1.0;
          out += g * (lift(ea, i, n_qubits) * lift(eb, j, n_qubits));
        }
  return out;
}

// Tr_B[(I (x) xi) A] over the last two qubits for a 64x64 operator A.
CMatrix bath_average(const CMatrix& a, const std::array<double, 4>& bath_probs) {
  CMatrix out = CMatrix::Zero(16, 16);
  for (int b = 0; b < 4; ++b)
    out += bath_probs[static_cast<std::size_t>(b)] * a(Eigen::seqN(b, 16, 4), Eigen::seqN(b, 16, 4));
  return out;
}

std::array<double, 4> bath_probabilities(const ModelParams& m) {
  const double e1 = ModelParams::z_plus(m.z1), g1 = ModelParams::z_minus(m.z1);
  const double e2 = ModelParams::z_plus(m.z2), g2 = ModelParams::z_minus(m.z2);
  // Bath index b = 2 * b1 + b2 with bit 0 = excited.
  return {e1 * e2, e1 * g2, g1 * e2, g1 * g2};
}

Superoperator branch_superoperator(const Operator& t, const std::array<double, 4>& bath_probs) {
  CMatrix s = CMatrix::Zero(256, 256);
  for (int bin = 0; bin < 4; ++bin) {
    const double q = bath_probs[static_cast<std::size_t>(bin)];
    if (q == 0.0) continue;
    for (int bout = 0; bout < 4; ++bout) {
      const CMatrix k = std::sqrt(q) * t(Eigen::seqN(bout, 16, 4), Eigen::seqN(bin, 16, 4));
      s += kron(k.conjugate(), k);
    }
  }
  return Superoperator(std::move(s));
}

}  // namespace

DensityMatrix thermal_qubit(double z) {
  if (!std::isfinite(z) || std::abs(z) > 1.0) throw ParameterError("temperature parameter z must lie in [-1, 1]");
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = 0.5 * (1.0 + z);
  m(1, 1) = 0.5 * (1.0 - z);
  return DensityMatrix(std::move(m));
}

double z_of_temperature(double temperature) {
  if (!(temperature > 0.0)) throw ParameterError("temperature must be > 0");
  // (1 - e^x)/(1 + e^x) = -tanh(x/2), which stays finite as x -> infinity.
  return -std::tanh(0.5 / temperature);
}

Operator exchange_gate(double theta) {
  Operator g = Operator::Zero(4, 4);
  g(0, 0) = 1.0;
  g(3, 3) = 1.0;
  g(1, 1) = std::cos(theta);
  g(2, 2) = std::cos(theta);
  g(1, 2) = cplx(0.0, -std::sin(theta));
  g(2, 1) = cplx(0.0, -std::sin(theta));
  return g;
}

InteractionUnitaries build_interaction_unitaries(const ModelParams& params, double dt) {
  params.validate();
  if (!(dt > 0.0)) throw ParameterError("collision duration dt must be > 0");
  const int n = reg::n_qubits;
  const double a1 = std::sqrt(params.gamma1 * dt), a2 = std::sqrt(params.gamma2 * dt);
  InteractionUnitaries u;
  u.U = lift_gate(exchange_gate(dt), reg::S1, reg::S2, n);
  u.W1 = lift_gate(exchange_gate(a1), reg::B1, reg::S1, n);
  u.W2 = lift_gate(exchange_gate(a2), reg::B2, reg::S2, n);
  u.Wt1 = lift_gate(exchange_gate(a1), reg::B1, reg::M1, n);
  u.Wt2 = lift_gate(exchange_gate(a2), reg::B2, reg::M2, n);
  u.Y1 = lift_gate(exchange_gate(params.upsilon1 * dt), reg::S1, reg::M1, n);
  u.Y2 = lift_gate(exchange_gate(params.upsilon2 * dt), reg::S2, reg::M2, n);
  return u;
}

std::array<Operator, 4> branch_operators(const InteractionUnitaries& u) {
  return {u.Wt1 * u.Y1 * u.Wt2 * u.Y2 * u.U,  //
          u.W1 * u.W2 * u.U,                  //
          u.Wt1 * u.Y1 * u.W2 * u.U,          //
          u.W1 * u.Wt2 * u.Y2 * u.U};
}

std::array<double, 4> branch_weights(double p) { return {p * p, (1.0 - p) * (1.0 - p), p * (1.0 - p), p * (1.0 - p)}; }

CollisionEngine::CollisionEngine(const ModelParams& params, double dt) : params_(params), dt_(dt) {
  const auto u = build_interaction_unitaries(params, dt);
  const auto t = branch_operators(u);
  const auto w = branch_weights(params.p);
  const auto probs = bath_probabilities(params);

  const Operator nb1 = lift(sigma_plus() * sigma_minus(), reg::B1, reg::n_qubits);
  const Operator nb2 = lift(sigma_plus() * sigma_minus(), reg::B2, reg::n_qubits);

  CMatrix mix = CMatrix::Zero(256, 256);
  bath1_observable_ = CMatrix::Zero(16, 16);
  bath2_observable_ = CMatrix::Zero(16, 16);
  for (std::size_t i = 0; i < 4; ++i) {
    branch_channels_[i] = branch_superoperator(t[i], probs);
    if (w[i] == 0.0) continue;
    mix += w[i] * branch_channels_[i].matrix();
    bath1_observable_ += w[i] * bath_average(t[i].adjoint() * nb1 * t[i], probs);
    bath2_observable_ += w[i] * bath_average(t[i].adjoint() * nb2 * t[i], probs);
  }
  channel_ = Superoperator(std::move(mix));
}

CMatrix CollisionEngine::apply(const CMatrix& state) const { return channel_.apply(state); }

double CollisionEngine::bath1_energy_change(const CMatrix& state) const {
  return (bath1_observable_ * state).trace().real() - ModelParams::z_plus(params_.z1) * state.trace().real();
}

double CollisionEngine::bath2_energy_change(const CMatrix& state) const {
  return (bath2_observable_ * state).trace().real() - ModelParams::z_plus(params_.z2) * state.trace().real();
}

CollisionStepResult CollisionEngine::step(const DensityMatrix& state) const {
  if (state.dim() != 16) throw DimensionError("collision step expects a 16-dimensional system+memory state");
  const CMatrix out = apply(state.matrix());
  return CollisionStepResult{DensityMatrix(0.5 * (out + out.adjoint())), bath1_energy_change(state.matrix()),
                             bath2_energy_change(state.matrix())};
}

DensityMatrix CollisionEngine::fixed_point() const {
  // The map is covariant under excitation-number rotations, so its fixed point
  // lies in the zero excitation-difference sector.
  const auto idx = coherence_sector(4, 0);
  const auto n = static_cast<Eigen::Index>(idx.size());
  CMatrix a = channel_.matrix()(idx, idx) - CMatrix::Identity(n, n);
  for (Eigen::Index k = 0; k < n; ++k) a(0, k) = (idx[static_cast<std::size_t>(k)] % 17 == 0) ? 1.0 : 0.0;
  CVector rhs = CVector::Zero(n);
  rhs(0) = 1.0;
  const CVector x = a.fullPivLu().solve(rhs);
  CMatrix rho = CMatrix::Zero(16, 16);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index v = idx[static_cast<std::size_t>(k)];
    rho(v % 16, v / 16) = x(k);
  }
  DensityMatrix out = DensityMatrix::from_numerical(rho);
  const double res = frobenius_norm(apply(out.matrix()) - out.matrix());
  if (!(res < 1e-10)) throw ConvergenceError("collision fixed point residual too large");
  return out;
}

CollisionStepResult one_step_map(const DensityMatrix& state, const ModelParams& params, double dt) {
  return CollisionEngine(params, dt).step(state);
}

DensityMatrix with_thermal_memory(const DensityMatrix& system, const ModelParams& params) {
  if (system.dim() != 4) throw DimensionError("expected a two-qubit system state");
  return DensityMatrix(kron(system.matrix(), kron(thermal_qubit(params.z1).matrix(), thermal_qubit(params.z2).matrix())));
}

Trajectory simulate(const DensityMatrix& initial, const ModelParams& params, double dt, long n_steps,
                    const std::function<void(long, const DensityMatrix&)>& observer) {
  if (n_steps < 1) throw ParameterError("n_steps must be >= 1");
  if (initial.dim() != 16) throw DimensionError("simulate expects a 16-dimensional system+memory state");
  const CollisionEngine engine(params, dt);
  static constexpr int keep[] = {0, 1};
  static constexpr int dims[] = {2, 2, 2, 2};

  Trajectory traj;
  traj.points.reserve(static_cast<std::size_t>(n_steps));
  CMatrix rho = initial.matrix();
  double q1 = 0.0;
  for (long k = 1; k <= n_steps; ++k) {
    TrajectoryPoint pt;
    pt.step = k;
    pt.t = static_cast<double>(k) * dt;
    pt.dE1 = engine.bath1_energy_change(rho);
    pt.dE2 = engine.bath2_energy_change(rho);
    rho = engine.apply(rho);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    q1 += pt.dE1;
    pt.cumulative_q1 = q1;
    const DensityMatrix sys = DensityMatrix::from_numerical(partial_trace(rho, keep, dims));
    pt.concurrence = concurrence_wootters(sys);
    traj.points.push_back(pt);
    if (observer) observer(k, DensityMatrix(rho));
  }
  traj.final_state = DensityMatrix::from_numerical(rho);
  return traj;
}

}  // namespace ness
