#include "ness/observables.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "ness/errors.hpp"

namespace ness {

namespace {

// Population of the excited state |0> of qubit `site` in an n-qubit register.
double excited_population(const CMatrix& rho, int site, int n_qubits) {
  const int bit = n_qubits - 1 - site;
  double pe = 0.0;
  for (Eigen::Index i = 0; i < rho.rows(); ++i)
    if (((i >> bit) & 1) == 0) pe += rho(i, i).real();
  return pe;
}

// Energy flow into a bath at temperature z through a damping channel of strength g
// acting on a qubit with excited population pe (trace of that qubit = tr).
double channel_current(double z, double g, double pe, double tr) {
  return g * (ModelParams::z_minus(z) * pe - ModelParams::z_plus(z) * (tr - pe));
}

void require_two_qubit(const CMatrix& rho) {
  if (rho.rows() != 4 || rho.cols() != 4) throw DimensionError("expected a two-qubit (4x4) state");
}

}  // namespace

AnalyticSteadyState analytic_memoryless_steady_state(double z1, double z2, double g1, double g2) {
  if (!(g1 > 0.0) || !(g2 > 0.0)) throw ParameterError("couplings gamma1, gamma2 must be > 0");
  if (std::abs(z1) > 1.0 || std::abs(z2) > 1.0) throw ParameterError("temperature parameters must lie in [-1, 1]");

  AnalyticSteadyState out;
  out.eta = (z1 - z2) * g1 * g2 / ((g1 + g2) * (g1 * g2 + 4.0));
  out.s1 = z1 - 4.0 * out.eta / g1;
  out.s2 = z2 + 4.0 * out.eta / g2;

  const double e = out.eta;
  out.chi = CMatrix::Zero(4, 4);
  out.chi(0, 0) = -e * e;
  out.chi(1, 1) = e * e;
  out.chi(2, 2) = e * e;
  out.chi(3, 3) = -e * e;
  out.chi(1, 2) = cplx(0.0, e);
  out.chi(2, 1) = cplx(0.0, -e);

  Operator r1 = Operator::Zero(2, 2), r2 = Operator::Zero(2, 2);
  r1(0, 0) = 0.5 * (1.0 + out.s1);
  r1(1, 1) = 0.5 * (1.0 - out.s1);
  r2(0, 0) = 0.5 * (1.0 + out.s2);
  r2(1, 1) = 0.5 * (1.0 - out.s2);
  out.rho = DensityMatrix(kron(r1, r2) + out.chi);
  return out;
}

double concurrence_margin(const CMatrix& rho) {
  require_two_qubit(rho);
  const double p11 = std::max(0.0, rho(0, 0).real());
  const double p44 = std::max(0.0, rho(3, 3).real());
  return std::abs(rho(1, 2)) - std::sqrt(p11 * p44);
}

double concurrence_from_margin(double margin) {
  return margin > margin_noise_floor ? std::min(2.0 * margin, 1.0) : 0.0;
}

double concurrence_x_state(const DensityMatrix& rho) {
  require_two_qubit(rho.matrix());
  if (std::abs(rho(0, 3)) > 1e-10 || std::abs(rho(3, 0)) > 1e-10)
    throw ShapeError("state is not an X-state with rho_14 = 0; use concurrence_wootters");
  return concurrence_from_margin(concurrence_margin(rho.matrix()));
}

double concurrence_wootters(const DensityMatrix& rho) {
  require_two_qubit(rho.matrix());
  const CMatrix yy = kron(sigma_y(), sigma_y());
  const CMatrix flipped = yy * rho.matrix().conjugate() * yy;

  // Eigenvalues of rho * flipped equal those of sqrt(rho) flipped sqrt(rho), which is Hermitian.
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.matrix());
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const CMatrix sqrt_rho = es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  const CMatrix m = sqrt_rho * flipped * sqrt_rho;
  Eigen::SelfAdjointEigenSolver<CMatrix> ms(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);

  std::array<double, 4> lam{};
  for (int i = 0; i < 4; ++i) lam[static_cast<std::size_t>(i)] = std::sqrt(std::max(0.0, ms.eigenvalues()(i)));
  std::sort(lam.begin(), lam.end(), std::greater<>());
  return std::clamp(lam[0] - lam[1] - lam[2] - lam[3], 0.0, 1.0);
}

double heat_current_analytic(double z1, double z2, double g1, double g2) {
  return -2.0 * analytic_memoryless_steady_state(z1, z2, g1, g2).eta;
}

HeatCurrents heat_current_dissipator(const CMatrix& rho, const ModelParams& params) {
  const double tr = rho.trace().real();
  HeatCurrents q;
  if (rho.rows() == 4) {
    q.bath1 = channel_current(params.z1, params.gamma1, excited_population(rho, 0, 2), tr);
    q.bath2 = channel_current(params.z2, params.gamma2, excited_population(rho, 1, 2), tr);
    return q;
  }
  if (rho.rows() == 16) {
    const double p = params.p;
    q.bath1 = (1.0 - p) * channel_current(params.z1, params.gamma1, excited_population(rho, 0, 4), tr) +
              p * channel_current(params.z1, params.gamma1, excited_population(rho, 2, 4), tr);
    q.bath2 = (1.0 - p) * channel_current(params.z2, params.gamma2, excited_population(rho, 1, 4), tr) +
              p * channel_current(params.z2, params.gamma2, excited_population(rho, 3, 4), tr);
    return q;
  }
  throw DimensionError("heat_current_dissipator expects a 4x4 or 16x16 state");
}

bool critical_entanglement_condition(const DensityMatrix& rho, double q_dot) {
  require_two_qubit(rho.matrix());
  const double p11 = std::max(0.0, rho(0, 0).real());
  const double p44 = std::max(0.0, rho(3, 3).real());
  return std::abs(q_dot) > 2.0 * std::sqrt(p11 * p44);
}

std::pair<double, double> local_z(const CMatrix& rho) {
  require_two_qubit(rho);
  const double tr = rho.trace().real();
  return {2.0 * excited_population(rho, 0, 2) - tr, 2.0 * excited_population(rho, 1, 2) - tr};
}

SteadyStateReport make_report(const ModelParams& params, const CMatrix& rho_full, double residual) {
  SteadyStateReport r;
  CMatrix rho_s;
  if (rho_full.rows() == 4) {
    rho_s = rho_full;
  } else if (rho_full.rows() == 16) {
    static constexpr int keep[] = {0, 1};
    static constexpr int dims[] = {2, 2, 2, 2};
    rho_s = partial_trace(rho_full, keep, dims);
  } else {
    throw DimensionError("make_report expects a 4x4 or 16x16 state");
  }
  r.rho_system = DensityMatrix::from_numerical(rho_s);
  try {
    r.concurrence = concurrence_x_state(r.rho_system);
  } catch (const ShapeError&) {
    r.concurrence = concurrence_wootters(r.rho_system);
  }
  const HeatCurrents q = heat_current_dissipator(rho_full, params);
  r.q_dot = q.bath1;
  r.q_dot_bath2 = q.bath2;
  std::tie(r.s1, r.s2) = local_z(r.rho_system.matrix());
  r.residual = residual;
  return r;
}

}  // namespace ness
