#include "ness/generators.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "ness/collision.hpp"
#include "ness/errors.hpp"

namespace ness {

namespace {

// Parameter-independent pieces of a generator. The generator is the linear
// combination sum_i c_i(params) * piece_i.
struct GeneratorPieces {
  int n_qubits = 0;
  std::vector<Superoperator> full;
  std::vector<Eigen::Index> sector;  // zero excitation-difference vec indices
  std::vector<CMatrix> sector_blocks;
  Eigen::VectorXcd trace_row;        // trace functional restricted to the sector
};

GeneratorPieces make_pieces(int n_qubits) {
  GeneratorPieces g;
  g.n_qubits = n_qubits;
  g.full.push_back(hamiltonian_part(exchange_coupling(0, 1, n_qubits)));
  if (n_qubits == 4) {
    g.full.push_back(hamiltonian_part(exchange_coupling(0, 2, n_qubits)));
    g.full.push_back(hamiltonian_part(exchange_coupling(1, 3, n_qubits)));
  }
  for (int q = 0; q < n_qubits; ++q) {
    g.full.push_back(dissipator(lift(sigma_minus(), q, n_qubits)));
    g.full.push_back(dissipator(lift(sigma_plus(), q, n_qubits)));
  }

  g.sector = coherence_sector(n_qubits, 0);
  for (const auto& piece : g.full) g.sector_blocks.push_back(piece.matrix()(g.sector, g.sector));

  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  g.trace_row = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(g.sector.size()));
  for (std::size_t k = 0; k < g.sector.size(); ++k)
    if (g.sector[k] % (dim + 1) == 0) g.trace_row(static_cast<Eigen::Index>(k)) = 1.0;
  return g;
}

const GeneratorPieces& pieces(int n_qubits) {
  static const GeneratorPieces two = make_pieces(2);
  static const GeneratorPieces four = make_pieces(4);
  return n_qubits == 2 ? two : four;
}

std::vector<double> coefficients(const ModelParams& m, GeneratorKind kind) {
  const double z1m = ModelParams::z_minus(m.z1), z1p = ModelParams::z_plus(m.z1);
  const double z2m = ModelParams::z_minus(m.z2), z2p = ModelParams::z_plus(m.z2);
  if (kind == GeneratorKind::memoryless)
    return {1.0, m.gamma1 * z1m, m.gamma1 * z1p, m.gamma2 * z2m, m.gamma2 * z2p};

  const double d = 1.0 - m.p;
  // Order matches make_pieces(4): H(S1S2), H(S1M1), H(S2M2), then D-/D+ for S1, S2, M1, M2.
  return {1.0,
          m.p * m.upsilon1,
          m.p * m.upsilon2,
          d * m.gamma1 * z1m,
          d * m.gamma1 * z1p,
          d * m.gamma2 * z2m,
          d * m.gamma2 * z2p,
          m.p * m.gamma1 * z1m,
          m.p * m.gamma1 * z1p,
          m.p * m.gamma2 * z2m,
          m.p * m.gamma2 * z2p};
}

GkslGenerator assemble(const ModelParams& params, GeneratorKind kind) {
  params.validate();
  const auto& pc = pieces(kind == GeneratorKind::memoryless ? 2 : 4);
  const auto c = coefficients(params, kind);
  CMatrix L = CMatrix::Zero(pc.full[0].matrix().rows(), pc.full[0].matrix().cols());
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c[i] != 0.0) L += c[i] * pc.full[i].matrix();
  return GkslGenerator{Superoperator(std::move(L)), params, kind};
}

}  // namespace

GkslGenerator build_memoryless_generator(const ModelParams& params) {
  return assemble(params, GeneratorKind::memoryless);
}

GkslGenerator build_memory_generator(const ModelParams& params) {
  return assemble(params, GeneratorKind::with_memory);
}

CMatrix stationary_state(const GkslGenerator& gen, double* residual) {
  CMatrix rho;
  if (gen.kind == GeneratorKind::with_memory && gen.params.p == 0.0) {
    // Memory qubits neither couple nor damp: pick the branch with memory in xi1 (x) xi2.
    const CMatrix init = kron(identity(4) / 4.0,
                              kron(thermal_qubit(gen.params.z1).matrix(), thermal_qubit(gen.params.z2).matrix()));
    rho = stationary_projection(gen.superop, init).matrix();
  } else {
    rho = nullspace_steady_state(gen.superop).matrix();
  }
  if (residual) *residual = frobenius_norm(gen.superop.apply(rho));
  return rho;
}

SteadyStateReport steady_state(const GkslGenerator& gen) {
  double residual = 0.0;
  const CMatrix rho = stationary_state(gen, &residual);
  return make_report(gen.params, rho, residual);
}

std::vector<DensityMatrix> evolve(const GkslGenerator& gen, const DensityMatrix& rho0,
                                  std::span<const double> t_grid) {
  if (rho0.dim() != gen.superop.state_dim()) throw DimensionError("initial state does not match generator");
  std::vector<DensityMatrix> out;
  out.reserve(t_grid.size());
  if (t_grid.empty()) return out;
  if (t_grid.front() < 0.0) throw ParameterError("time grid must start at t >= 0");

  CVector v = vec(rho0.matrix());
  double t_prev = 0.0;
  double cached_step = -1.0;
  CMatrix propagator;
  for (double t : t_grid) {
    const double step = t - t_prev;
    if (step < 0.0) throw ParameterError("time grid must be ascending");
    if (step > 0.0) {
      if (std::abs(step - cached_step) > 1e-15 * std::max(1.0, step)) {
        propagator = matrix_exp(gen.superop.matrix(), step);
        cached_step = step;
      }
      v = propagator * v;
    }
    const CMatrix r = unvec(v, rho0.dim());
    out.emplace_back(0.5 * (r + r.adjoint()));
    t_prev = t;
  }
  return out;
}

SectorSteadyStateSolver::Solution SectorSteadyStateSolver::solve(const ModelParams& params) {
  const bool memory = params.p > 0.0;
  const auto kind = memory ? GeneratorKind::with_memory : GeneratorKind::memoryless;
  const auto& pc = pieces(memory ? 4 : 2);
  const auto c = coefficients(params, kind);

  const auto n = static_cast<Eigen::Index>(pc.sector.size());
  CMatrix block = CMatrix::Zero(n, n);
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c[i] != 0.0) block += c[i] * pc.sector_blocks[i];

  // The rows at diagonal positions sum to zero (trace preservation), so one of them
  // can carry the normalization Tr rho = 1. Position 0 is the |0..0><0..0| entry.
  CMatrix system = block;
  system.row(0) = pc.trace_row.transpose();
  CVector rhs = CVector::Zero(n);
  rhs(0) = 1.0;
  const CVector x = system.partialPivLu().solve(rhs);

  Solution s;
  const Eigen::Index dim = Eigen::Index{1} << pc.n_qubits;
  s.rho = CMatrix::Zero(dim, dim);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index v = pc.sector[static_cast<std::size_t>(k)];
    s.rho(v % dim, v / dim) = x(k);
  }
  s.rho = 0.5 * (s.rho + s.rho.adjoint()).eval();
  const double tr = s.rho.trace().real();
  s.ok = std::isfinite(tr) && std::abs(tr) > 1e-300;
  if (s.ok) {
    s.rho /= tr;
    CVector xs(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const Eigen::Index v = pc.sector[static_cast<std::size_t>(k)];
      xs(k) = s.rho(v % dim, v / dim);
    }
    s.residual = (block * xs).norm();
    s.ok = std::isfinite(s.residual) && s.residual < 1e-8;
  }
  return s;
}

CMatrix SectorSteadyStateSolver::system_state(const Solution& s) {
  if (s.rho.rows() == 4) return s.rho;
  static constexpr int keep[] = {0, 1};
  static constexpr int dims[] = {2, 2, 2, 2};
  return partial_trace(s.rho, keep, dims);
}

CMatrix sector_block(const GkslGenerator& gen, int difference) {
  const auto idx = coherence_sector(gen.n_qubits(), difference);
  return gen.superop.matrix()(idx, idx);
}

}  // namespace ness
