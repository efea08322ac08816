#include "ness/qops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "ness/errors.hpp"

namespace ness {

namespace {

bool all_finite(const CMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

}  // namespace

std::string state_violation(const CMatrix& m, const StateTolerance& tol) {
  std::ostringstream why;
  if (m.rows() != m.cols() || m.rows() == 0) {
    why << "not a non-empty square matrix";
    return why.str();
  }
  if (!all_finite(m)) return "non-finite entries";
  const double skew = max_abs(m - m.adjoint());
  if (skew > tol.hermitian) {
    why << "not Hermitian (max |rho - rho^dag| = " << skew << ")";
    return why.str();
  }
  const double tr_err = std::abs(m.trace() - cplx(1.0, 0.0));
  if (tr_err > tol.trace) {
    why << "trace deviates from 1 by " << tr_err;
    return why.str();
  }
  const CMatrix herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin < tol.min_eigenvalue) {
    why << "not positive semidefinite (min eigenvalue " << lmin << ")";
    return why.str();
  }
  return {};
}

DensityMatrix::DensityMatrix(CMatrix data, const StateTolerance& tol) : data_(std::move(data)) {
  if (auto why = state_violation(data_, tol); !why.empty())
    throw ParameterError("invalid density matrix: " + why);
}

DensityMatrix DensityMatrix::from_numerical(const CMatrix& data, const StateTolerance& tol) {
  CMatrix h = 0.5 * (data + data.adjoint());
  const cplx tr = h.trace();
  if (std::abs(tr) < 1e-300) throw ConvergenceError("state has vanishing trace");
  h /= tr.real();
  return DensityMatrix(std::move(h), tol);
}

Superoperator::Superoperator(CMatrix data) : data_(std::move(data)) {
  if (data_.rows() != data_.cols()) throw DimensionError("superoperator must be square");
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(data_.rows()))));
  if (d * d != data_.rows()) throw DimensionError("superoperator side is not a perfect square");
  dim_ = d;
}

CMatrix Superoperator::apply(const CMatrix& rho) const {
  if (rho.rows() != dim_ || rho.cols() != dim_) throw DimensionError("state dimension mismatch");
  return unvec(data_ * vec(rho), dim_);
}

Superoperator Superoperator::operator+(const Superoperator& o) const {
  if (o.dim_ != dim_) throw DimensionError("superoperator dimension mismatch");
  return Superoperator(data_ + o.data_);
}

Superoperator& Superoperator::operator+=(const Superoperator& o) {
  if (o.dim_ != dim_) throw DimensionError("superoperator dimension mismatch");
  data_ += o.data_;
  return *this;
}

Superoperator Superoperator::operator*(double s) const { return Superoperator(data_ * s); }
Superoperator Superoperator::operator*(cplx s) const { return Superoperator(data_ * s); }

Operator identity(Eigen::Index dim) { return Operator::Identity(dim, dim); }

Operator sigma_x() {
  Operator m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Operator sigma_y() {
  Operator m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}

Operator sigma_z() {
  Operator m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Operator sigma_plus() {
  Operator m = Operator::Zero(2, 2);
  m(0, 1) = 1.0;
  return m;
}

Operator sigma_minus() {
  Operator m = Operator::Zero(2, 2);
  m(1, 0) = 1.0;
  return m;
}

Operator kron(const Operator& a, const Operator& b) { return Eigen::kroneckerProduct(a, b).eval(); }

Operator lift(const Operator& single, int site, int n_qubits) {
  if (single.rows() != 2 || single.cols() != 2) throw DimensionError("lift expects a single-qubit operator");
  if (site < 0 || site >= n_qubits) throw DimensionError("qubit index out of range");
  Operator out = identity(1);
  for (int k = 0; k < n_qubits; ++k) out = kron(out, k == site ? single : identity(2));
  return out;
}

Operator exchange_coupling(int i, int j, int n_qubits) {
  if (i == j) throw DimensionError("exchange coupling needs two distinct qubits");
  return lift(sigma_plus(), i, n_qubits) * lift(sigma_minus(), j, n_qubits) +
         lift(sigma_minus(), i, n_qubits) * lift(sigma_plus(), j, n_qubits);
}

int excitations(Eigen::Index index, int n_qubits) {
  int zeros = 0;
  for (int k = 0; k < n_qubits; ++k)
    if (((index >> k) & 1) == 0) ++zeros;
  return zeros;
}

std::vector<Eigen::Index> coherence_sector(int n_qubits, int difference) {
  const Eigen::Index d = Eigen::Index{1} << n_qubits;
  std::vector<Eigen::Index> out;
  for (Eigen::Index b = 0; b < d; ++b)
    for (Eigen::Index a = 0; a < d; ++a)
      if (excitations(a, n_qubits) - excitations(b, n_qubits) == difference) out.push_back(a + d * b);
  return out;
}

CVector vec(const CMatrix& m) { return Eigen::Map<const CVector>(m.data(), m.size()); }

CMatrix unvec(const CVector& v, Eigen::Index dim) {
  if (v.size() != dim * dim) throw DimensionError("vector length does not match dim^2");
  return Eigen::Map<const CMatrix>(v.data(), dim, dim);
}

Superoperator left_multiply(const Operator& a) { return Superoperator(kron(identity(a.rows()), a)); }

Superoperator right_multiply(const Operator& b) { return Superoperator(kron(b.transpose(), identity(b.rows()))); }

Superoperator hamiltonian_part(const Operator& h) {
  return (left_multiply(h) + right_multiply(h) * -1.0) * cplx(0.0, -1.0);
}

Superoperator dissipator(const Operator& a) {
  const Operator ada = a.adjoint() * a;
  return Superoperator(kron(a.conjugate(), a)) + (left_multiply(ada) + right_multiply(ada)) * -0.5;
}

Superoperator conjugation(const Operator& u) { return Superoperator(kron(u.conjugate(), u)); }

CMatrix partial_trace(const CMatrix& rho, std::span<const int> keep, std::span<const int> dims) {
  const auto n = dims.size();
  const long total = std::accumulate(dims.begin(), dims.end(), 1L, std::multiplies<>());
  if (rho.rows() != total || rho.cols() != total)
    throw DimensionError("partial_trace: product of factor dims does not match state dimension");
  std::vector<bool> kept(n, false);
  for (int k : keep) {
    if (k < 0 || static_cast<std::size_t>(k) >= n) throw DimensionError("partial_trace: bad subsystem index");
    kept[static_cast<std::size_t>(k)] = true;
  }
  long out_dim = 1;
  for (std::size_t f = 0; f < n; ++f)
    if (kept[f]) out_dim *= dims[f];

  // Split a flat index into the kept-factor index and the traced-factor index.
  auto split = [&](long idx, long& kept_idx, long& traced_idx) {
    kept_idx = 0;
    traced_idx = 0;
    long kept_stride = 1, traced_stride = 1;
    for (std::size_t f = n; f-- > 0;) {
      const long digit = idx % dims[f];
      idx /= dims[f];
      if (kept[f]) {
        kept_idx += digit * kept_stride;
        kept_stride *= dims[f];
      } else {
        traced_idx += digit * traced_stride;
        traced_stride *= dims[f];
      }
    }
  };

  std::vector<long> kidx(static_cast<std::size_t>(total)), tidx(static_cast<std::size_t>(total));
  for (long i = 0; i < total; ++i) split(i, kidx[static_cast<std::size_t>(i)], tidx[static_cast<std::size_t>(i)]);

  CMatrix out = CMatrix::Zero(out_dim, out_dim);
  for (long j = 0; j < total; ++j)
    for (long i = 0; i < total; ++i)
      if (tidx[static_cast<std::size_t>(i)] == tidx[static_cast<std::size_t>(j)])
        out(kidx[static_cast<std::size_t>(i)], kidx[static_cast<std::size_t>(j)]) += rho(i, j);
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep, std::span<const int> dims) {
  return DensityMatrix::from_numerical(partial_trace(rho.matrix(), keep, dims));
}

CMatrix matrix_exp(const CMatrix& m, double t) {
  if (m.rows() != m.cols()) throw DimensionError("matrix_exp needs a square matrix");
  if (!std::isfinite(t) || !all_finite(m)) throw NumericalRangeError("matrix_exp: non-finite input");
  if (t == 0.0) return CMatrix::Identity(m.rows(), m.cols());
  CMatrix out = (t * m).exp();
  if (!all_finite(out)) throw NumericalRangeError("matrix_exp: result overflowed");
  return out;
}

Superoperator matrix_exp(const Superoperator& m, double t) { return Superoperator(matrix_exp(m.matrix(), t)); }

DensityMatrix nullspace_steady_state(const Superoperator& generator, const SpectralGuard& guard) {
  const CMatrix& L = generator.matrix();
  Eigen::ComplexEigenSolver<CMatrix> es(L, true);
  if (es.info() != Eigen::Success) throw ConvergenceError("eigendecomposition of the generator failed");

  const auto& ev = es.eigenvalues();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(ev.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return std::abs(ev(a)) < std::abs(ev(b)); });
  if (ev.size() > 1 && std::abs(ev(order[1])) < guard.degeneracy) {
    std::ostringstream msg;
    msg << "generator kernel is degenerate (second eigenvalue modulus " << std::abs(ev(order[1])) << ")";
    throw NonUniqueSteadyStateError(msg.str());
  }

  const CMatrix rho = unvec(es.eigenvectors().col(order[0]), generator.state_dim());
  if (std::abs(rho.trace()) < 1e-12) throw ConvergenceError("kernel vector is traceless");
  DensityMatrix out = DensityMatrix::from_numerical(rho / rho.trace());
  const double res = frobenius_norm(generator.apply(out.matrix()));
  if (res > guard.residual) {
    std::ostringstream msg;
    msg << "steady state residual " << res << " exceeds " << guard.residual;
    throw ConvergenceError(msg.str());
  }
  return out;
}

DensityMatrix stationary_projection(const Superoperator& generator, const CMatrix& rho0,
                                    const SpectralGuard& guard) {
  const CMatrix& L = generator.matrix();
  if (rho0.rows() != generator.state_dim()) throw DimensionError("initial state dimension mismatch");

  // Right kernel of L and kernel of L^dagger from one SVD; the spectral projector
  // onto the (semisimple) zero eigenspace is R (Y^dag R)^-1 Y^dag.
  Eigen::BDCSVD<CMatrix> svd(L, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = 1e-10 * std::max(1.0, sv(0));
  Eigen::Index k = 0;
  while (k < sv.size() && sv(sv.size() - 1 - k) < cutoff) ++k;
  if (k == 0) throw ConvergenceError("generator has no numerical kernel");

  const CMatrix R = svd.matrixV().rightCols(k);
  const CMatrix Y = svd.matrixU().rightCols(k);
  const CMatrix gram = Y.adjoint() * R;
  const CVector coeff = gram.fullPivLu().solve(Y.adjoint() * vec(rho0));
  const CMatrix rho = unvec(R * coeff, generator.state_dim());

  DensityMatrix out = DensityMatrix::from_numerical(rho);
  const double res = frobenius_norm(generator.apply(out.matrix()));
  if (res > guard.residual) {
    std::ostringstream msg;
    msg << "stationary projection residual " << res << " exceeds " << guard.residual;
    throw ConvergenceError(msg.str());
  }
  return out;
}

double frobenius_norm(const CMatrix& m) { return m.norm(); }

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace ness
