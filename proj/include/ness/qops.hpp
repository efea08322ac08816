#pragma once

// Dense complex linear algebra for small qubit registers.
//
// Conventions shared by the whole library:
//   * |0> is the excited state: sigma_z |0> = +|0>, sigma_- = |1><0|.
//   * Tensor factors are ordered left to right, the first factor being the
//     most significant index (S1 (x) S2 (x) M1 (x) M2 for the 4-qubit register).
//   * Density matrices are vectorized column-major: vec(A X B) = (B^T (x) A) vec(X).

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ness {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;

/// A plain dim x dim operator. Hamiltonians are in units of the inner coupling.
using Operator = CMatrix;

/// Tolerances for DensityMatrix validation.
struct StateTolerance {
  double hermitian = 1e-12;
  double trace = 1e-12;
  double min_eigenvalue = -1e-10;
};

/// Why a matrix failed the density-matrix checks; empty when valid.
std::string state_violation(const CMatrix& m, const StateTolerance& tol = {});

/// Hermitian, unit-trace, positive semidefinite matrix. Construction validates.
class DensityMatrix {
 public:
  explicit DensityMatrix(CMatrix data, const StateTolerance& tol = {});

  /// Hermitize (rho + rho^dagger)/2 and renormalize before validating.
  static DensityMatrix from_numerical(const CMatrix& data, const StateTolerance& tol = {});

  Eigen::Index dim() const { return data_.rows(); }
  const CMatrix& matrix() const { return data_; }
  cplx operator()(Eigen::Index r, Eigen::Index c) const { return data_(r, c); }

 private:
  CMatrix data_;
};

/// D^2 x D^2 matrix acting on column-major vectorized D x D matrices.
class Superoperator {
 public:
  Superoperator() = default;
  explicit Superoperator(CMatrix data);

  Eigen::Index state_dim() const { return dim_; }
  const CMatrix& matrix() const { return data_; }

  CMatrix apply(const CMatrix& rho) const;

  Superoperator operator+(const Superoperator& o) const;
  Superoperator& operator+=(const Superoperator& o);
  Superoperator operator*(double s) const;
  Superoperator operator*(cplx s) const;

 private:
  Eigen::Index dim_ = 0;
  CMatrix data_;
};

// -- single-qubit operators --------------------------------------------------

Operator identity(Eigen::Index dim);
Operator sigma_x();
Operator sigma_y();
Operator sigma_z();
Operator sigma_plus();
Operator sigma_minus();

/// Kronecker product: out[(i*db+k),(j*db+l)] = a[i,j] * b[k,l].
Operator kron(const Operator& a, const Operator& b);

/// Embed a single-qubit operator on qubit `site` of an n-qubit register.
Operator lift(const Operator& single, int site, int n_qubits);

/// sigma_+ (x) sigma_- + sigma_- (x) sigma_+ between qubits i and j of an n-qubit register.
Operator exchange_coupling(int i, int j, int n_qubits);

/// Number of excitations (|0> factors) in computational basis state `index`.
int excitations(Eigen::Index index, int n_qubits);

/// Column-major vec indices (a + D*b) whose excitation difference exc(a) - exc(b) equals `difference`.
std::vector<Eigen::Index> coherence_sector(int n_qubits, int difference);

// -- vectorization and superoperator building blocks --------------------------

CVector vec(const CMatrix& m);
CMatrix unvec(const CVector& v, Eigen::Index dim);

/// X -> A X.
Superoperator left_multiply(const Operator& a);
/// X -> X B.
Superoperator right_multiply(const Operator& b);
/// X -> -i [H, X].
Superoperator hamiltonian_part(const Operator& h);
/// X -> A X A^dagger - 1/2 {A^dagger A, X}.
Superoperator dissipator(const Operator& a);
/// X -> U X U^dagger.
Superoperator conjugation(const Operator& u);

// -- reductions and functions -------------------------------------------------

/// Trace out every factor not listed in `keep`. `dims` gives the factor sizes.
CMatrix partial_trace(const CMatrix& rho, std::span<const int> keep, std::span<const int> dims);
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep,
                            std::span<const int> dims);

/// exp(t * m) by Pade scaling and squaring.
CMatrix matrix_exp(const CMatrix& m, double t);
Superoperator matrix_exp(const Superoperator& m, double t);

struct SpectralGuard {
  /// Second-smallest |eigenvalue| below this means the kernel is degenerate.
  double degeneracy = 1e-8;
  /// Largest accepted Frobenius residual ||L[rho]||.
  double residual = 1e-10;
};

/// Unique stationary state of a generator (kernel of L via eigendecomposition).
DensityMatrix nullspace_steady_state(const Superoperator& generator, const SpectralGuard& guard = {});

/// Long-time limit of exp(tL)[rho0]: spectral projection of rho0 onto the kernel of L.
/// Works when the kernel is degenerate (conserved quantities pick the branch).
DensityMatrix stationary_projection(const Superoperator& generator, const CMatrix& rho0,
                                    const SpectralGuard& guard = {});

double frobenius_norm(const CMatrix& m);
double max_abs(const CMatrix& m);

}  // namespace ness
