#pragma once

#include <random>

#include "ness/model.hpp"
#include "ness/qops.hpp"

namespace ness::test {

inline std::mt19937_64& rng() {
  static std::mt19937_64 engine(20240611);
  return engine;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

inline double log_uniform(double lo, double hi) { return std::pow(10.0, uniform(std::log10(lo), std::log10(hi))); }

inline CMatrix random_matrix(Eigen::Index dim) {
  std::normal_distribution<double> n;
  CMatrix a(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) a(i, j) = cplx(n(rng()), n(rng()));
  return a;
}

inline CMatrix random_hermitian(Eigen::Index dim) {
  const CMatrix a = random_matrix(dim);
  return 0.5 * (a + a.adjoint());
}

/// Full-rank random state A A^dagger / Tr.
inline DensityMatrix random_state(Eigen::Index dim) {
  const CMatrix a = random_matrix(dim);
  CMatrix rho = a * a.adjoint();
  rho /= rho.trace();
  return DensityMatrix::from_numerical(rho);
}

inline CMatrix random_unitary(Eigen::Index dim) {
  Eigen::HouseholderQR<CMatrix> qr(random_matrix(dim));
  return qr.householderQ() * CMatrix::Identity(dim, dim);
}

/// Random model with z in [-1, 1] and couplings log-uniform in [0.05, 20].
inline ModelParams random_params(double p) {
  ModelParams m;
  m.z1 = uniform(-1.0, 1.0);
  m.z2 = uniform(-1.0, 1.0);
  m.gamma1 = log_uniform(0.05, 20.0);
  m.gamma2 = log_uniform(0.05, 20.0);
  m.upsilon1 = log_uniform(0.05, 20.0);
  m.upsilon2 = log_uniform(0.05, 20.0);
  m.p = p;
  return m;
}

inline double min_eigenvalue(const CMatrix& h) {
  return Eigen::SelfAdjointEigenSolver<CMatrix>(0.5 * (h + h.adjoint())).eigenvalues().minCoeff();
}

}  // namespace ness::test
