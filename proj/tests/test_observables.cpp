#include <doctest.h>

#include "ness/errors.hpp"
#include "ness/generators.hpp"
#include "ness/observables.hpp"
#include "support.hpp"

using namespace ness;

namespace {

// |rho_23| and diagonal of an X-state, 1-based labels as in the formulas.
DensityMatrix x_state(double p11, double p22, double p33, double p44, cplx c23, cplx c14 = 0.0) {
  CMatrix r = CMatrix::Zero(4, 4);
  r(0, 0) = p11;
  r(1, 1) = p22;
  r(2, 2) = p33;
  r(3, 3) = p44;
  r(1, 2) = c23;
  r(2, 1) = std::conj(c23);
  r(0, 3) = c14;
  r(3, 0) = std::conj(c14);
  return DensityMatrix(r);
}

DensityMatrix random_x_state() {
  // Diagonal from a simplex, coherence inside the positivity bound.
  double d[4];
  double sum = 0.0;
  for (double& v : d) sum += (v = test::uniform(0.01, 1.0));
  for (double& v : d) v /= sum;
  const double r = test::uniform(0.0, 0.999) * std::sqrt(d[1] * d[2]);
  const double phi = test::uniform(0.0, 2.0 * M_PI);
  return x_state(d[0], d[1], d[2], d[3], std::polar(r, phi));
}

}  // namespace

TEST_SUITE("observables") {
  TEST_CASE("analytic state: closed-form values") {
    const auto a = analytic_memoryless_steady_state(0.0, -1.0, 2.0, 2.0);
    CHECK(a.eta == doctest::Approx(0.125));
    CHECK(a.s1 == doctest::Approx(-0.25));
    CHECK(a.s2 == doctest::Approx(-0.75));
    const auto b = analytic_memoryless_steady_state(1.0, -1.0, 1000.0, 1000.0);
    CHECK(b.eta == doctest::Approx(2.0 * 1e6 / (2000.0 * 1000004.0)).epsilon(1e-14));
    const auto c = analytic_memoryless_steady_state(0.3, 0.3, 1.1, 4.0);
    CHECK(c.eta == 0.0);
    CHECK(c.s1 == doctest::Approx(0.3));
  }

  TEST_CASE("correlation matrix pattern") {
    const auto a = analytic_memoryless_steady_state(0.4, -0.6, 1.3, 0.9);
    CHECK(std::abs(a.chi.trace()) < 1e-16);
    CHECK(a.chi(1, 2) == cplx(0.0, a.eta));
    CHECK(a.chi(2, 1) == cplx(0.0, -a.eta));
    const double e2 = a.eta * a.eta;
    const double diag[] = {-e2, e2, e2, -e2};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        if ((i == 1 && j == 2) || (i == 2 && j == 1)) continue;
        CHECK(a.chi(i, j) == cplx(i == j ? diag[i] : 0.0));
      }
    const CMatrix prod = kron(CMatrix(Eigen::Vector2cd(0.5 * (1 + a.s1), 0.5 * (1 - a.s1)).asDiagonal()),
                              CMatrix(Eigen::Vector2cd(0.5 * (1 + a.s2), 0.5 * (1 - a.s2)).asDiagonal()));
    CHECK(max_abs(a.rho.matrix() - prod - a.chi) < 1e-16);
  }

  TEST_CASE("analytic state satisfies the generator for random couplings") {
    for (int k = 0; k < 50; ++k) {
      const ModelParams m = test::random_params(0.0);
      const auto a = analytic_memoryless_steady_state(m.z1, m.z2, m.gamma1, m.gamma2);
      CHECK(max_abs(build_memoryless_generator(m).superop.apply(a.rho.matrix())) < 1e-12);
    }
  }

  TEST_CASE("X-state concurrence examples") {
    CHECK(concurrence_x_state(x_state(0.25, 0.25, 0.25, 0.25, 0.0)) == 0.0);
    CHECK(concurrence_x_state(x_state(0.0, 0.5, 0.5, 0.0, 0.5)) == doctest::Approx(1.0));
    CHECK(concurrence_x_state(x_state(0.1, 0.4, 0.4, 0.1, cplx(0.0, 0.3))) == doctest::Approx(0.4));
    CHECK(concurrence_x_state(x_state(0.2, 0.3, 0.3, 0.2, 0.1)) == 0.0);
    CHECK(concurrence_margin(x_state(0.1, 0.4, 0.4, 0.1, 0.3).matrix()) == doctest::Approx(0.2));
    CHECK_THROWS_AS(concurrence_x_state(x_state(0.4, 0.1, 0.1, 0.4, 0.0, 0.3)), ShapeError);
  }

  TEST_CASE("Wootters agrees with the X-state formula") {
    for (int k = 0; k < 100; ++k) {
      const auto rho = random_x_state();
      CHECK(std::abs(concurrence_wootters(rho) - concurrence_x_state(rho)) < 1e-10);
    }
  }

  TEST_CASE("Wootters: Werner and product states") {
    CVector psi = CVector::Zero(4);
    psi(1) = 1.0 / std::sqrt(2.0);
    psi(2) = -1.0 / std::sqrt(2.0);
    const CMatrix singlet = psi * psi.adjoint();
    auto werner = [&](double w) { return DensityMatrix(w * singlet + (1.0 - w) * identity(4) / 4.0); };
    CHECK(concurrence_wootters(werner(1.0)) == doctest::Approx(1.0));
    CHECK(std::abs(concurrence_wootters(werner(1.0 / 3.0))) < 1e-12);
    CHECK(concurrence_wootters(werner(0.6)) == doctest::Approx(0.4));
    CHECK(concurrence_wootters(DensityMatrix(identity(4) / 4.0)) == 0.0);
    const auto a = test::random_state(2), b = test::random_state(2);
    CHECK(std::abs(concurrence_wootters(DensityMatrix(kron(a.matrix(), b.matrix())))) < 1e-7);
  }

  TEST_CASE("Wootters is invariant under local unitaries") {
    for (int k = 0; k < 20; ++k) {
      const auto rho = random_x_state();
      const CMatrix u = kron(test::random_unitary(2), test::random_unitary(2));
      const DensityMatrix rotated = DensityMatrix::from_numerical(u * rho.matrix() * u.adjoint());
      CHECK(std::abs(concurrence_wootters(rotated) - concurrence_wootters(rho)) < 1e-9);
    }
  }

  TEST_CASE("analytic heat current") {
    CHECK(heat_current_analytic(0.0, -1.0, 2.0, 2.0) == doctest::Approx(-0.25));
    CHECK(heat_current_analytic(-1.0, 0.0, 2.0, 2.0) == doctest::Approx(0.25));
    CHECK(heat_current_analytic(1.0, -1.0, 2.0, 2.0) == doctest::Approx(-0.5));
    CHECK(heat_current_analytic(0.5, 0.5, 3.0, 0.1) == 0.0);
  }

  TEST_CASE("dissipator heat current equals -2 eta and balances") {
    for (int k = 0; k < 50; ++k) {
      const ModelParams m = test::random_params(0.0);
      const auto a = analytic_memoryless_steady_state(m.z1, m.z2, m.gamma1, m.gamma2);
      const auto q = heat_current_dissipator(a.rho.matrix(), m);
      CHECK(std::abs(q.bath1 + 2.0 * a.eta) <= 1e-9);
      CHECK(std::abs(q.bath1 + q.bath2) <= 1e-9);
    }
  }

  TEST_CASE("heat currents balance with memory") {
    for (int k = 0; k < 20; ++k) {
      const ModelParams m = test::random_params(test::uniform(0.05, 1.0));
      const auto rep = steady_state(build_memory_generator(m));
      CHECK(std::abs(rep.q_dot + rep.q_dot_bath2) <= 1e-9);
      // heat flows out of the hotter bath
      if (m.z1 > m.z2) CHECK(rep.q_dot <= 1e-12);
      if (m.z1 < m.z2) CHECK(rep.q_dot >= -1e-12);
    }
  }

  TEST_CASE("thermal states carry no heat") {
    ModelParams m;
    m.z1 = m.z2 = 0.2;
    const CMatrix xi = CMatrix(Eigen::Vector2cd(0.6, 0.4).asDiagonal());
    const auto q = heat_current_dissipator(kron(xi, xi), m);
    CHECK(std::abs(q.bath1) < 1e-16);
    CHECK(std::abs(q.bath2) < 1e-16);
  }

  TEST_CASE("critical condition at the boundary") {
    const double z1 = 0.3;
    const double s = std::sqrt(9.0 / 8.0);
    // lower branch of z1 z2 + s |z1 - z2| = 1, reached at g1 = 2/(sqrt2 - z1)
    const double low = (1.0 - s * z1) / (z1 - s);
    const double g1 = 2.0 / (std::sqrt(2.0) - z1), g2 = 4.0 * std::sqrt(2.0) - g1;
    const auto a = analytic_memoryless_steady_state(z1, low, g1, g2);
    CHECK(std::abs(concurrence_margin(a.rho.matrix())) < 1e-8);
    // upper branch, reached at g1 = 2/(sqrt2 + z1)
    const double high = (1.0 + s * z1) / (z1 + s);
    const double h1 = 2.0 / (std::sqrt(2.0) + z1), h2 = 4.0 * std::sqrt(2.0) - h1;
    const auto b = analytic_memoryless_steady_state(z1, high, h1, h2);
    CHECK(std::abs(concurrence_margin(b.rho.matrix())) < 1e-8);
  }

  TEST_CASE("critical condition matches the concurrence") {
    int entangled = 0;
    for (int k = 0; k < 200; ++k) {
      ModelParams m = test::random_params(0.0);
      m.gamma1 = test::log_uniform(0.3, 8.0);
      m.gamma2 = test::log_uniform(0.3, 8.0);
      m.z1 = test::uniform(0.0, 1.0);
      m.z2 = test::uniform(-1.0, -0.5);
      const auto a = analytic_memoryless_steady_state(m.z1, m.z2, m.gamma1, m.gamma2);
      const double q = heat_current_analytic(m.z1, m.z2, m.gamma1, m.gamma2);
      const bool crit = critical_entanglement_condition(a.rho, q);
      const double c = concurrence_x_state(a.rho);
      CHECK(crit == (c > 0.0));
      entangled += crit;
    }
    CHECK(entangled > 10);
    CHECK(entangled < 190);
  }

  TEST_CASE("local polarizations") {
    const auto a = analytic_memoryless_steady_state(0.4, -0.6, 1.3, 0.9);
    const auto [s1, s2] = local_z(a.rho.matrix());
    CHECK(s1 == doctest::Approx(a.s1));
    CHECK(s2 == doctest::Approx(a.s2));
  }
}
