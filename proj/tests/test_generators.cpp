#include <doctest.h>

#include "ness/collision.hpp"
#include "ness/errors.hpp"
#include "ness/generators.hpp"
#include "ness/observables.hpp"
#include "support.hpp"

using namespace ness;

namespace {

double trace_distance(const CMatrix& a, const CMatrix& b) {
  const CMatrix d = a - b;
  return 0.5 * Eigen::SelfAdjointEigenSolver<CMatrix>(0.5 * (d + d.adjoint())).eigenvalues().cwiseAbs().sum();
}

CMatrix thermal_pair(double z1, double z2) { return kron(thermal_qubit(z1).matrix(), thermal_qubit(z2).matrix()); }

}  // namespace

TEST_SUITE("generators") {
  TEST_CASE("memoryless generator fixes the thermal product at equal temperatures") {
    for (double z : {-1.0, -0.3, 0.0, 0.8}) {
      ModelParams m;
      m.z1 = m.z2 = z;
      m.gamma1 = 0.4;
      m.gamma2 = 5.0;
      const auto L = build_memoryless_generator(m).superop;
      CHECK(max_abs(L.apply(thermal_pair(z, z))) < 1e-14);
    }
  }

  TEST_CASE("strong damping thermalizes each qubit") {
    ModelParams m;
    m.z1 = 0.5;
    m.z2 = -0.5;
    m.gamma1 = m.gamma2 = 1000.0;
    const auto rep = steady_state(build_memoryless_generator(m));
    CHECK(trace_distance(rep.rho_system.matrix(), thermal_pair(0.5, -0.5)) < 1e-2);
  }

  TEST_CASE("p = 0 acts on the system exactly as the memoryless generator") {
    for (int trial = 0; trial < 5; ++trial) {
      const ModelParams m = test::random_params(0.0);
      const auto l4 = build_memory_generator(m).superop;
      const auto l2 = build_memoryless_generator(m).superop;
      const CMatrix rs = test::random_state(4).matrix(), rm = test::random_state(4).matrix();
      CHECK(max_abs(l4.apply(kron(rs, rm)) - kron(l2.apply(rs), rm)) < 1e-12);
    }
  }

  TEST_CASE("p = 1 without exchange leaves the system purely unitary") {
    ModelParams m = test::random_params(1.0);
    m.upsilon1 = m.upsilon2 = 0.0;
    const auto l4 = build_memory_generator(m).superop;
    const Operator h = exchange_coupling(0, 1, 2);
    const CMatrix rs = test::random_state(4).matrix(), rm = test::random_state(4).matrix();
    const int dims[] = {2, 2, 2, 2};
    const int sys[] = {0, 1};
    const CMatrix reduced = partial_trace(l4.apply(kron(rs, rm)), sys, dims);
    CHECK(max_abs(reduced - hamiltonian_part(h).apply(rs)) < 1e-12);
  }

  TEST_CASE("equal temperatures: every qubit thermal and no heat, for any p") {
    for (double p : {0.0, 0.25, 0.7, 1.0}) {
      ModelParams m = test::random_params(p);
      m.z2 = m.z1;
      const auto gen = build_memory_generator(m);
      double res = 0.0;
      const CMatrix rho = stationary_state(gen, &res);
      if (p > 0.0) {
        const CMatrix xi = thermal_qubit(m.z1).matrix();
        CHECK(max_abs(rho - kron(kron(xi, xi), kron(xi, xi))) < 1e-10);
      }
      const auto rep = steady_state(gen);
      CHECK(std::abs(rep.q_dot) < 1e-12);
      CHECK(rep.concurrence == 0.0);
      CHECK(max_abs(rep.rho_system.matrix() - thermal_pair(m.z1, m.z1)) < 1e-10);
    }
  }

  TEST_CASE("memoryless local polarizations follow the bath gradient") {
    for (int k = 0; k < 100; ++k) {
      const ModelParams m = test::random_params(0.0);
      const auto rep = steady_state(build_memoryless_generator(m));
      const double sign = m.z1 > m.z2 ? 1.0 : -1.0;
      CHECK(sign * (m.z1 - rep.s1) >= -1e-12);
      CHECK(sign * (rep.s1 - rep.s2) >= -1e-12);
      CHECK(sign * (rep.s2 - m.z2) >= -1e-12);
    }
  }

  TEST_CASE("with memory the local polarizations stay between the bath values") {
    for (int k = 0; k < 100; ++k) {
      const ModelParams m = test::random_params(test::uniform(0.0, 1.0));
      const auto sol = SectorSteadyStateSolver::solve(m);
      REQUIRE(sol.ok);
      const auto [s1, s2] = local_z(SectorSteadyStateSolver::system_state(sol));
      const double lo = std::min(m.z1, m.z2) - 1e-9, hi = std::max(m.z1, m.z2) + 1e-9;
      CHECK(s1 >= lo);
      CHECK(s1 <= hi);
      CHECK(s2 >= lo);
      CHECK(s2 <= hi);
    }
  }

  TEST_CASE("memory improves the concurrence at fixed couplings") {
    // Equal couplings gamma = 3, upsilon = 2 at strongly biased temperatures.
    const double z2s[] = {-1.0, -0.9, -0.8, -0.7, -0.6};
    for (double z2 : z2s) {
      ModelParams m;
      m.z1 = 1.0;
      m.z2 = z2;
      m.gamma1 = m.gamma2 = 3.0;
      m.upsilon1 = m.upsilon2 = 2.0;
      m.p = 0.0;
      const double c0 = steady_state(build_memory_generator(m)).concurrence;
      m.p = 1.0;
      const double c1 = steady_state(build_memory_generator(m)).concurrence;
      CHECK(c0 > 0.0);
      CHECK(c1 >= c0);
    }
  }

  TEST_CASE("generators annihilate the trace and preserve Hermiticity") {
    for (int k = 0; k < 20; ++k) {
      const double p = k % 4 == 0 ? 0.0 : test::uniform(0.0, 1.0);
      const ModelParams m = test::random_params(p);
      for (const auto& gen : {build_memoryless_generator(m), build_memory_generator(m)}) {
        const Eigen::Index d = gen.superop.state_dim();
        const CMatrix x = test::random_matrix(d);
        CHECK(std::abs(gen.superop.apply(x).trace()) < 1e-12 * (1.0 + max_abs(x)) * 100.0);
        const CMatrix h = test::random_hermitian(d);
        const CMatrix out = gen.superop.apply(h);
        CHECK(max_abs(out - out.adjoint()) < 1e-12 * 100.0);
      }
    }
  }

  TEST_CASE("physical units do not change the scaled generator") {
    ModelParams m = test::random_params(0.6);
    const auto a = build_memory_generator(m).superop;
    m.Omega = 7.5;
    m.omega = 120.0;
    const auto b = build_memory_generator(m).superop;
    CHECK(max_abs(a.matrix() - b.matrix()) == 0.0);
  }

  TEST_CASE("parameter validation") {
    ModelParams m;
    m.z1 = 1.5;
    CHECK_THROWS_AS(build_memoryless_generator(m), ParameterError);
    m = ModelParams{};
    m.gamma1 = -1.0;
    CHECK_THROWS_AS(build_memory_generator(m), ParameterError);
    m = ModelParams{};
    m.p = 1.2;
    CHECK_THROWS_AS(build_memory_generator(m), ParameterError);
  }

  TEST_CASE("sector solver agrees with the eigendecomposition route") {
    for (int k = 0; k < 30; ++k) {
      const double p = k % 3 == 0 ? 0.0 : test::uniform(0.05, 1.0);
      const ModelParams m = test::random_params(p);
      const auto sol = SectorSteadyStateSolver::solve(m);
      REQUIRE(sol.ok);
      CHECK(sol.residual < 1e-10);
      const auto rep = steady_state(build_memory_generator(m));
      CHECK(max_abs(SectorSteadyStateSolver::system_state(sol) - rep.rho_system.matrix()) < 1e-10);
    }
  }

  TEST_CASE("sector blocks have the expected sizes") {
    const auto gen = build_memory_generator(test::random_params(0.5));
    CHECK(sector_block(gen, 0).rows() == 70);
    CHECK(sector_block(gen, 1).rows() == 56);
    CHECK(sector_block(build_memoryless_generator(ModelParams{}), 0).rows() == 6);
  }

  TEST_CASE("evolve") {
    const ModelParams m = test::random_params(0.4);
    const auto gen = build_memory_generator(m);
    const auto rho0 = test::random_state(16);
    const double ts[] = {0.0, 0.5, 1.0, 300.0};
    const auto states = evolve(gen, rho0, ts);
    REQUIRE(states.size() == 4);
    CHECK(max_abs(states[0].matrix() - rho0.matrix()) < 1e-14);
    CHECK(max_abs(states[3].matrix() - stationary_state(gen)) < 1e-8);
    const double half[] = {0.5};
    const auto again = evolve(gen, states[1], half);
    CHECK(max_abs(again[0].matrix() - states[2].matrix()) < 1e-10);
    const double bad[] = {1.0, 0.5};
    CHECK_THROWS_AS(evolve(gen, rho0, bad), ParameterError);
  }
}
