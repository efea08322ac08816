#include <doctest.h>

#include <cmath>

#include "ness/analysis.hpp"
#include "ness/errors.hpp"
#include "ness/observables.hpp"
#include "ness/optimize.hpp"
#include "support.hpp"

using namespace ness;

TEST_SUITE("analysis") {
  TEST_CASE("nelder-mead finds a shifted quadratic inside the box") {
    const Objective f = [](const std::vector<double>& x) {
      return (x[0] - 0.3) * (x[0] - 0.3) + 4.0 * (x[1] + 1.2) * (x[1] + 1.2);
    };
    const auto r = nelder_mead(f, {2.0, 2.0}, {-3.0, -3.0}, {3.0, 3.0});
    CHECK(r.converged);
    CHECK(r.x[0] == doctest::Approx(0.3).epsilon(1e-5));
    CHECK(r.x[1] == doctest::Approx(-1.2).epsilon(1e-5));
    // minimum outside the box lands on the face
    const Objective g = [](const std::vector<double>& x) { return (x[0] - 5.0) * (x[0] - 5.0); };
    CHECK(nelder_mead(g, {0.0}, {-1.0}, {1.0}).x[0] == doctest::Approx(1.0));
  }

  TEST_CASE("seeded streams are stable") {
    Rng a(derive_seed(7, 3)), b(derive_seed(7, 3)), c(derive_seed(7, 4));
    for (int k = 0; k < 10; ++k) {
      const double u = a.uniform();
      CHECK(u == b.uniform());
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
    }
    CHECK(a.next() != c.next());
  }

  TEST_CASE("memoryless boundary values") {
    const auto b0 = memoryless_boundary(0.0);
    CHECK(b0.z2_high == doctest::Approx(4.0 / (3.0 * std::sqrt(2.0))).epsilon(1e-14));
    CHECK(b0.z2_low == doctest::Approx(-0.9428090415820634).epsilon(1e-14));
    CHECK(memoryless_boundary(-1.0).z2_high == doctest::Approx(-1.0));
    CHECK(memoryless_boundary(1.0).z2_low == doctest::Approx(1.0));
    CHECK_THROWS_AS(memoryless_boundary(3.0 * std::sqrt(2.0) / 4.0), NumericalRangeError);
  }

  TEST_CASE("boundary roots satisfy the region equality") {
    const double s = std::sqrt(9.0 / 8.0);
    for (double z1 : {-0.8, -0.3, 0.0, 0.25, 0.9}) {
      const auto b = memoryless_boundary(z1);
      for (double z2 : {b.z2_high, b.z2_low}) {
        if (std::abs(z2) > 1.0) continue;
        CHECK(z1 * z2 + s * std::abs(z1 - z2) == doctest::Approx(1.0).epsilon(1e-12));
      }
      CHECK_FALSE(memoryless_entanglement_possible(z1, z1));
    }
    CHECK(memoryless_entanglement_possible(0.0, -1.0));
    CHECK_FALSE(memoryless_entanglement_possible(0.0, -0.9));
  }

  TEST_CASE("boundary couplings give zero margin") {
    for (double z1 : {-0.5, 0.0, 0.4}) {
      const auto b = memoryless_boundary(z1);
      const auto pairs = boundary_couplings(z1);
      REQUIRE(pairs.size() == 2);
      // + branch pairs with z2_high, - branch with z2_low
      const double z2s[] = {b.z2_high, b.z2_low};
      for (int k = 0; k < 2; ++k) {
        const auto a = analytic_memoryless_steady_state(z1, z2s[k], pairs[k].first, pairs[k].second);
        CHECK(std::abs(concurrence_margin(a.rho.matrix())) < 1e-8);
      }
    }
    const auto z0 = boundary_couplings(0.0);
    CHECK(z0[0].first == doctest::Approx(std::sqrt(2.0)));
    CHECK(z0[0].second == doctest::Approx(3.0 * std::sqrt(2.0)));
  }

  TEST_CASE("C_max at p = 0 on either side of the boundary") {
    CHECK(maximize_concurrence(0.0, -0.9, 0.0).c_max == 0.0);
    const auto r = maximize_concurrence(0.0, -1.0, 0.0);
    CHECK(r.c_max > 0.0);
    CHECK(r.c_max <= 1.0);
    CHECK(r.n_starts >= 20);
  }

  TEST_CASE("C_max is reproducible and attained") {
    SearchOptions opt;
    opt.seed = 99;
    const auto a = maximize_concurrence(1.0, -1.0, 0.0, opt);
    const auto b = maximize_concurrence(1.0, -1.0, 0.0, opt);
    CHECK(a.c_max == b.c_max);
    CHECK(a.best_params.gamma1 == b.best_params.gamma1);
    CHECK(std::abs(evaluate_couplings(a.best_params).concurrence - a.c_max) <= 1e-8);
    // ellipse peak: C = 1/4 (1/sqrt5 ... ) closed form (sqrt5 - 1)/4
    CHECK(a.c_max == doctest::Approx((std::sqrt(5.0) - 1.0) / 4.0).epsilon(1e-6));
  }

  TEST_CASE("maximal heat current at p = 0") {
    const auto r = maximize_heat_current(0.0, -1.0, 0.0);
    CHECK(std::abs(r.q_dot_at_best) == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(r.best_params.gamma1 == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(r.best_params.gamma2 == doctest::Approx(2.0).epsilon(1e-3));
  }

  TEST_CASE("memoryless region at z = (0, -1)") {
    RegionOptions opt;
    opt.n_samples = 2000;
    const auto region = sample_cq_region(0.0, -1.0, 0.0, opt);
    double top = 0.0;
    for (const auto& pt : region.points) {
      top = std::max(top, pt.q_abs);
      CHECK(pt.concurrence >= 0.0);
      CHECK(pt.concurrence <= 1.0);
      // critical condition holds pointwise
      const auto a = analytic_memoryless_steady_state(pt.params.z1, pt.params.z2, pt.params.gamma1, pt.params.gamma2);
      CHECK(critical_entanglement_condition(a.rho, pt.q_abs) == (pt.concurrence > 0.0));
    }
    CHECK(top <= 0.25 + 1e-9);
    CHECK_FALSE(detect_overhang(region).has_value());
    // hulls enclose every point
    for (const auto& pt : region.points) {
      const int b = region.bin_of(pt.q_abs);
      CHECK(pt.concurrence <= region.hull_upper[static_cast<std::size_t>(b)]);
      CHECK(pt.concurrence >= region.hull_lower[static_cast<std::size_t>(b)]);
    }
  }

  TEST_CASE("memoryless region at z = (1, -1) has an overhang") {
    RegionOptions opt;
    opt.n_samples = 2000;
    const auto region = sample_cq_region(1.0, -1.0, 0.0, opt);
    const auto over = detect_overhang(region);
    REQUIRE(over.has_value());
    CHECK(over->lo == doctest::Approx(0.4).epsilon(0.02));
    CHECK(over->hi == doctest::Approx(0.5).epsilon(0.02));
  }

  TEST_CASE("region sampling is reproducible") {
    RegionOptions opt;
    opt.n_samples = 1000;
    opt.refine = false;
    opt.threads = 1;
    const auto a = sample_cq_region(0.0, -1.0, 0.0, opt);
    opt.threads = 3;
    const auto b = sample_cq_region(0.0, -1.0, 0.0, opt);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t k = 0; k < a.points.size(); ++k) CHECK(a.points[k].q_abs == b.points[k].q_abs);
    CHECK_THROWS_AS(sample_cq_region(0.0, -1.0, 0.0, RegionOptions{.n_samples = 10}), ParameterError);
  }

  TEST_CASE("critical heat currents at p = 0") {
    const auto iv = critical_heat_currents(0.0, -1.0, 0.0);
    REQUIRE(iv.has_value());
    CHECK(iv->lo > 0.0);
    CHECK(iv->lo < iv->hi);
    CHECK(iv->hi < 0.25);
    const auto with_memory = critical_heat_currents(0.0, -1.0, 1.0);
    REQUIRE(with_memory.has_value());
    CHECK(with_memory->lo <= iv->lo + 1e-3);
    CHECK(with_memory->hi >= iv->hi - 1e-3);
    CHECK_FALSE(critical_heat_currents(-0.4, -0.4, 0.0).has_value());
    CHECK_FALSE(critical_heat_currents(-0.4, -0.4, 1.0).has_value());
  }

  TEST_CASE("z axis is symmetric") {
    const auto z = z_axis(41);
    REQUIRE(z.size() == 41);
    CHECK(z.front() == -1.0);
    CHECK(z.back() == 1.0);
    CHECK(z[20] == 0.0);
    for (std::size_t k = 0; k < z.size(); ++k) CHECK(z[k] == -z[z.size() - 1 - k]);
  }

  TEST_CASE("C_max map does not depend on the thread count") {
    const auto z = z_axis(2);
    SearchOptions opt;
    opt.seed = 5;
    const auto a = cmax_map(1.0, z, z, opt, 1);
    const auto b = cmax_map(1.0, z, z, opt, 3);
    REQUIRE(a.size() == 4);
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(a[k].z1 == b[k].z1);
      CHECK(a[k].z2 == b[k].z2);
      CHECK(a[k].result.c_max == b[k].result.c_max);
    }
    CHECK(a[0].z1 == -1.0);
    CHECK(a[1].z1 == -1.0);
    CHECK(a[1].z2 == 1.0);
    CHECK(a[0].result.c_max == 0.0);
    CHECK(a[1].result.c_max > 0.4);
  }
}
