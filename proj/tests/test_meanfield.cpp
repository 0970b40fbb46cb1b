// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "giniflow/gini.hpp"
#include "giniflow/meanfield.hpp"
#include "oracles.hpp"

using namespace giniflow;

TEST_CASE("stable dt") {
    const Grid g(1.0, 11);  // h = 0.1
    CHECK(stable_dt(std::vector<double>(11, 0.5), g, 1.0, 5.0) == doctest::Approx(0.01));
    CHECK(stable_dt(std::vector<double>(11, 0.0), g, 0.5, 5.0) == 5.0);
    const DensityField zero(g, std::vector<double>(11, 0.0));
    CHECK(stable_dt(zero, yard_sale_kernel(), 0.1, 0.5, 3.0) == 3.0);

    const Grid g4(20.0, 400);
    const auto e = exponential_density(g4);
    const auto D = oracle::yard_sale_D(e.values(), 20.0, 0.1);
    const double maxD = *std::max_element(D.begin(), D.end());
    CHECK(stable_dt(e, yard_sale_kernel(), 0.1, 1.0, 5.0) ==
          doctest::Approx(g4.h() * g4.h() / (2.0 * maxD)).epsilon(1e-12));
}

TEST_CASE("step_pde") {
    SUBCASE("zero density is a fixed point") {
        const Grid g(5.0, 51);
        const DensityField z(g, std::vector<double>(51, 0.0));
        const auto out = step_pde(z, yard_sale_kernel(), 0.1, 0.01);
        for (double v : out) CHECK(v == 0.0);
    }
    SUBCASE("constant kernel is an explicit heat step") {
        const Grid g(6.0, 121);
        const auto rho = bump_density(g, 1.0, 0.3);
        const double c = 0.7, gamma = 0.2;
        const auto k = constant_kernel(c);
        const auto D = diffusion_coefficient(k, rho, gamma);
        for (double d : D) CHECK(d == doctest::Approx(0.5 * gamma * c * c * rho.m0()));
        const double dt = 0.25 * g.h() * g.h() / D[0];
        const auto ref = oracle::fv_step(rho.values(), D, 6.0, dt);
        const auto got = step_pde(rho, k, gamma, dt);
        CHECK(oracle::max_abs_diff(got, ref) < 1e-14);
    }
    SUBCASE("yard-sale step against the finite-volume oracle") {
        const Grid g(20.0, 400);
        const auto rho = exponential_density(g);
        const auto D = oracle::yard_sale_D(rho.values(), 20.0, 0.1);
        const double dt = stable_dt(D, g, 0.5, 5.0);
        const auto ref = oracle::fv_step(rho.values(), D, 20.0, dt);
        CHECK(oracle::max_abs_diff(step_pde(rho, yard_sale_kernel(), 0.1, dt), ref) < 1e-13);
    }
    SUBCASE("mass and mean conserved to roundoff") {
        const Grid g(20.0, 400);
        const auto rho = exponential_density(g);
        const double dt = stable_dt(rho, yard_sale_kernel(), 0.1, 0.5, 5.0);
        const auto next = step_pde(rho, yard_sale_kernel(), 0.1, dt);
        CHECK(std::abs(moment(next, g, 0) - rho.m0()) < 1e-14);
        CHECK(std::abs(moment(next, g, 1) - rho.m1()) < 1e-14);
    }
    SUBCASE("flux divergence sums to zero against 1 and w") {
        const Grid g(3.0, 61);
        std::vector<double> psi(61);
        for (std::size_t i = 0; i < 61; ++i) psi[i] = std::sin(3.0 * g.node(i)) + 2.0;
        const auto d = flux_divergence(psi, g);
        CHECK(std::abs(integrate(d, g)) < 1e-12);
        std::vector<double> wd(61);
        for (std::size_t i = 0; i < 61; ++i) wd[i] = g.node(i) * d[i];
        CHECK(std::abs(integrate(wd, g)) < 1e-12);
    }
}

TEST_CASE("solve") {
    SchemeConfig sc;
    sc.T = 5.0;
    sc.snapshot_every = 10;
    const Grid g(20.0, 400);
    const auto tr = solve(exponential_density(g), yard_sale_kernel(), 0.1, sc);

    SUBCASE("gini nondecreasing and conservation") {
        for (std::size_t j = 1; j < tr.gini.size(); ++j) CHECK(tr.gini[j] - tr.gini[j - 1] >= -1e-10);
        CHECK(tr.gini.back() > tr.gini.front());
        for (std::size_t j = 0; j < tr.m0.size(); ++j) {
            CHECK(std::abs(tr.m0[j] - tr.m0[0]) < 1e-12);
            CHECK(std::abs(tr.m1[j] - tr.m1[0]) < 1e-12);
        }
        CHECK(tr.t.back() == doctest::Approx(5.0).epsilon(1e-14));
        CHECK(tr.snapshot_t.back() == tr.t.back());
        CHECK(tr.m4.size() == tr.t.size());
    }
    SUBCASE("recorded gini matches the direct sum at the final snapshot") {
        CHECK(tr.gini.back() ==
              doctest::Approx(2.0 * oracle::scaled_gini(tr.snapshots.back(), 20.0) + 1.0)
                  .epsilon(1e-12));
    }
    SUBCASE("fixed dt above the stability bound is rejected") {
        SchemeConfig bad = sc;
        bad.dt = 0.5;
        CHECK_THROWS_AS(solve(exponential_density(g), yard_sale_kernel(), 0.1, bad),
                        StabilityError);
    }
    SUBCASE("density outside M1 is rejected") {
        std::vector<double> spike(g.size(), 0.0);
        spike[1] = 1.0 / g.h();
        CHECK_THROWS(solve(DensityField(g, spike), yard_sale_kernel(), 0.1, sc));
    }
    SUBCASE("uniform-outcome kernel runs and conserves") {
        SchemeConfig s2 = sc;
        s2.T = 1.0;
        const Grid gs(20.0, 200);
        const auto t2 = solve(exponential_density(gs), uniform_outcome_kernel(), 0.1, s2);
        CHECK(std::abs(t2.m1.back() - t2.m1.front()) < 1e-12);
        CHECK(t2.gini.back() > t2.gini.front());
    }
}
