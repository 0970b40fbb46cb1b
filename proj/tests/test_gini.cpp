// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include <doctest.h>

#include "giniflow/gini.hpp"
#include "giniflow/metric.hpp"
#include "giniflow/rng.hpp"
#include "oracles.hpp"

using namespace giniflow;

TEST_CASE("scaled gini against the O(n^2) double sum") {
    SUBCASE("exponential, n = 800") {
        const Grid g(20.0, 800);
        const auto e = exponential_density(g);
        const double ref = oracle::scaled_gini(e.values(), 20.0);
        CHECK(scaled_gini(e) == doctest::Approx(ref).epsilon(1e-12));
        CHECK(std::abs(scaled_gini(e) + 0.25) < 1e-3);
    }
    SUBCASE("uniform on [0,2]") {
        const Grid g(2.0, 401);
        const DensityField u(g, std::vector<double>(401, 0.5));
        CHECK(scaled_gini(u) == doctest::Approx(oracle::scaled_gini(u.values(), 2.0)).epsilon(1e-12));
        CHECK(std::abs(scaled_gini(u) + 1.0 / 3.0) < 1e-3);
    }
    SUBCASE("narrow bump at 1") {
        const Grid g(4.0, 2001);
        const auto b = bump_density(g, 1.0, 0.02);
        CHECK(std::abs(scaled_gini(b) + 0.5) < 0.02);
    }
    SUBCASE("range over random M1 densities") {
        const Grid g(3.0, 301);
        Rng rng = make_stream(21, "fuzz");
        for (int t = 0; t < 25; ++t) {
            const auto r = random_m1_density(g, rng);
            const double G = scaled_gini(r, g);
            CHECK(G >= -0.5);
            CHECK(G < 0.0);
            CHECK(G == doctest::Approx(oracle::scaled_gini(r, 3.0)).epsilon(1e-12));
        }
    }
}

TEST_CASE("gini coefficient") {
    const Grid g(20.0, 800);
    CHECK(gini_coefficient(exponential_density(g)) == doctest::Approx(0.5).epsilon(4e-3));
    const Grid g2(2.0, 401);
    CHECK(gini_coefficient(DensityField(g2, std::vector<double>(401, 0.5))) ==
          doctest::Approx(1.0 / 3.0).epsilon(6e-3));
    const Grid g3(4.0, 4001);
    CHECK(std::abs(gini_coefficient(bump_density(g3, 1.0, 0.005))) < 5e-3);
    CHECK_THROWS_AS(gini_coefficient(DensityField(g2, std::vector<double>(401, 0.25))),
                    std::domain_error);
}

TEST_CASE("frechet_gini") {
    SUBCASE("zero density") {
        const Grid g(3.0, 31);
        for (double v : frechet_gini(std::vector<double>(31, 0.0), g)) CHECK(v == 0.0);
    }
    SUBCASE("uniform on [0,2] at x = 2") {
        const Grid g(2.0, 201);
        const auto f = frechet_gini(std::vector<double>(201, 0.5), g);
        CHECK(f.back() == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(f.front() == 0.0);
    }
    SUBCASE("exact for the interpolant: refined quadrature oracle") {
        const Grid g(20.0, 201);
        const auto e = exponential_density(g);
        const auto ref = oracle::frechet_gini_fine(e.values(), 20.0, 64);
        CHECK(oracle::max_abs_diff(frechet_gini(e.values(), g), ref) < 1e-5);
    }
    SUBCASE("matches the numerical variation of scaled_gini") {
        const Grid g(20.0, 1001);
        for (const auto& r : {exponential_density(g), bump_density(g, 1.0, 0.4)}) {
            const auto num = numerical_frechet(
                [&](std::span<const double> x) { return scaled_gini(x, g); }, r.values(), g);
            CHECK(oracle::max_abs_diff(num, frechet_gini(r.values(), g)) < 1e-4);
        }
    }
}

TEST_CASE("second derivative of frechet_gini recovers rho") {
    SUBCASE("zero") {
        const Grid g(3.0, 31);
        CHECK(lemma_residual(std::vector<double>(31, 0.0), g) == 0.0);
    }
    SUBCASE("order two under refinement") {
        double prev = 0.0, prev_h = 0.0;
        for (std::size_t n : {200, 400, 800}) {
            const Grid g(20.0, n);
            const double r = lemma_residual(exponential_density(g).values(), g);
            if (prev > 0.0) {
                const double p = std::log(prev / r) / std::log(prev_h / g.h());
                CHECK(p == doctest::Approx(2.0).epsilon(0.1));
                CHECK(prev / r == doctest::Approx(4.0).epsilon(0.15));
            }
            prev = r;
            prev_h = g.h();
        }
    }
    SUBCASE("report") {
        const Grid g(20.0, 400);
        const auto rep = gini_report(exponential_density(g));
        CHECK(rep.gini == doctest::Approx(2.0 * rep.G + 1.0));
        CHECK(rep.frechet.size() == g.size());
        CHECK(rep.lemma_residual < 1e-3);
    }
}
