// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numbers>

#include <doctest.h>

#include "giniflow/gini.hpp"
#include "giniflow/meanfield.hpp"
#include "giniflow/metric.hpp"
#include "oracles.hpp"

using namespace giniflow;

namespace {

std::vector<double> random_compatible(const Grid& g, Rng& rng) {
    std::normal_distribution<double> N(0.0, 1.0);
    std::vector<double> h(g.size());
    const double a = N(rng), b = N(rng), c = N(rng);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.node(i) / g.w_max();
        h[i] = a * std::sin(3.0 * x) + b * std::cos(7.0 * x) + c * x * x * x;
    }
    return project_compatible(h, g);
}

double moment_of(const std::vector<double>& h, const Grid& g, int k) {
    return moment(h, g, k);
}

}  // namespace

TEST_CASE("project_compatible") {
    const Grid g(1.0, 201);
    SUBCASE("idempotent") {
        Rng rng = make_stream(1, "fuzz");
        const auto h = random_compatible(g, rng);
        CHECK(oracle::max_abs_diff(project_compatible(h, g), h) < 1e-12);
    }
    SUBCASE("constant maps to zero") {
        for (double v : project_compatible(std::vector<double>(201, 3.0), g))
            CHECK(std::abs(v) < 1e-12);
    }
    SUBCASE("x^2 maps to x^2 - x + 1/6") {
        std::vector<double> h(201);
        for (std::size_t i = 0; i < 201; ++i) h[i] = g.node(i) * g.node(i);
        const auto p = project_compatible(h, g);
        CHECK(std::abs(moment_of(p, g, 0)) < 1e-14);
        CHECK(std::abs(moment_of(p, g, 1)) < 1e-14);
        for (std::size_t i = 0; i < 201; ++i) {
            const double x = g.node(i);
            CHECK(std::abs(p[i] - (x * x - x + 1.0 / 6.0)) < 1e-4);
        }
    }
}

TEST_CASE("solve_weighted_biharmonic") {
    SUBCASE("zero datum") {
        const Grid g(1.0, 51);
        const auto r = solve_weighted_biharmonic(std::vector<double>(51, 2.0),
                                                 std::vector<double>(51, 0.0), g);
        for (double u : r.u) CHECK(u == 0.0);
        CHECK(r.norm_sq == 0.0);
    }
    SUBCASE("incompatible datum is rejected") {
        const Grid g(1.0, 51);
        CHECK_THROWS(solve_weighted_biharmonic(std::vector<double>(51, 1.0),
                                               std::vector<double>(51, 1.0), g));
        std::vector<double> w(51, 1.0);
        w[7] = -1.0;
        CHECK_THROWS(solve_weighted_biharmonic(w, std::vector<double>(51, 0.0), g));
    }
    SUBCASE("v is the direct double sum and inverts the flux divergence") {
        const Grid g(2.0, 101);
        Rng rng = make_stream(2, "fuzz");
        const auto h = random_compatible(g, rng);
        std::vector<double> w(101);
        for (std::size_t i = 0; i < 101; ++i) w[i] = 1.0 + g.node(i);
        const auto r = solve_weighted_biharmonic(w, h, g);
        CHECK(oracle::max_abs_diff(r.v, oracle::double_antiderivative(h, 2.0)) < 1e-12);
        CHECK(oracle::max_abs_diff(flux_divergence(r.v, g), h) < 1e-10);
        double ns = 0.0;
        for (std::size_t i = 0; i < 101; ++i) ns += g.weights()[i] * r.v[i] * r.v[i] / w[i];
        CHECK(r.norm_sq == doctest::Approx(ns).epsilon(1e-12));
    }
    SUBCASE("piecewise-quadratic potential is reproduced to roundoff") {
        // h is the discrete (w u)'' of a known w u; the solve must return it.
        const Grid g(1.0, 81);
        std::vector<double> v(81), w(81, 1.5);
        for (std::size_t i = 0; i < 81; ++i) {
            const double x = g.node(i);
            v[i] = x * x * (1 - x) * (1 - x);
        }
        const auto h = flux_divergence(v, g);
        const auto r = solve_weighted_biharmonic(w, h, g);
        for (std::size_t i = 0; i < 81; ++i) CHECK(std::abs(r.u[i] * w[i] - v[i]) < 1e-13);
    }
    SUBCASE("manufactured solution converges at second order") {
        const double pi = std::numbers::pi;
        double prev = 0.0, prev_h = 0.0;
        for (std::size_t n : {101, 201, 401}) {
            const Grid g(1.0, n);
            std::vector<double> w(n), h(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double x = g.node(i);
                w[i] = 1.0 + x;
                h[i] = 2 * pi * pi * (1 + x) * std::cos(2 * pi * x) + 2 * pi * std::sin(2 * pi * x);
            }
            const auto r = solve_weighted_biharmonic(w, project_compatible(h, g), g);
            double err = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                err = std::max(err, std::abs(r.u[i] - std::pow(std::sin(pi * g.node(i)), 2)));
            if (prev > 0.0)
                CHECK(std::log(prev / err) / std::log(prev_h / g.h()) ==
                      doctest::Approx(2.0).epsilon(0.1));
            prev = err;
            prev_h = g.h();
        }
    }
}

TEST_CASE("dual norm and inner product") {
    const Grid g(3.0, 151);
    Rng rng = make_stream(3, "fuzz");
    std::vector<double> w(151);
    for (std::size_t i = 0; i < 151; ++i) w[i] = 0.5 + std::exp(-g.node(i));
    SUBCASE("zero") { CHECK(dual_norm(w, std::vector<double>(151, 0.0), g) == 0.0); }
    SUBCASE("weight scaling") {
        const auto h = random_compatible(g, rng);
        const double base = dual_norm(w, h, g);
        for (double beta : {0.25, 4.0}) {
            auto bw = w;
            for (double& x : bw) x *= beta;
            CHECK(std::abs(dual_norm(bw, h, g) - base / std::sqrt(beta)) <= 1e-12 * base);
        }
    }
    SUBCASE("triangle inequality") {
        for (int t = 0; t < 100; ++t) {
            const auto a = random_compatible(g, rng);
            const auto b = random_compatible(g, rng);
            std::vector<double> s(151);
            for (std::size_t i = 0; i < 151; ++i) s[i] = a[i] + b[i];
            CHECK(dual_norm(w, s, g) <= dual_norm(w, a, g) + dual_norm(w, b, g) + 1e-12);
        }
    }
    SUBCASE("polarization, symmetry and the three pairing forms") {
        for (int t = 0; t < 20; ++t) {
            const auto f = random_compatible(g, rng);
            const auto h = random_compatible(g, rng);
            const double n = dual_norm(w, f, g);
            CHECK(dual_inner_product(w, f, f, g) == doctest::Approx(n * n).epsilon(1e-12));
            CHECK(std::abs(dual_inner_product(w, f, h, g) - dual_inner_product(w, h, f, g)) <
                  1e-12);
            const auto p = pairing_forms(w, f, h, g);
            const double scale = dual_norm(w, f, g) * dual_norm(w, h, g);
            CHECK(std::abs(p.weighted - p.f_phi) < 1e-6 * scale);
            CHECK(std::abs(p.weighted - p.g_psi) < 1e-6 * scale);
        }
    }
}

TEST_CASE("cd_gradient") {
    SUBCASE("affine derivative gives zero") {
        const Grid g(2.0, 101);
        std::vector<double> dF(101), D(101, 1.0);
        for (std::size_t i = 0; i < 101; ++i) dF[i] = 3.0 - 2.0 * g.node(i);
        // Roundoff only, amplified by 1 / h^4.
        const double tol = 1e3 * 0x1.0p-52 * 3.0 / std::pow(g.h(), 4);
        for (double v : cd_gradient(dF, D, g)) CHECK(std::abs(v) < tol);
    }
    SUBCASE("w^4 / 24 with unit weight gives 1 inside") {
        const Grid g(1.0, 201);
        std::vector<double> dF(201), D(201, 1.0);
        for (std::size_t i = 0; i < 201; ++i) dF[i] = std::pow(g.node(i), 4) / 24.0;
        const auto r = cd_gradient(dF, D, g);
        for (std::size_t i = 2; i + 2 < 201; ++i) CHECK(std::abs(r[i] - 1.0) < 1e-6);
    }
    SUBCASE("gini derivative reproduces the solver right-hand side") {
        double prev = 0.0;
        for (std::size_t n : {200, 400}) {
            const Grid g(20.0, n);
            const auto rho = exponential_density(g);
            const auto D = yard_sale_diffusion(rho.values(), g, 0.1);
            const auto grad = cd_gradient(frechet_gini(rho.values(), g), D, g);
            const auto rhs = pde_rhs(rho.values(), D, g);
            double err = 0.0;
            for (std::size_t i = 1; i + 1 < n; ++i) err = std::max(err, std::abs(grad[i] - rhs[i]));
            if (prev > 0.0) CHECK(prev / err > 3.0);
            prev = err;
        }
    }
}

TEST_CASE("gradient flow verification") {
    const Grid g(20.0, 200);
    SchemeConfig sc;
    sc.T = 2.0;
    sc.snapshot_every = 1;
    const auto tr = solve(exponential_density(g), yard_sale_kernel(), 0.1, sc);
    SUBCASE("residual and energy defect") {
        const auto r = verify_gradient_flow(tr, yard_sale_kernel(), 0.1);
        CHECK(r.median_residual < 2e-2);
        CHECK(r.median_energy_defect < 1e-2);
        for (double d : r.dgini_dt) CHECK(d >= 0.0);
    }
    SUBCASE("coarse cadence is refused") {
        SchemeConfig coarse = sc;
        coarse.snapshot_every = 60;
        const auto t2 = solve(exponential_density(g), yard_sale_kernel(), 0.1, coarse);
        if (t2.snapshots.size() >= 5)
            CHECK_THROWS(verify_gradient_flow(t2, yard_sale_kernel(), 0.1, 1e-6));
    }
    SUBCASE("static state") {
        PdeTrajectory st{g, 0.1, "yard-sale"};
        const auto z = std::vector<double>(g.size(), 0.0);
        for (int j = 0; j < 7; ++j) {
            st.snapshot_t.push_back(j * 0.1);
            st.snapshots.push_back(z);
        }
        const auto r = verify_gradient_flow(st, yard_sale_kernel(), 0.1);
        CHECK(r.median_residual == 0.0);
    }
    SUBCASE("conserved quantities") {
        std::vector<double> one(g.size(), 1.0), x = g.nodes(), aff(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) aff[i] = 2.0 * g.node(i) - 3.0;
        CHECK(conserved_quantities_check(tr, one) < 1e-10);
        CHECK(conserved_quantities_check(tr, x) < 1e-10);
        CHECK(conserved_quantities_check(tr, aff) < 1e-10);
        std::vector<double> sq(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) sq[i] = g.node(i) * g.node(i);
        CHECK_THROWS(conserved_quantities_check(tr, sq));
    }
    SUBCASE("action of the PDE path matches the energy identity") {
        const DiffusionOperator op(yard_sale_kernel(), g, 0.1);
        const auto a = curve_action(tr.snapshots, tr.snapshot_t, g, WeightMode::DiffusionOfRho, &op);
        // d Gini / dt = 2 ||rho_dot||^2, so the action is half the Gini increase.
        const double half_gain = 0.5 * (tr.gini.back() - tr.gini.front());
        CHECK(a.action == doctest::Approx(half_gain).epsilon(2e-2));
    }
}

TEST_CASE("curve action") {
    const Grid g(3.0, 301);
    Rng rng = make_stream(4, "fuzz");
    const auto a = random_m1_density(g, rng);
    const auto b = random_m1_density(g, rng);
    SUBCASE("constant path") {
        std::vector<std::vector<double>> path(5, a);
        const std::vector<double> t{0, 0.25, 0.5, 0.75, 1};
        CHECK(curve_action(path, t, g, WeightMode::Rho).action == 0.0);
        CHECK(fourth_moment_check(path, t, g).max_ratio == 0.0);
        CHECK(fourth_moment_check(path, t, g).violations == 0);
    }
    SUBCASE("K versus 2K slices") {
        auto times = [](std::size_t K) {
            std::vector<double> t(K + 1);
            for (std::size_t j = 0; j <= K; ++j) t[j] = static_cast<double>(j) / K;
            return t;
        };
        const double a16 = curve_action(linear_path(a, b, 16), times(16), g, WeightMode::Rho).action;
        const double a32 = curve_action(linear_path(a, b, 32), times(32), g, WeightMode::Rho).action;
        const double a64 = curve_action(linear_path(a, b, 64), times(64), g, WeightMode::Rho).action;
        CHECK(std::abs(a32 - a64) < std::abs(a16 - a32));
        CHECK(std::abs(a32 - a64) / a64 < 1e-2);
    }
}

TEST_CASE("transport inequalities") {
    Rng rng = make_stream(5, "fuzz");
    const auto r = transport_inequality_suite(rng, 100);
    CHECK(r.trials == 100);
    CHECK(r.violations_a == 0);
    CHECK(r.violations_b == 0);
    CHECK(r.violations_c == 0);
    CHECK(r.violations_d == 0);
    CHECK(r.equality_identity <= 1e-12);
    CHECK(r.equality_scaling <= 1e-12);
    CHECK(r.pass());
}

TEST_CASE("fourth-moment bound") {
    const Grid g(3.0, 301);
    Rng rng = make_stream(6, "fuzz");
    for (int p = 0; p < 5; ++p) {
        const auto a = random_m1_density(g, rng);
        const auto b = random_m1_density(g, rng);
        std::vector<double> t(9);
        for (std::size_t j = 0; j < 9; ++j) t[j] = j / 8.0;
        const auto f = fourth_moment_check(linear_path(a, b, 8), t, g);
        CHECK(f.violations == 0);
        CHECK(f.max_identity_rel < 1e-6);
        CHECK(f.segments == 8);
    }
}
