// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "giniflow/density.hpp"
#include "giniflow/exchange.hpp"
#include "giniflow/meanfield.hpp"
#include "giniflow/simd.hpp"

using namespace giniflow;

namespace {

std::vector<double> randoms(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = U(rng);
    return v;
}

struct BackendGuard {
    simd::Backend saved = simd::current_backend();
    ~BackendGuard() { simd::set_backend(saved); }
};

}  // namespace

TEST_CASE("scalar kernels against direct loops") {
    const auto& k = simd::scalar_kernels();
    for (std::size_t n : {1, 3, 4, 7, 8, 33, 400}) {
        const auto a = randoms(n, n), b = randoms(n, n + 1);
        double ref = 0.0;
        for (std::size_t i = 0; i < n; ++i) ref += a[i] * b[i];
        CHECK(k.dot(a.data(), b.data(), n) == ref);
    }
    const std::size_t rows = 5, cols = 9;
    const auto A = randoms(rows * cols, 3), x = randoms(cols, 4);
    std::vector<double> y(rows);
    k.matvec(A.data(), x.data(), y.data(), rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < cols; ++c) s += A[r * cols + c] * x[c];
        CHECK(y[r] == doctest::Approx(s).epsilon(1e-15));
    }
}

TEST_CASE("AVX2 kernels match the scalar reference") {
    if (!simd::avx2_supported()) {
        MESSAGE("AVX2 not available on this machine; equivalence not exercised");
        CHECK_THROWS(simd::avx2_kernels());
        return;
    }
    const auto& s = simd::scalar_kernels();
    const auto& v = simd::avx2_kernels();
    CHECK(v.backend == simd::Backend::Avx2);
    for (std::size_t n : {1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 64, 399, 400, 1001}) {
        const auto a = randoms(n, 10 * n), b = randoms(n, 10 * n + 1);
        double mag = 0.0;
        for (std::size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);
        CHECK(std::abs(v.dot(a.data(), b.data(), n) - s.dot(a.data(), b.data(), n)) <=
              4.0 * n * 1.2e-16 * mag);

        if (n >= 3) {
            const auto phi = randoms(n, 10 * n + 2), coef = randoms(n, 10 * n + 3);
            std::vector<double> o1(a), o2(a);
            s.flux_update(a.data(), phi.data(), coef.data(), o1.data(), n);
            v.flux_update(a.data(), phi.data(), coef.data(), o2.data(), n);
            CHECK(o1 == o2);  // bitwise
        }
    }
    for (std::size_t rows : {1, 3, 8}) {
        for (std::size_t cols : {1, 4, 13, 400}) {
            const auto A = randoms(rows * cols, rows + cols), x = randoms(cols, 99);
            std::vector<double> y1(rows), y2(rows);
            s.matvec(A.data(), x.data(), y1.data(), rows, cols);
            v.matvec(A.data(), x.data(), y2.data(), rows, cols);
            for (std::size_t r = 0; r < rows; ++r) CHECK(std::abs(y1[r] - y2[r]) < 1e-13 * cols);
        }
    }
}

TEST_CASE("solver output is independent of the backend within roundoff") {
    BackendGuard guard;
    const Grid g(20.0, 300);
    const auto rho = exponential_density(g);
    SchemeConfig sc;
    sc.T = 0.5;
    simd::set_backend(simd::Backend::Scalar);
    CHECK(simd::current_backend() == simd::Backend::Scalar);
    const auto a = solve(rho, uniform_outcome_kernel(), 0.1, sc);
    if (simd::avx2_supported()) {
        simd::set_backend(simd::Backend::Avx2);
        const auto b = solve(rho, uniform_outcome_kernel(), 0.1, sc);
        REQUIRE(a.gini.size() == b.gini.size());
        for (std::size_t j = 0; j < a.gini.size(); ++j)
            CHECK(a.gini[j] == doctest::Approx(b.gini[j]).epsilon(1e-12));
    }
    CHECK(simd::backend_name(simd::Backend::Scalar) == "scalar");
    CHECK(simd::backend_name(simd::Backend::Avx2) == "avx2");
}
