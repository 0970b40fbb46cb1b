// SPDX-License-Identifier: Apache-2.0
#include "giniflow/gini.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace giniflow {

double scaled_gini(std::span<const double> rho, const Grid& g) {
    require_size(rho, g, "scaled_gini");
    const auto& q = g.weights();
    double suffix = 0.0, acc = 0.0;
    for (std::size_t i = rho.size(); i-- > 0;) {
        const double a = q[i] * rho[i];
        acc += g.node(i) * a * (a + 2.0 * suffix);
        suffix += a;
    }
    return -0.5 * acc;
}

double scaled_gini(const DensityField& rho) { return scaled_gini(rho.span(), rho.grid()); }

double gini_coefficient(const DensityField& rho, double m1_tol) {
    if (!rho.in_m1(m1_tol))
        throw std::domain_error("gini_coefficient: density not in M1 (m0 = " +
                                std::to_string(rho.m0()) + ", m1 = " + std::to_string(rho.m1()) +
                                ")");
    return 2.0 * scaled_gini(rho) + 1.0;
}

std::vector<double> frechet_gini(std::span<const double> rho, const Grid& g) {
    require_size(rho, g, "frechet_gini");
    const std::size_t n = rho.size();
    const double h = g.h();
    const auto tail = tail_integral(rho, g);
    std::vector<double> out(n);
    double head = 0.0;  // int_0^{w_i} y rho(y) dy, exact per cell for linear rho
    out[0] = -(g.node(0) * tail[0]);
    for (std::size_t i = 1; i < n; ++i) {
        const double x0 = g.node(i - 1), x1 = g.node(i);
        const double r0 = rho[i - 1], r1 = rho[i];
        head += h / 6.0 * (2.0 * x0 * r0 + x0 * r1 + x1 * r0 + 2.0 * x1 * r1);
        out[i] = -(head + x1 * tail[i]);
    }
    return out;
}

double lemma_residual(std::span<const double> rho, const Grid& g) {
    const auto d2 = second_derivative(frechet_gini(rho, g), g);
    double r = 0.0;
    for (std::size_t i = 1; i + 1 < rho.size(); ++i) r = std::max(r, std::abs(d2[i] - rho[i]));
    return r;
}

GiniReport gini_report(const DensityField& rho) {
    GiniReport r;
    r.G = scaled_gini(rho);
    r.gini = gini_coefficient(rho);
    r.frechet = frechet_gini(rho.span(), rho.grid());
    r.lemma_residual = lemma_residual(rho.span(), rho.grid());
    return r;
}

}  // namespace giniflow
