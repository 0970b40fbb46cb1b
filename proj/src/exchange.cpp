// SPDX-License-Identifier: Apache-2.0
#include "giniflow/exchange.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "giniflow/simd.hpp"

namespace giniflow {

void check_gamma(double gamma, bool allow_one) {
    if (allow_one ? !(gamma > 0.0 && gamma <= 1.0) : !(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument(allow_one ? "gamma must lie in (0, 1]"
                                              : "gamma must lie in (0, 1)");
}

TransactionKernel yard_sale_kernel() {
    return {"yard-sale",
            [](double x, double y) {
                const double m = std::min(x, y);
                return m * m;
            },
            [](double x, double y, Rng& rng) {
                const double m = std::min(x, y);
                return (rng() >> 63) != 0 ? m : -m;
            }};
}

TransactionKernel uniform_outcome_kernel() {
    return {"uniform-outcome",
            [](double x, double y) {
                const double m = std::min(x, y);
                return m * m / 3.0;
            },
            [](double x, double y, Rng& rng) {
                const double m = std::min(x, y);
                // 53-bit uniform in [0, 1), mapped to (-m, m) with 0 excluded at the edges.
                const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
                return m * (2.0 * u - 1.0);
            }};
}

TransactionKernel constant_kernel(double c) {
    return {"constant",
            [c](double, double) { return c * c; },
            [c](double, double, Rng& rng) { return (rng() >> 63) != 0 ? c : -c; }};
}

std::vector<std::string> kernel_names() { return {"yard-sale", "uniform-outcome"}; }

TransactionKernel kernel_by_name(std::string_view name) {
    if (name == "yard-sale") return yard_sale_kernel();
    if (name == "uniform-outcome") return uniform_outcome_kernel();
    throw std::invalid_argument("unknown kernel '" + std::string(name) +
                                "' (known: yard-sale, uniform-outcome)");
}

KernelValidation validate_kernel(const TransactionKernel& k, std::size_t n_samples, Rng& rng) {
    if (n_samples < 10000) throw std::invalid_argument("validate_kernel: n_samples must be >= 1e4");
    static constexpr std::array<double, 5> lattice{0.1, 0.5, 1.0, 2.0, 5.0};
    constexpr double kSigma = 4.0;
    KernelValidation r;
    const double n = static_cast<double>(n_samples);
    bool unbiased = true, moment_ok = true;
    for (double x : lattice) {
        for (double y : lattice) {
            const double pxy = k.phi(x, y);
            r.symmetry_defect = std::max(r.symmetry_defect, std::abs(pxy - k.phi(y, x)));
            const double bound = std::min(x, y) * (1.0 + 4.0 * 0x1.0p-52);
            double s1 = 0.0, s2 = 0.0, s4 = 0.0;
            for (std::size_t s = 0; s < n_samples; ++s) {
                const double w = k.sample(x, y, rng);
                if (!(std::abs(w) <= bound)) ++r.support_violations;
                const double w2 = w * w;
                s1 += w;
                s2 += w2;
                s4 += w2 * w2;
            }
            const double mean = s1 / n, m2 = s2 / n, m4 = s4 / n;
            const double se_mean = std::sqrt(std::max(pxy, m2) / n);
            const double z = se_mean > 0.0 ? std::abs(mean) / se_mean
                                           : (mean == 0.0 ? 0.0 : INFINITY);
            r.max_abs_z = std::max(r.max_abs_z, z);
            if (z > kSigma) unbiased = false;

            const double diff = std::abs(m2 - pxy);
            const double se_m2 = std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
            // Roundoff allowance for samplers whose square is deterministic;
            // a running sum of n terms drifts by about n * eps.
            const double slack = 4.0 * n * 0x1.0p-52 * std::max(pxy, m2);
            const double sig = diff <= slack ? 0.0 : (se_m2 > 0.0 ? diff / se_m2 : INFINITY);
            r.max_second_moment_sigma = std::max(r.max_second_moment_sigma, sig);
            r.max_second_moment_rel =
                std::max(r.max_second_moment_rel, diff / std::max(pxy, 1e-300));
            if (sig > kSigma) moment_ok = false;
        }
    }
    const double base = k.phi(1.0, 5.0);
    r.degeneracy_ratio = base > 0.0 ? k.phi(1e-8, 5.0) / base : INFINITY;
    r.symmetric = r.symmetry_defect == 0.0;
    r.unbiased = unbiased;
    r.second_moment = moment_ok;
    r.supported = r.support_violations == 0;
    r.degenerate = r.degeneracy_ratio <= 1e-6;
    return r;
}

std::vector<double> diffusion_coefficient(const TransactionKernel& k, const DensityField& rho,
                                          double gamma) {
    check_gamma(gamma, true);
    const Grid& g = rho.grid();
    for (double v : rho.values())
        if (v < 0.0) throw std::invalid_argument("diffusion_coefficient: negative density");
    const std::size_t n = g.size();
    std::vector<double> D(n), f(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = g.node(i);
        for (std::size_t j = 0; j < n; ++j) f[j] = k.phi(wi, g.node(j)) * rho[j];
        D[i] = 0.5 * gamma * integrate(f, g);
    }
    return D;
}

std::vector<double> yard_sale_diffusion(std::span<const double> rho, const Grid& g, double gamma) {
    require_size(rho, g, "yard_sale_diffusion");
    const std::size_t n = g.size();
    const auto& q = g.weights();
    std::vector<double> tail(n + 1, 0.0);
    for (std::size_t j = n; j-- > 0;) tail[j] = tail[j + 1] + q[j] * rho[j];
    std::vector<double> D(n);
    double head = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = g.node(i);
        head += q[i] * w * w * rho[i];
        D[i] = 0.5 * gamma * (head + w * w * tail[i + 1]);
    }
    return D;
}

DiffusionOperator::DiffusionOperator(const TransactionKernel& k, const Grid& g, double gamma,
                                     std::size_t cache_threshold)
    : kernel_(k), grid_(g), gamma_(gamma) {
    check_gamma(gamma, true);
    const std::size_t n = g.size();
    if (n > cache_threshold) {
        matrix_.resize(n * n);
        const auto& q = g.weights();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                matrix_[i * n + j] = 0.5 * gamma * kernel_.phi(g.node(i), g.node(j)) * q[j];
    }
}

void DiffusionOperator::apply(std::span<const double> rho, std::span<double> out) const {
    require_size(rho, grid_, "DiffusionOperator");
    const std::size_t n = grid_.size();
    if (cached()) {
        simd::matvec(matrix_, rho, out);
        return;
    }
    const auto& q = grid_.weights();
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            acc += 0.5 * gamma_ * kernel_.phi(grid_.node(i), grid_.node(j)) * q[j] * rho[j];
        out[i] = acc;
    }
}

std::vector<double> DiffusionOperator::apply(std::span<const double> rho) const {
    std::vector<double> out(grid_.size());
    apply(rho, out);
    return out;
}

}  // namespace giniflow
