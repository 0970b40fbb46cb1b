// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "giniflow/density.hpp"
#include "giniflow/grid.hpp"
#include "giniflow/rng.hpp"

namespace giniflow {

// Binary exchange rule. sample(x, y, rng) is the amount paid to the agent
// holding x (the partner receives the negative).
struct TransactionKernel {
    std::string name;
    std::function<double(double, double)> phi;
    std::function<double(double, double, Rng&)> sample;
};

// phi = min(x, y)^2, outcome +-min(x, y) on a fair coin.
TransactionKernel yard_sale_kernel();
// Outcome uniform on (-m, m), m = min(x, y); phi = m^2 / 3.
TransactionKernel uniform_outcome_kernel();
// phi = c^2 everywhere, outcome +-c. Not degenerate at zero wealth, so it
// breaks positivity in the agent model; used as a constant-coefficient probe
// for the PDE.
TransactionKernel constant_kernel(double c);

// "yard-sale", "uniform-outcome".
TransactionKernel kernel_by_name(std::string_view name);
std::vector<std::string> kernel_names();

struct KernelValidation {
    double symmetry_defect = 0.0;      // max |phi(x,y) - phi(y,x)|
    double max_abs_z = 0.0;            // max |mean| / sqrt(max(phi, m2) / n)
    double max_second_moment_rel = 0.0;// max |m2 - phi| / max(phi, tiny)
    double max_second_moment_sigma = 0.0;  // max |m2 - phi| in standard errors
    std::size_t support_violations = 0;    // |sample| > min(x, y)
    double degeneracy_ratio = 0.0;     // phi(1e-8, 5) / phi(1, 5)
    bool symmetric = false, unbiased = false, second_moment = false, supported = false,
         degenerate = false;
    bool pass() const { return symmetric && unbiased && second_moment && supported && degenerate; }
};

// Deterministic lattice {0.1, 0.5, 1, 2, 5}^2, n_samples draws per lattice
// point, 4 sigma tolerance on the statistical checks.
KernelValidation validate_kernel(const TransactionKernel& k, std::size_t n_samples, Rng& rng);

// D_i = (gamma / 2) * integrate(y -> phi(w_i, y) rho(y)), gamma in (0, 1]. phi evaluated on the fly.
std::vector<double> diffusion_coefficient(const TransactionKernel& k, const DensityField& rho,
                                          double gamma);

// Yard-sale only: D = gamma/2 [ sum_{j<=i} q_j w_j^2 rho_j + w_i^2 sum_{j>i} q_j rho_j ],
// the same trapezoid sum as the generic form evaluated in O(n). Accepts any sign.
std::vector<double> yard_sale_diffusion(std::span<const double> rho, const Grid& g, double gamma);

// Linear map rho -> D used inside the time loop. Above cache_threshold nodes
// the matrix K_ij = gamma/2 phi(w_i, w_j) q_j is stored and applied with the
// SIMD mat-vec; below it phi is evaluated on the fly.
class DiffusionOperator {
public:
    static constexpr std::size_t kDefaultCacheThreshold = 256;

    DiffusionOperator(const TransactionKernel& k, const Grid& g, double gamma,
                      std::size_t cache_threshold = kDefaultCacheThreshold);

    void apply(std::span<const double> rho, std::span<double> out) const;
    std::vector<double> apply(std::span<const double> rho) const;
    bool cached() const { return !matrix_.empty(); }
    const Grid& grid() const { return grid_; }
    double gamma() const { return gamma_; }

private:
    TransactionKernel kernel_;
    Grid grid_;
    double gamma_;
    std::vector<double> matrix_;
};

// (0, 1) for the dynamics. D is linear in gamma, so the coefficient
// evaluators also take gamma = 1.
void check_gamma(double gamma, bool allow_one = false);

}  // namespace giniflow
