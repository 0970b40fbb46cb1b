// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "giniflow/density.hpp"
#include "giniflow/exchange.hpp"

namespace giniflow {

// Raised when the explicit scheme leaves its stability region (negative
// density beyond the clip tolerance, or blow-up).
class StabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SchemeConfig {
    std::optional<double> dt;  // empty: recompute safety * h^2 / (2 max D) every step
    double T = 5.0;
    double safety = 0.5;
    std::size_t snapshot_every = 0;  // 0: first and last state only
    double negative_tol = 1e-12;
    double blowup = 1e6;
};

void validate(const SchemeConfig& s);

double stable_dt(std::span<const double> D, const Grid& g, double safety, double T);
double stable_dt(const DensityField& rho, const TransactionKernel& k, double gamma, double safety,
                 double T);

// Conservative update with trapezoid control volumes:
//   q_i (rho_i' - rho_i) = dt (J_{i+1/2} - J_{i-1/2}),  J_{i+1/2} = (Phi_{i+1} - Phi_i) / h,
// Phi = D rho pinned to 0 at both end nodes, J = 0 on the outer faces.
std::vector<double> step_pde(std::span<const double> rho, std::span<const double> D,
                             const Grid& g, double dt);
std::vector<double> step_pde(const DensityField& rho, const TransactionKernel& k, double gamma,
                             double dt);

// Right-hand side of the scheme (the update divided by dt).
std::vector<double> pde_rhs(std::span<const double> rho, std::span<const double> D, const Grid& g);

// q-weighted divergence of the flux built from a nodal potential Psi, with
// Psi replaced by 0 at both end nodes. Shared by the solver and the metric code.
std::vector<double> flux_divergence(std::span<const double> Psi, const Grid& g);

struct PdeTrajectory {
    PdeTrajectory(Grid g, double gamma_, std::string kernel_)
        : grid(std::move(g)), gamma(gamma_), kernel(std::move(kernel_)) {}

    Grid grid;
    double gamma = 0.0;
    std::string kernel;
    std::vector<double> t, gini, m0, m1, m4;     // every step
    std::vector<double> snapshot_t;
    std::vector<std::vector<double>> snapshots;  // rho at snapshot_t
    std::size_t steps = 0;
    double min_density = 0.0;
    double tail_mass_end = 0.0;
};

// Requires rho0 in M1 within 1e-6.
PdeTrajectory solve(const DensityField& rho0, const TransactionKernel& k, double gamma,
                    const SchemeConfig& scheme);

}  // namespace giniflow
