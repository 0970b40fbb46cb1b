// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "giniflow/density.hpp"
#include "giniflow/grid.hpp"

namespace giniflow {

// G = -1/2 sum_ij q_i q_j min(w_i, w_j) rho_i rho_j, evaluated in O(n) with a
// suffix sum. Takes raw values so perturbed (possibly negative) inputs work.
double scaled_gini(std::span<const double> rho, const Grid& g);
double scaled_gini(const DensityField& rho);

// 2 G + 1. Throws when m0 or m1 is off by more than m1_tol.
double gini_coefficient(const DensityField& rho, double m1_tol = 1e-3);

// -int min(x, y) rho(y) dy at every node, with rho the piecewise-linear
// interpolant: -[ int_0^x y rho + x int_x^W rho ], both integrals exact.
std::vector<double> frechet_gini(std::span<const double> rho, const Grid& g);

// max over interior nodes of |second_derivative(frechet_gini) - rho|
double lemma_residual(std::span<const double> rho, const Grid& g);

struct GiniReport {
    double G;
    double gini;
    std::vector<double> frechet;
    double lemma_residual;
};

GiniReport gini_report(const DensityField& rho);

}  // namespace giniflow
