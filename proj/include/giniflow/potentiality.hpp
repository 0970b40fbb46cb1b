// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "giniflow/grid.hpp"

namespace giniflow {

// A map rho -> L[rho](w) on a fixed grid, tested for being a Frechet derivative.
struct OperatorField {
    std::string name;
    std::function<std::vector<double>(std::span<const double>)> eval;
    bool needs_positive = false;  // uses log(rho)
};

OperatorField constant_operator(const Grid& g, double value = 1.0);  // derivative of value * m0
OperatorField identity_operator(const Grid& g);                     // derivative of 1/2 int rho^2
OperatorField gini_operator(const Grid& g);                         // frechet_gini
// rho(w) * int rho^3: not a derivative of anything.
OperatorField cubic_mass_operator(const Grid& g);
// L + alpha
OperatorField shifted(OperatorField L, double alpha);
// Yard-sale with gamma = 1, both integration constants gauged to 0:
//   L[rho](w) = int_0^w D(y) d/dy log rho(y) dy + D(w).
OperatorField yard_sale_w2_operator(const Grid& g);
// Exploratory: int_0^w (1 / m(rho)) d/dy (rho D) dy for a user mobility m.
// No verdict is attached to its residual.
OperatorField mobility_operator(const Grid& g, std::function<double(double)> m);

// F[rho] = int_0^1 dr int L[r rho] rho, midpoint rule in r (n_r >= 8), trapezoid in w.
double frechet_antiderivative(const OperatorField& L, std::span<const double> rho, const Grid& g,
                              int n_r = 64);

struct ResidualOptions {
    int n_r = 64;
    double rel_eps = 1e-4;      // perturbation at node i is rel_eps * max(rho_i, eps_floor * max rho)
    double eps_floor = 1e-3;    // capped at 1e-2 * rho_i for log operators
    double mask_rel = 1e-9;     // nodes with rho < mask_rel * max rho are skipped
    double max_abs_log = 20.0;  // and, for log operators, |log rho| >= max_abs_log
};

struct PotentialityResidual {
    std::vector<double> residual;  // 0 where masked
    std::vector<bool> mask;        // true on admissible interior nodes
    double max_abs = 0.0;
};

// numerical_frechet(frechet_antiderivative(L)) - L[rho] on admissible interior nodes.
PotentialityResidual potentiality_residual(const OperatorField& L, std::span<const double> rho,
                                           const Grid& g, const ResidualOptions& opt = {});

struct YardSaleW2Report {
    std::vector<double> residual;
    std::vector<double> closed_form;            // 1/2 [t1 + (1 + log rho) D + t3]
    std::vector<double> closed_form_corrected;  // 1/2 [t1 + (1 - log rho) D + t3]
    std::vector<double> t1;                     // D[w, rho log rho]
    std::vector<double> D;                      // D[w, rho]
    std::vector<double> t3;                     // -(w / rho) (int_w rho)^2
    std::vector<bool> mask;
    double max_rel_diff = 0.0;            // against closed_form
    double max_rel_diff_corrected = 0.0;  // against closed_form_corrected
    double max_abs_closed_form = 0.0;
    double max_abs_closed_form_corrected = 0.0;
    // max |residual - corrected form without t3| / max(|residual|, 1e-2), pointwise
    double ablation_rel_diff = 0.0;
};

YardSaleW2Report yard_sale_w2_residual(std::span<const double> rho, const Grid& g,
                                       const ResidualOptions& opt = {});

}  // namespace giniflow
