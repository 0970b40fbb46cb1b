// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "giniflow/exchange.hpp"
#include "giniflow/grid.hpp"
#include "giniflow/meanfield.hpp"
#include "giniflow/rng.hpp"

namespace giniflow {

// Removes the trapezoid-L2 projection of h onto span{1, w}.
std::vector<double> project_compatible(std::span<const double> h, const Grid& g);

struct MetricSolveResult {
    std::vector<double> u;  // second derivative of the potential; (w u)'' = h
    std::vector<double> v;  // w * u before the weight floor
    double norm_sq = 0.0;   // sum q w u^2 = sum q v^2 / w
    double compat_m0 = 0.0; // |int h|
    double compat_m1 = 0.0; // |int w h|
    bool floor_active_interior = false;
};

// Weighted biharmonic problem (w u)'' = h, u = u' = 0 at both ends.
// v = w u is the discrete double antiderivative
//   v_i = sum_{k<i} q_k (x_i - x_k) h_k,
// which inverts the solver's flux divergence exactly, so v_{n-1} = 0 and
// v_1 - v_0 = 0 up to the compatibility residual. The weight is floored at
// rel_floor * max(w) before the division.
MetricSolveResult solve_weighted_biharmonic(std::span<const double> w, std::span<const double> h,
                                            const Grid& g, double rel_floor = 1e-10);

double dual_norm(std::span<const double> w, std::span<const double> h, const Grid& g);
double dual_inner_product(std::span<const double> w, std::span<const double> f,
                          std::span<const double> gdat, const Grid& g);

// psi_i = sum_{k<i} q_k (x_i - x_k) u_k, so psi(0) = psi'(0) = 0.
std::vector<double> double_antiderivative(std::span<const double> u, const Grid& g);

struct PairingForms {
    double weighted;  // int w u_f u_g
    double f_phi;     // int f phi_g
    double g_psi;     // int g psi_f
};
PairingForms pairing_forms(std::span<const double> w, std::span<const double> f,
                           std::span<const double> gdat, const Grid& g);

// flux_divergence(D * second_derivative(dF)), the end values of the inner
// product pinned to 0 as in the solver.
std::vector<double> cd_gradient(std::span<const double> dF, std::span<const double> D,
                                const Grid& g);

struct GradientFlowReport {
    std::vector<double> t;
    std::vector<double> residual;        // ||rho_dot - grad|| / ||rho_dot||
    std::vector<double> energy_defect;   // |dGini/dt - 2 ||rho_dot||^2| / |dGini/dt|
    std::vector<double> dgini_dt;
    std::vector<double> norm_sq;
    std::vector<double> richardson;      // ||rho_dot(2 dt) - rho_dot(dt)|| / ||rho_dot(dt)||
    double median_residual = 0.0;
    double median_energy_defect = 0.0;
};

// Needs at least 5 snapshots. Throws std::runtime_error when the snapshot
// cadence is too coarse (median Richardson ratio above max_richardson).
GradientFlowReport verify_gradient_flow(const PdeTrajectory& tr, const TransactionKernel& k,
                                        double gamma, double max_richardson = 0.1);

// max_t |int eta rho_t - int eta rho_0| over the stored snapshots. eta must
// be affine (the harmonic functions in one dimension).
double conserved_quantities_check(const PdeTrajectory& tr, std::span<const double> eta);

enum class WeightMode { DiffusionOfRho, Rho };

struct CurveAction {
    double action = 0.0;  // sum dt ||mu_dot||^2
    double length = 0.0;  // sum dt ||mu_dot||
    std::vector<double> segment_norm;
};

// Midpoint rule over the segments of a sampled path; the weight is the
// midpoint density (WeightMode::Rho) or D of it (needs op).
CurveAction curve_action(const std::vector<std::vector<double>>& path,
                         std::span<const double> times, const Grid& g, WeightMode mode,
                         const DiffusionOperator* op = nullptr);

// K + 1 points of (1 - t) a + t b, t = j / K.
std::vector<std::vector<double>> linear_path(std::span<const double> a, std::span<const double> b,
                                             std::size_t K);

// Random M1 density on g: floor plus 2-4 Gaussian bumps, tilted to m0 = m1 = 1
// and resampled until strictly positive.
std::vector<double> random_m1_density(const Grid& g, Rng& rng);

struct TransportReport {
    std::size_t trials = 0;
    std::size_t violations_a = 0, violations_b = 0, violations_c = 0, violations_d = 0;
    double max_slack_a = 0.0, max_slack_b = 0.0, max_slack_c = 0.0, max_slack_d = 0.0;
    std::size_t sqrt_action_exceeds_b = 0;  // linear sqrt(action) above 2 ||.||_lambda
    double equality_identity = 0.0;  // |norm(mu, f) - norm(mu, f)| at beta = 1
    double equality_scaling = 0.0;   // max relative gap at w -> beta w, beta in {0.25, 4}
    double tol = 1e-8;
    bool pass() const {
        return violations_a + violations_b + violations_c + violations_d == 0 &&
               equality_identity <= 1e-12 && equality_scaling <= 1e-12;
    }
};

// Densities on [0, 3] with n = 301; K = 64 slices on the linear curve.
// (a) norm(nu, f) <= beta^{-1/2} norm(lambda, f), beta = min nu / lambda
// (b) length of the linear curve <= 2 ||lambda - nu||_lambda
// (c) sqrt(action) <= alpha^{-1/2} ||nu - lambda||_dx, alpha = common lower bound
// (d) C^{-1/2} ||nu - lambda||_dx <= sqrt(action), C = common upper bound
TransportReport transport_inequality_suite(Rng& rng, std::size_t n_trials, double tol = 1e-8);

struct FourthMomentReport {
    std::size_t segments = 0;
    std::size_t violations = 0;
    double max_ratio = 0.0;              // |d sqrt(m4)/dt| / (6 ||mu_dot||), where defined
    double max_identity_rel = 0.0;       // discrete identity, relative to int x^4 |mu_dot|
    double max_continuum_identity_rel = 0.0;  // without the 2 h^2 int v term
};

// Per segment: |d sqrt(m4)/dt| <= 6 ||mu_dot||_{rho_mid} + tol, and
// int x^4 mu_dot = 12 int x^2 v + 2 h^2 int v with v = rho_mid u.
FourthMomentReport fourth_moment_check(const std::vector<std::vector<double>>& path,
                                       std::span<const double> times, const Grid& g,
                                       double tol = 1e-8);

}  // namespace giniflow
