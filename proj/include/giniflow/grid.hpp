// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace giniflow {

// Uniform mesh w_i = i * w_max / (n - 1) on [0, w_max].
class Grid {
public:
    Grid(double w_max, std::size_t n_cells);

    double w_max() const { return w_max_; }
    std::size_t size() const { return nodes_.size(); }
    double h() const { return h_; }
    double node(std::size_t i) const { return nodes_[i]; }
    const std::vector<double>& nodes() const { return nodes_; }
    // Trapezoid weights: h inside, h/2 at both ends.
    const std::vector<double>& weights() const { return weights_; }

    bool operator==(const Grid& o) const {
        return w_max_ == o.w_max_ && nodes_.size() == o.nodes_.size();
    }

private:
    double w_max_;
    double h_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

// Trapezoid rule. Equal to the last entry of cumulative_integral bit for bit.
double integrate(std::span<const double> f, const Grid& g);

// Running trapezoid sum with value 0 at node 0.
std::vector<double> cumulative_integral(std::span<const double> f, const Grid& g);

// Suffix integral R_i = int_{w_i}^{w_max} f, computed as integrate(f) - cumulative.
std::vector<double> tail_integral(std::span<const double> f, const Grid& g);

// Centered 3-point stencil inside; 4-point one-sided second-order stencils at
// the ends (3-point when n == 3).
std::vector<double> second_derivative(std::span<const double> f, const Grid& g);

using Functional = std::function<double(std::span<const double>)>;

// (F[rho + eps e_i] - F[rho - eps e_i]) / (2 eps q_i) at every node.
std::vector<double> numerical_frechet(const Functional& F, std::span<const double> rho,
                                      const Grid& g, double eps);
// Default eps = 1e-5 * max(rho) (1e-5 if rho vanishes).
std::vector<double> numerical_frechet(const Functional& F, std::span<const double> rho,
                                      const Grid& g);
// Per-node step sizes; eps[i] must be > 0.
std::vector<double> numerical_frechet(const Functional& F, std::span<const double> rho,
                                      const Grid& g, std::span<const double> eps);

void require_size(std::span<const double> f, const Grid& g, const char* what);

}  // namespace giniflow
