// SPDX-License-Identifier: Apache-2.0
#include "giniflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace giniflow {

Grid::Grid(double w_max, std::size_t n_cells) : w_max_(w_max) {
    if (!(w_max > 0.0) || !std::isfinite(w_max))
        throw std::invalid_argument("grid: w_max must be positive and finite");
    if (n_cells < 3)
        throw std::invalid_argument("grid: n_cells must be >= 3 (got " +
                                    std::to_string(n_cells) + ")");
    const double m = static_cast<double>(n_cells - 1);
    h_ = w_max / m;
    nodes_.resize(n_cells);
    weights_.assign(n_cells, h_);
    for (std::size_t i = 0; i < n_cells; ++i) nodes_[i] = w_max * static_cast<double>(i) / m;
    weights_.front() = 0.5 * h_;
    weights_.back() = 0.5 * h_;
}

void require_size(std::span<const double> f, const Grid& g, const char* what) {
    if (f.size() != g.size())
        throw std::invalid_argument(std::string(what) + ": expected " +
                                    std::to_string(g.size()) + " values, got " +
                                    std::to_string(f.size()));
}

namespace {

// Partial sums of (f_{i-1} + f_i) / 2 are scaled by w_max / (n-1) at the end,
// so constants integrate exactly and node coordinates are reproduced exactly.
double scale(const Grid& g, double s) {
    return g.w_max() * s / static_cast<double>(g.size() - 1);
}

}  // namespace

double integrate(std::span<const double> f, const Grid& g) {
    require_size(f, g, "integrate");
    double s = 0.0;
    for (std::size_t i = 1; i < f.size(); ++i) s += 0.5 * (f[i - 1] + f[i]);
    return scale(g, s);
}

std::vector<double> cumulative_integral(std::span<const double> f, const Grid& g) {
    require_size(f, g, "cumulative_integral");
    std::vector<double> out(f.size(), 0.0);
    double s = 0.0;
    for (std::size_t i = 1; i < f.size(); ++i) {
        s += 0.5 * (f[i - 1] + f[i]);
        out[i] = scale(g, s);
    }
    return out;
}

std::vector<double> tail_integral(std::span<const double> f, const Grid& g) {
    auto c = cumulative_integral(f, g);
    const double total = c.back();
    for (double& v : c) v = total - v;
    return c;
}

std::vector<double> second_derivative(std::span<const double> f, const Grid& g) {
    require_size(f, g, "second_derivative");
    const std::size_t n = f.size();
    const double ih2 = 1.0 / (g.h() * g.h());
    std::vector<double> out(n);
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (f[i - 1] - 2.0 * f[i] + f[i + 1]) * ih2;
    if (n == 3) {
        out[0] = out[1];
        out[2] = out[1];
        return out;
    }
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * ih2;
    out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) * ih2;
    return out;
}

std::vector<double> numerical_frechet(const Functional& F, std::span<const double> rho,
                                      const Grid& g, std::span<const double> eps) {
    require_size(rho, g, "numerical_frechet");
    require_size(eps, g, "numerical_frechet eps");
    std::vector<double> work(rho.begin(), rho.end());
    std::vector<double> out(rho.size());
    const auto& q = g.weights();
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const double e = eps[i];
        if (!(e > 0.0)) throw std::invalid_argument("numerical_frechet: eps must be > 0");
        work[i] = rho[i] + e;
        const double fp = F(work);
        work[i] = rho[i] - e;
        const double fm = F(work);
        work[i] = rho[i];
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw std::runtime_error("numerical_frechet: functional evaluation failed at node " +
                                     std::to_string(i));
        out[i] = (fp - fm) / (2.0 * e * q[i]);
    }
    return out;
}

std::vector<double> numerical_frechet(const Functional& F, std::span<const double> rho,
                                      const Grid& g, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("numerical_frechet: eps must be > 0");
    std::vector<double> e(rho.size(), eps);
    return numerical_frechet(F, rho, g, e);
}

std::vector<double> numerical_frechet(const Functional& F, std::span<const double> rho,
                                      const Grid& g) {
    double m = 0.0;
    for (double v : rho) m = std::max(m, std::abs(v));
    return numerical_frechet(F, rho, g, m > 0.0 ? 1e-5 * m : 1e-5);
}

}  // namespace giniflow
