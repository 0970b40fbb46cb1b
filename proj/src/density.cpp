// SPDX-License-Identifier: Apache-2.0
#include "giniflow/density.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace giniflow {

double moment(std::span<const double> rho, const Grid& g, int k) {
    require_size(rho, g, "moment");
    std::vector<double> f(rho.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::pow(g.node(i), k) * rho[i];
    return integrate(f, g);
}

DensityField::DensityField(Grid grid, std::vector<double> values, double neg_tol)
    : grid_(std::move(grid)), values_(std::move(values)) {
    require_size(values_, grid_, "DensityField");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const double v = values_[i];
        if (!std::isfinite(v))
            throw std::invalid_argument("DensityField: non-finite value at node " +
                                        std::to_string(i));
        if (v < -neg_tol)
            throw std::invalid_argument("DensityField: negative density at node " +
                                        std::to_string(i));
    }
    m0_ = moment(values_, grid_, 0);
    m1_ = moment(values_, grid_, 1);
    m4_ = moment(values_, grid_, 4);
}

double DensityField::max() const {
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

bool DensityField::in_m1(double tol) const {
    return std::abs(m0_ - 1.0) <= tol && std::abs(m1_ - 1.0) <= tol;
}

DensityField tilt_to_m1(const Grid& g, std::vector<double> raw) {
    require_size(raw, g, "tilt_to_m1");
    const double s0 = moment(raw, g, 0);
    const double s1 = moment(raw, g, 1);
    const double s2 = moment(raw, g, 2);
    // [s0 s1; s1 s2] (a, b) = (1, 1)
    const double det = s0 * s2 - s1 * s1;
    if (!(std::abs(det) > 0.0) || !std::isfinite(det))
        throw std::invalid_argument("tilt_to_m1: degenerate density (moment matrix singular)");
    const double a = (s2 - s1) / det;
    const double b = (s0 - s1) / det;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double f = a + b * g.node(i);
        if (raw[i] > 0.0 && f < 0.0)
            throw std::invalid_argument(
                "tilt_to_m1: affine tilt turns the density negative; cannot place it in M1");
        raw[i] *= f;
    }
    return DensityField(g, std::move(raw));
}

DensityField exponential_density(const Grid& g) {
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(-g.node(i));
    return tilt_to_m1(g, std::move(v));
}

DensityField uniform_density(const Grid& g, double a, double b) {
    if (!(a >= 0.0 && b > a)) throw std::invalid_argument("uniform_density: need 0 <= a < b");
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double w = g.node(i);
        v[i] = (w >= a && w <= b) ? 1.0 / (b - a) : 0.0;
    }
    return tilt_to_m1(g, std::move(v));
}

DensityField bump_density(const Grid& g, double center, double width) {
    if (!(width > 0.0)) throw std::invalid_argument("bump_density: width must be > 0");
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double z = (g.node(i) - center) / width;
        v[i] = std::exp(-0.5 * z * z);
    }
    return tilt_to_m1(g, std::move(v));
}

double tail_mass(const DensityField& rho, double fraction) {
    const Grid& g = rho.grid();
    const auto c = cumulative_integral(rho.span(), g);
    const double cut = g.w_max() * (1.0 - fraction);
    std::size_t k = 0;
    while (k + 1 < g.size() && g.node(k) < cut) ++k;
    return c.back() - c[k];
}

void write_density_csv(const std::string& path, const DensityField& rho) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (f == nullptr) throw std::runtime_error("cannot open " + path + " for writing");
    std::fprintf(f, "w,rho\n");
    for (std::size_t i = 0; i < rho.size(); ++i)
        std::fprintf(f, "%.17g,%.17g\n", rho.grid().node(i), rho[i]);
    std::fclose(f);
}

DensityField read_density_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("density CSV not found: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    if (line.rfind("w,rho", 0) != 0)
        throw std::runtime_error(path + ": expected header 'w,rho'");
    std::vector<double> w, r;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        double a = 0.0, b = 0.0;
        char comma = 0;
        if (!(ss >> a >> comma >> b) || comma != ',')
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed row");
        w.push_back(a);
        r.push_back(b);
    }
    if (w.size() < 3) throw std::runtime_error(path + ": need at least 3 rows");
    if (w.front() != 0.0) throw std::runtime_error(path + ": first node must be 0");
    Grid g(w.back(), w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        if (std::abs(w[i] - g.node(i)) > 1e-9 * g.w_max())
            throw std::runtime_error(path + ": nodes are not uniformly spaced (row " +
                                     std::to_string(i + 2) + ")");
    return DensityField(g, std::move(r));
}

namespace {

// Position s in [0, h] where rho_j + (rho_{j+1} - rho_j) s / h integrates to target.
double invert_cell(double r0, double r1, double h, double target) {
    const double a = 0.5 * (r1 - r0) / h;
    if (std::abs(a) * h < 1e-14 * std::max(std::abs(r0), 1e-300)) return r0 > 0 ? target / r0 : 0.0;
    const double disc = std::max(0.0, r0 * r0 + 4.0 * a * target);
    // Stable root of a s^2 + r0 s - target = 0.
    const double s = 2.0 * target / (r0 + std::sqrt(disc));
    return std::clamp(s, 0.0, h);
}

}  // namespace

std::vector<double> sample_wealths(const DensityField& rho, std::size_t n, std::mt19937_64* rng) {
    if (n == 0) throw std::invalid_argument("sample_wealths: n must be > 0");
    const Grid& g = rho.grid();
    const auto c = cumulative_integral(rho.span(), g);
    const double total = c.back();
    if (!(total > 0.0)) throw std::invalid_argument("sample_wealths: density has no mass");
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double p = rng ? U(*rng) : (static_cast<double>(k) + 0.5) / static_cast<double>(n);
        const double t = p * total;
        auto it = std::upper_bound(c.begin(), c.end(), t);
        std::size_t j = it == c.begin() ? 0 : static_cast<std::size_t>(it - c.begin()) - 1;
        if (j + 1 >= g.size()) j = g.size() - 2;
        const double s =
            invert_cell(std::max(rho[j], 0.0), std::max(rho[j + 1], 0.0), g.h(), t - c[j]);
        out[k] = g.node(j) + s;
    }
    double sum = 0.0;
    for (double v : out) sum += v;
    const double mean = sum / static_cast<double>(n);
    const double floor = 1e-12;
    for (double& v : out) v = std::max(v / mean, floor);
    return out;
}

}  // namespace giniflow
