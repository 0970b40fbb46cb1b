// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "giniflow/grid.hpp"

namespace giniflow {

// Grid-sampled probability density with cached trapezoid moments.
class DensityField {
public:
    // Values below -neg_tol are rejected. Tiny negatives are tolerated so
    // that roundoff-level states produced by the solver can be wrapped.
    DensityField(Grid grid, std::vector<double> values, double neg_tol = 1e-12);

    const Grid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    std::span<const double> span() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

    double m0() const { return m0_; }
    double m1() const { return m1_; }
    double m4() const { return m4_; }
    double max() const;

    bool in_m1(double tol) const;

private:
    Grid grid_;
    std::vector<double> values_;
    double m0_ = 0.0, m1_ = 0.0, m4_ = 0.0;
};

double moment(std::span<const double> rho, const Grid& g, int k);

// Multiplies raw by the affine factor (a + b w) that gives m0 = m1 = 1.
// Throws if the tilted density would be negative somewhere raw > 0.
DensityField tilt_to_m1(const Grid& g, std::vector<double> raw);

DensityField exponential_density(const Grid& g);
DensityField uniform_density(const Grid& g, double a, double b);
DensityField bump_density(const Grid& g, double center, double width);

// Mass of rho on the last `fraction` of the domain.
double tail_mass(const DensityField& rho, double fraction = 0.1);

// CSV with header `w,rho`, 17 significant digits.
void write_density_csv(const std::string& path, const DensityField& rho);
// Reads nodes and values; the grid is rebuilt from the first/last node and
// the row count, and node spacing is checked against it.
DensityField read_density_csv(const std::string& path);

// N wealths from the inverse CDF of rho (piecewise-linear density). With no
// RNG the quantiles (k + 1/2)/N are used. The result is rescaled so the
// mean is exactly representable as 1 up to roundoff and every entry is > 0.
std::vector<double> sample_wealths(const DensityField& rho, std::size_t n,
                                   std::mt19937_64* rng = nullptr);

}  // namespace giniflow
