// SPDX-License-Identifier: Apache-2.0
#include "giniflow/simd.hpp"

namespace giniflow::simd {
namespace {

void matvec_scalar(const double* A, const double* x, double* y, std::size_t rows,
                   std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = A + r * cols;
        double acc = 0.0;
        for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void flux_update_scalar(const double* rho, const double* phi, const double* coef,
                        double* out, std::size_t n) {
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double right = phi[i + 1] - phi[i];
        const double left = phi[i] - phi[i - 1];
        out[i] = rho[i] + coef[i] * (right - left);
    }
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table{matvec_scalar, dot_scalar, flux_update_scalar,
                                   Backend::Scalar};
    return table;
}

}  // namespace giniflow::simd
