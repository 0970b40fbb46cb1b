// SPDX-License-Identifier: Apache-2.0
#pragma once

// Data-parallel inner loops used by the mean-field solver and the metric
// code. Every kernel has a scalar reference implementation; an AVX2 variant
// is compiled into a separate translation unit and selected at runtime when
// the CPU supports it. Set GINIFLOW_SIMD=scalar in the environment to force
// the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace giniflow::simd {

enum class Backend { Scalar, Avx2 };

struct KernelTable {
    // y[r] = sum_c A[r * cols + c] * x[c]   (A row-major, rows x cols)
    void (*matvec)(const double* A, const double* x, double* y, std::size_t rows,
                   std::size_t cols);
    // sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // Interior conservative update, i in [1, n-2]:
    //   out[i] = rho[i] + coef[i] * ((phi[i+1] - phi[i]) - (phi[i] - phi[i-1]))
    // Bitwise identical across backends (no contraction, same op order).
    void (*flux_update)(const double* rho, const double* phi, const double* coef,
                        double* out, std::size_t n);
    Backend backend;
};

const KernelTable& scalar_kernels();
bool avx2_compiled();
bool avx2_supported();  // compiled in and the running CPU has AVX2 + FMA
const KernelTable& avx2_kernels();  // throws if !avx2_supported()

// Process-wide active table. Initialised on first use from the CPU and the
// GINIFLOW_SIMD environment variable.
const KernelTable& active();
void set_backend(Backend b);
Backend current_backend();
std::string_view backend_name(Backend b);

inline void matvec(std::span<const double> A, std::span<const double> x,
                   std::span<double> y) {
    active().matvec(A.data(), x.data(), y.data(), y.size(), x.size());
}
inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}

}  // namespace giniflow::simd
