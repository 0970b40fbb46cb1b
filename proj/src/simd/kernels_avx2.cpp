// SPDX-License-Identifier: Apache-2.0
// Built with -mavx2 -mfma. Only reached through the dispatch table after a
// runtime CPU check.
#include <immintrin.h>

#include "giniflow/simd.hpp"

namespace giniflow::simd::detail {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void matvec_avx2(const double* A, const double* x, double* y, std::size_t rows,
                 std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) y[r] = dot_avx2(A + r * cols, x, cols);
}

// Same operation order as the scalar loop and no FMA, so results match
// the reference bit for bit.
void flux_update_avx2(const double* rho, const double* phi, const double* coef,
                      double* out, std::size_t n) {
    if (n < 3) return;
    const std::size_t last = n - 1;  // exclusive upper bound for i
    std::size_t i = 1;
    for (; i + 4 <= last; i += 4) {
        __m256d pm = _mm256_loadu_pd(phi + i - 1);
        __m256d p0 = _mm256_loadu_pd(phi + i);
        __m256d pp = _mm256_loadu_pd(phi + i + 1);
        __m256d right = _mm256_sub_pd(pp, p0);
        __m256d left = _mm256_sub_pd(p0, pm);
        __m256d lap = _mm256_sub_pd(right, left);
        __m256d upd = _mm256_mul_pd(_mm256_loadu_pd(coef + i), lap);
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(rho + i), upd));
    }
    for (; i < last; ++i) {
        const double right = phi[i + 1] - phi[i];
        const double left = phi[i] - phi[i - 1];
        out[i] = rho[i] + coef[i] * (right - left);
    }
}

}  // namespace

const KernelTable& avx2_table() {
    static const KernelTable table{matvec_avx2, dot_avx2, flux_update_avx2,
                                   Backend::Avx2};
    return table;
}

}  // namespace giniflow::simd::detail
