// SPDX-License-Identifier: Apache-2.0
#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "giniflow/simd.hpp"

namespace giniflow::simd {

#ifdef GINIFLOW_HAVE_AVX2
namespace detail {
const KernelTable& avx2_table();
}
#endif

bool avx2_compiled() {
#ifdef GINIFLOW_HAVE_AVX2
    return true;
#else
    return false;
#endif
}

bool avx2_supported() {
#if defined(GINIFLOW_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return ok;
#else
    return false;
#endif
}

const KernelTable& avx2_kernels() {
#ifdef GINIFLOW_HAVE_AVX2
    if (avx2_supported()) return detail::avx2_table();
#endif
    throw std::runtime_error("AVX2 kernels unavailable on this build or CPU");
}

namespace {

const KernelTable* initial_table() {
    const char* env = std::getenv("GINIFLOW_SIMD");
    if (env != nullptr && std::string(env) == "scalar") return &scalar_kernels();
    if (avx2_supported()) return &avx2_kernels();
    return &scalar_kernels();
}

std::atomic<const KernelTable*>& slot() {
    static std::atomic<const KernelTable*> table{initial_table()};
    return table;
}

}  // namespace

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

void set_backend(Backend b) {
    const KernelTable* t = b == Backend::Avx2 ? &avx2_kernels() : &scalar_kernels();
    slot().store(t, std::memory_order_release);
}

Backend current_backend() { return active().backend; }

std::string_view backend_name(Backend b) {
    return b == Backend::Avx2 ? "avx2" : "scalar";
}

}  // namespace giniflow::simd
