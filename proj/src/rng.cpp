// SPDX-License-Identifier: Apache-2.0
#include "giniflow/rng.hpp"

namespace giniflow {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index) {
    std::uint64_t s = splitmix64(seed);
    s = splitmix64(s ^ fnv1a(stream));
    return splitmix64(s ^ splitmix64(index));
}

Rng make_stream(std::uint64_t seed, std::string_view stream, std::uint64_t index) {
    return Rng(derive_seed(seed, stream, index));
}

}  // namespace giniflow
