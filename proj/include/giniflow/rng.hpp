// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace giniflow {

using Rng = std::mt19937_64;

// Every random draw in the library comes from a stream derived from the
// run seed, a stream name ("abm", "fuzz", "init") and an index (replica,
// trial). Derivation is a SplitMix64 finaliser over the seed, an FNV-1a hash
// of the name and the index, so streams are independent of creation order.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0);
Rng make_stream(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0);

}  // namespace giniflow
