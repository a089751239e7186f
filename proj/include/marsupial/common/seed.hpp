#pragma once

#include <cstdint>
#include <string_view>

namespace marsupial {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Derives an independent seed for one stage (and one sub-index within it)
/// from the single run seed. Counter-based: no state is carried between calls.
std::uint64_t stage_seed(std::uint64_t run_seed, std::string_view stage, std::uint64_t index = 0);

}  // namespace marsupial
