#pragma once

#include <cstdint>

namespace avecq {

/// Currency base unit (1 ETH = 10^18 wei).
using Wei = std::uint64_t;

inline constexpr Wei kGwei = 1'000'000'000ULL;
inline constexpr Wei kEther = 1'000'000'000'000'000'000ULL;

}  // namespace avecq
