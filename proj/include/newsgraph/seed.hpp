#pragma once

#include <cstdint>
#include <string_view>

namespace newsgraph {

std::uint64_t splitmix64(std::uint64_t& state);

// Named sub-seed, so every component draws from its own stream of the one
// configured seed ("init", "synth.structure", "shuffle" with the epoch, ...).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view name, std::uint64_t index = 0);

}  // namespace newsgraph
