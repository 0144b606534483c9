#pragma once

#include <cstdint>
#include <random>

namespace searchtrack {

using Rng = std::mt19937_64;

/// What a random substream is consumed by. Each purpose gets its own stream so
/// that changing how much randomness one consumer draws never shifts another.
enum class StreamPurpose : std::uint32_t {
    truth = 1,
    measurement = 2,
    filter = 3,
    planner = 4,
    spawn = 5,
};

/// Independent generator for (root seed, trial, agent, purpose).
inline Rng make_stream(std::uint64_t root_seed, std::uint64_t trial, std::uint64_t agent,
                       StreamPurpose purpose) {
    std::seed_seq seq{static_cast<std::uint32_t>(root_seed & 0xffffffffu),
                      static_cast<std::uint32_t>(root_seed >> 32),
                      static_cast<std::uint32_t>(trial & 0xffffffffu),
                      static_cast<std::uint32_t>(trial >> 32),
                      static_cast<std::uint32_t>(agent),
                      static_cast<std::uint32_t>(purpose)};
    return Rng(seq);
}

}  // namespace searchtrack
