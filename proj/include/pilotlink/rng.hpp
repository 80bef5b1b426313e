// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <initializer_list>

namespace pilotlink {

/// SplitMix64 generator; also used to derive independent stream seeds.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next()
    {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

/// Seed for a sub-stream identified by a path of indices below a parent seed.
/// Order-sensitive; identical inputs always give identical seeds.
inline std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> path)
{
    std::uint64_t s = parent;
    for (std::uint64_t p : path) {
        SplitMix64 g(s ^ (p * 0xD1B54A32D192ED03ULL + 0x632BE59BD9B4E019ULL));
        s = g.next();
    }
    return s;
}

}  // namespace pilotlink
