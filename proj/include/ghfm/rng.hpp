#pragma once

// Counter-based seeding: every (seed, stream, subject) triple gets its own
// engine, so generated data never depends on thread count or visiting order.

#include <cstdint>
#include <random>
#include <string_view>

namespace ghfm {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
    return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index);
}

inline std::uint64_t hash_string(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
    return Engine(mix_seed(seed, stream, index));
}

}  // namespace ghfm
