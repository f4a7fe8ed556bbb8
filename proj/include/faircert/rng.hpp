#pragma once

#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <string_view>

namespace faircert {

// 64-bit FNV-1a, used for stream names and content hashes.
inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(uint64_t h) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// All randomness in the pipeline flows from one root seed through named
// streams ("split", "init", "classifier", "trial"), so concurrent consumers
// stay independent and runs reproduce exactly.
inline uint64_t stream_seed(uint64_t root, std::string_view name, uint64_t index = 0) {
    return splitmix64(splitmix64(root ^ fnv1a64(name)) + index);
}

inline std::mt19937_64 make_rng(uint64_t root, std::string_view name, uint64_t index = 0) {
    return std::mt19937_64(stream_seed(root, name, index));
}

// Deterministic bounded draw; std::uniform_int_distribution varies across
// standard libraries.
inline uint64_t bounded(std::mt19937_64& rng, uint64_t n) {
    return n == 0 ? 0 : rng() % n;
}

inline double unit_real(std::mt19937_64& rng) {
    return (rng() >> 11) * 0x1.0p-53;
}

}  // namespace faircert
