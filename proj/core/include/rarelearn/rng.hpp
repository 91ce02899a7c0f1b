#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rarelearn {

// SplitMix64 finalizer. Decorrelates seeds that differ in only a few bits,
// so derived streams behave independently.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

// Named substream seeds. All randomness in the library flows from one master
// seed through chains of derive_seed calls; there is no global RNG state.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) noexcept {
    return mix64(base ^ mix64(salt));
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::string_view name) noexcept {
    return derive_seed(base, fnv1a(name));
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
    return std::mt19937_64{mix64(seed)};
}

} // namespace rarelearn
