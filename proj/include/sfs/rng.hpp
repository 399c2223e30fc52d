#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace sfs {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent stream seed from a root seed and a path of stream
/// identifiers, e.g. derive_seed(seed, {repetition, q}). Distinct paths give
/// unrelated streams; the result depends only on the values, never on the
/// order in which streams are requested at run time.
inline std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = mix64(root);
    for (auto id : path)
        h = mix64(h ^ mix64(id + 0x632be59bd9b4e019ULL));
    return h;
}

inline Rng make_rng(std::uint64_t root, std::initializer_list<std::uint64_t> path = {}) {
    return Rng{derive_seed(root, path)};
}

// Stream tags shared between modules.
namespace stream {
inline constexpr std::uint64_t plan = 0x706c616e;
inline constexpr std::uint64_t cell = 0x63656c6c;
inline constexpr std::uint64_t design = 0x64657369;
inline constexpr std::uint64_t engine = 0x656e6769;
inline constexpr std::uint64_t score = 0x73636f72;
} // namespace stream

} // namespace sfs
