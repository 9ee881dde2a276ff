#ifndef ENTANGLE_RNG_HPP
#define ENTANGLE_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace entangle {

/// mt19937_64's output sequence is fixed by the standard, so streams seeded
/// through derive_seed() reproduce across compilers and thread schedules.
using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Mix a master seed with a list of stream keys (level tag, pair indices, ...).
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) noexcept
{
    std::uint64_t h = splitmix64(master);
    for (auto k : keys)
        h = splitmix64(h ^ splitmix64(k + 0x632BE59BD9B4E019ULL));
    return h;
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(Engine& engine) noexcept
{
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

namespace stream {
inline constexpr std::uint64_t kBei = 1;
inline constexpr std::uint64_t kCig = 2;
inline constexpr std::uint64_t kResponses = 3;
inline constexpr std::uint64_t kJudgments = 4;
} // namespace stream

} // namespace entangle

#endif // ENTANGLE_RNG_HPP
