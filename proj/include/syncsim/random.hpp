#pragma once

#include <cstdint>
#include <limits>

namespace syncsim {

/// Purposes for which independent random streams are derived. Keeping them
/// apart means a parameter sweep that changes how often one stream is consulted
/// never shifts the draws seen by another.
enum class Stream : std::uint64_t {
    Durations = 1,
    Failure = 2,
    Join = 3,
    Prediction = 4,
    Mobility = 5,
    Graph = 6,
    LocalQueue = 7,
};

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// SplitMix64; satisfies UniformRandomBitGenerator so it plugs into <random>.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

/// Counter-based source: every draw is addressed by (purpose, k1, k2, k3), so
/// the value is independent of the order in which the simulation asks for it.
class RandomStreams {
public:
    explicit constexpr RandomStreams(std::uint64_t seed) noexcept : seed_(seed) {}

    constexpr std::uint64_t seed() const noexcept { return seed_; }

    constexpr std::uint64_t key(Stream s, std::uint64_t k1 = 0, std::uint64_t k2 = 0,
                                std::uint64_t k3 = 0) const noexcept {
        std::uint64_t h = mix64(seed_ ^ mix64(static_cast<std::uint64_t>(s)));
        h = mix64(h ^ k1);
        h = mix64(h ^ (k2 + 0x632be59bd9b4e019ULL));
        h = mix64(h ^ (k3 + 0x8cb92ba72f3d8dd7ULL));
        return h;
    }

    constexpr SplitMix64 engine(Stream s, std::uint64_t k1 = 0, std::uint64_t k2 = 0,
                                std::uint64_t k3 = 0) const noexcept {
        return SplitMix64(key(s, k1, k2, k3));
    }

    /// Uniform in [0, 1).
    constexpr double uniform(Stream s, std::uint64_t k1 = 0, std::uint64_t k2 = 0,
                             std::uint64_t k3 = 0) const noexcept {
        return static_cast<double>(key(s, k1, k2, k3) >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t seed_;
};

}  // namespace syncsim
