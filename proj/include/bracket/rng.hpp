#pragma once

// Counter-based random streams. Every draw in a simulation is keyed by
// (seed, stream, index): the generator for a shot is reconstructed from its key,
// so results do not depend on how work is split across threads.

#include <cstdint>
#include <limits>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace bracket::rng {

inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 sequence started from a hashed key. Satisfies
// UniformRandomBitGenerator.
class KeyedEngine {
public:
    using result_type = std::uint64_t;

    constexpr KeyedEngine(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
        : state_(mix64(mix64(mix64(seed ^ kGolden) + stream * kGolden) ^ (index + 0x632be59bd9b4e019ULL))) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() {
        state_ += kGolden;
        return mix64(state_);
    }

private:
    std::uint64_t state_;
};

// Uniform on [0, 1) with 53 random bits.
inline double uniform01(KeyedEngine& eng) { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

inline std::uint32_t poisson(KeyedEngine& eng, double mean) {
    if (!(mean > 0.0)) return 0;
    boost::random::poisson_distribution<std::uint32_t, double> dist(mean);
    return dist(eng);
}

inline double normal(KeyedEngine& eng) {
    boost::random::normal_distribution<double> dist(0.0, 1.0);
    return dist(eng);
}

// Uniform integer in [0, n) by rejection of the incomplete top block.
inline std::uint64_t below(KeyedEngine& eng, std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    for (;;) {
        const std::uint64_t x = eng();
        if (x < limit) return x % n;
    }
}

// Named streams so independent uses of one seed never share keys.
enum class Stream : std::uint64_t {
    sweep_shot = 1,
    bracket_shot = 2,
    profile_jitter = 3,
    post_select = 4,
    receiver_trial = 5,
};

inline KeyedEngine engine(std::uint64_t seed, Stream stream, std::uint64_t hi, std::uint64_t lo) {
    return KeyedEngine(seed, (static_cast<std::uint64_t>(stream) << 56) ^ hi, lo);
}

}  // namespace bracket::rng
