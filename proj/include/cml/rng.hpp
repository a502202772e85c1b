#pragma once

#include <cstdint>
#include <limits>

namespace cml {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based generator: every (seed, stream, a, b, c) tuple hashes to an
// independent 64-bit value, so draws do not depend on evaluation order and
// parallel runs reproduce sequential ones bit for bit.
class CounterRng {
public:
    constexpr CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_(splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL))) {}

    constexpr std::uint64_t bits(std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) const noexcept {
        std::uint64_t h = splitmix64(key_ ^ a);
        h = splitmix64(h ^ (b + 0xd1b54a32d192ed03ULL));
        h = splitmix64(h ^ (c + 0x8cb92ba72f3d8dd7ULL));
        return h;
    }

    // Uniform on [0, 1) with 53 random bits.
    constexpr double uniform(std::uint64_t a, std::uint64_t b = 0,
                             std::uint64_t c = 0) const noexcept {
        return static_cast<double>(bits(a, b, c) >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t key_;
};

// Sequential view of one counter stream; satisfies UniformRandomBitGenerator.
class StreamRng {
public:
    using result_type = std::uint64_t;

    constexpr StreamRng(std::uint64_t seed, std::uint64_t stream) noexcept : base_(seed, stream) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept { return base_.bits(counter_++); }
    constexpr double uniform() noexcept { return base_.uniform(counter_++); }

private:
    CounterRng base_;
    std::uint64_t counter_ = 0;
};

// Stream tags keep the independent uses of one seed apart.
namespace streams {
inline constexpr std::uint64_t kInitialState = 1;
inline constexpr std::uint64_t kPerturbation = 2;
inline constexpr std::uint64_t kBoundary = 3;
inline constexpr std::uint64_t kLipschitz = 4;
inline constexpr std::uint64_t kContractionB = 5;
}  // namespace streams

}  // namespace cml
