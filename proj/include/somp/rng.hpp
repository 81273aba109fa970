#pragma once

#include <cstdint>

namespace somp {

/// Counter-based generator (splitmix64 finalizer over seed/stream/counter).
/// Stateless draws: the value at (stream, counter) depends only on the seed,
/// so masks, phases and amplitude draws are reproducible regardless of the
/// order in which sweep cells execute.
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const {
        std::uint64_t z = seed_;
        z = mix(z ^ mix(stream + 0x9e3779b97f4a7c15ULL));
        z = mix(z ^ mix(counter + 0xbf58476d1ce4e5b9ULL));
        return z;
    }

    /// Uniform double in [0, 1).
    double uniform(std::uint64_t stream, std::uint64_t counter) const {
        return static_cast<double>(bits(stream, counter) >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound) via fixed-point multiply (bound < 2^32).
    std::uint32_t below(std::uint64_t stream, std::uint64_t counter, std::uint32_t bound) const {
        return static_cast<std::uint32_t>((bits(stream, counter) >> 32) * std::uint64_t(bound) >> 32);
    }

    std::uint64_t seed() const { return seed_; }

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

  private:
    std::uint64_t seed_;
};

// Stream ids used across the project so distinct draws never collide.
namespace rng_stream {
inline constexpr std::uint64_t kMask = 1;
inline constexpr std::uint64_t kPhase = 2;
inline constexpr std::uint64_t kAmplitude = 3;
inline constexpr std::uint64_t kFrequency = 4;
inline constexpr std::uint64_t kShuffle = 5;
inline constexpr std::uint64_t kGeneric = 6;
}  // namespace rng_stream

}  // namespace somp
