#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace fogbandit {

// SplitMix64 finalizer. Used both as a seed mixer and as a counter-based
// generator so that environment draws are pure functions of their keys.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_keys(std::initializer_list<std::uint64_t> keys) noexcept
{
    std::uint64_t h = 0x6a09e667f3bcc908ULL;
    for (auto k : keys)
        h = mix64(h ^ mix64(k));
    return h;
}

// Top 53 bits mapped to [0, 1). Portable across standard libraries, unlike
// std::uniform_real_distribution.
constexpr double to_unit(std::uint64_t bits) noexcept
{
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Counter-based stream keyed by a fixed hash. next() advances a local counter,
// so a KeyedStream constructed from the same keys always replays the same draws.
class KeyedStream {
public:
    explicit KeyedStream(std::uint64_t key) noexcept : key_(key) {}
    KeyedStream(std::initializer_list<std::uint64_t> keys) noexcept : key_(hash_keys(keys)) {}

    std::uint64_t next_bits() noexcept { return mix64(key_ ^ mix64(++counter_)); }
    double uniform() noexcept { return to_unit(next_bits()); }
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    // Unit-mean exponential; the power of a unit-variance Rayleigh fading gain.
    double exponential() noexcept { return -std::log1p(-uniform()); }

    double normal() noexcept
    {
        // Box-Muller; u1 in (0, 1].
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// Stateful generator owned by a policy.
class PolicyRng {
public:
    explicit PolicyRng(std::uint64_t seed = 0) : engine_(mix64(seed)) {}

    double uniform() { return to_unit(engine_()); }

private:
    std::mt19937_64 engine_;
};

} // namespace fogbandit
