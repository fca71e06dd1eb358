#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <string_view>

namespace auricle {

// Deterministic 64-bit generator (splitmix64). Streams are derived by hashing
// a root seed with a list of stream ids, so the draw sequence for any unit of
// work (epoch, pair index, clip index) is fixed regardless of worker count or
// scheduling order.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Stable hash of a stream label, so call sites read as
    //   Rng::derive(seed, {Rng::tag("init"), epoch, index})
    static constexpr std::uint64_t tag(std::string_view label) {
        std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
        for (char c : label) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) {
        std::uint64_t h = mix(seed);
        for (std::uint64_t id : stream) h = mix(h ^ id);
        return Rng(h);
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). Fixed-point multiply keeps the draw count
    // per call constant (bias is O(n / 2^64), irrelevant at our ranges).
    std::int64_t uniform_int(std::int64_t n) {
        if (n <= 1) return 0;
        return static_cast<std::int64_t>(
            (static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(n)) >> 64);
    }

    // Standard normal via Box-Muller; two draws per call.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log1p(-u1));
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

    template <typename It>
    void shuffle(It first, It last) {
        const std::int64_t n = static_cast<std::int64_t>(last - first);
        for (std::int64_t i = n - 1; i > 0; --i) {
            std::int64_t j = uniform_int(i + 1);
            std::swap(first[i], first[j]);
        }
    }

private:
    std::uint64_t state_;
};

}  // namespace auricle
