#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace critsir {

// 64-bit finalizer with full avalanche (splitmix64 step). Used for seed
// derivation only, never as the generator itself.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic stream derivation: one master seed plus any number of integer
// labels (size, replica index, purpose tag, ...) yields a stream seed that is
// independent of scheduling order. Label order matters by design.
template <class... Labels>
constexpr std::uint64_t derive_stream(std::uint64_t master, Labels... labels) noexcept {
    std::uint64_t h = mix64(master);
    ((h = mix64(h ^ (0x3c6ef372fe94f82bULL + static_cast<std::uint64_t>(labels)))), ...);
    return h;
}

// Random stream with hand-rolled conversions so that goldens are byte-stable
// across standard library implementations. The engine itself (mt19937_64) has
// a fully specified output sequence.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform on the open interval (0,1), 53-bit resolution. Strictly inside
    // the interval so log() and the stable sampler's trigonometry stay finite.
    double uniform01() {
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Unbiased uniform integer in [0, n). Requires n >= 1.
    std::uint64_t uniform_below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
        for (;;) {
            const std::uint64_t x = eng_();
            if (x >= threshold) return x % n;
        }
    }

    double exponential(double rate = 1.0) { return -std::log(uniform01()) / rate; }

    // Exact Poisson sampling: product method, with halving for large means
    // (a Poisson(m) variable is a sum of two independent Poisson(m/2)).
    std::uint64_t poisson(double mean) {
        if (!(mean > 0.0)) return 0;
        if (mean > 30.0) {
            const double half = mean / 2;
            return poisson(half) + poisson(mean - half);
        }
        const double limit = std::exp(-mean);
        std::uint64_t k = 0;
        double prod = uniform01();
        while (prod > limit) {
            ++k;
            prod *= uniform01();
        }
        return k;
    }

private:
    std::mt19937_64 eng_;
};

} // namespace critsir
