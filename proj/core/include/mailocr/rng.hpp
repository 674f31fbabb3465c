#pragma once

#include <cmath>
#include <cstdint>

namespace mailocr {

// SplitMix64 stream (Vigna's fixed-increment SplittableRandom variant).
// The 64-bit output sequence for a given seed is identical on every
// platform; all randomness in this project flows through it.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1), 53-bit resolution.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in (0,1]; safe as a log() argument.
    double uniform_pos() {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }

    // Index in [0,n). Modulo bias is irrelevant at the list sizes used here
    // and keeps the stream layout trivial to reproduce.
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(next() % n);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Standard Gaussian via Box-Muller on consecutive uniforms. Values are
    // produced in pairs; the second of each pair is cached.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Per-item seed: one SplitMix64 step over (seed XOR index). Used wherever a
// stream has to be split per sample without correlating neighbours.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return Rng(seed ^ index).next();
}

}  // namespace mailocr
