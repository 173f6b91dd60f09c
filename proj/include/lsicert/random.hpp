// Seeded random streams. All randomness in the library flows from one root
// seed through named sub-streams, so adding a new consumer never shifts the
// draws of an existing one. Distributions are hand-rolled on top of
// mt19937_64 because the std:: distribution objects are implementation
// defined and would break bit-identical reproducibility across toolchains.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace lsicert {

// splitmix64 finalizer, used for seed derivation only.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Seed of the sub-stream `name` under `root`.
inline std::uint64_t substream(std::uint64_t root, std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the name
    for (char ch : name) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return mix64(root ^ mix64(h));
}

// Indexed sub-stream (per cell, per chain, per restart, ...).
inline std::uint64_t substream(std::uint64_t root, std::string_view name,
                               std::uint64_t index) {
    return mix64(substream(root, name) ^ mix64(index + 0x9e3779b97f4a7c15ULL));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t bits() { return eng_(); }

    // uniform in [0, 1), 53-bit resolution
    double uniform01() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // integer in [0, n)
    int below(int n) {
        return static_cast<int>(uniform01() * static_cast<double>(n));
    }

    // standard normal via Box-Muller, one spare cached
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform01();  // (0, 1], keeps the log finite
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace lsicert
