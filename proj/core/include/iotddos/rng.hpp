#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace iotddos {

// splitmix64 finalizer; used to derive stream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_str(std::string_view s) {
    // FNV-1a 64-bit
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Seeded generator with deterministic child-stream derivation.
// uniform() maps the raw 64-bit output to a double in [0,1); the mapping
// is fixed here rather than delegated to std distributions so that
// sequences are identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // Unbiased integer in [0, n) via rejection.
    std::uint64_t uniform_index(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    // Independent sub-stream; stable regardless of how much this stream
    // has been consumed.
    Rng child(std::uint64_t stream) const {
        return Rng(mix64(seed_ ^ mix64(stream + 1)));
    }

    Rng child(std::string_view name) const { return child(hash_str(name)); }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace iotddos
