#pragma once

#include <cstdint>

namespace mixchan {

/// Splittable counter-style PRNG (splitmix64). Output is identical on every
/// platform for a given seed, and child streams derived with derive_seed()
/// are independent of later draws from the parent, so parallel consumers can
/// be seeded up front and remain reproducible regardless of schedule.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform on [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1]; safe as a log() argument.
    double uniform_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    /// Seed for an independent child stream.
    std::uint64_t derive_seed() { return next_u64(); }

    Rng split() { return Rng(derive_seed()); }

private:
    std::uint64_t state_;
};

}  // namespace mixchan
