#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace scusum {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// Derives an independent sub-seed for replicate r of a run seeded with `seed`.
// Mixing both words through splitmix64 keeps nearby (seed, r) pairs decorrelated.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t r) {
    std::uint64_t s = seed;
    detail::splitmix64(s);
    s ^= 0xA0761D6478BD642FULL * (r + 1);
    detail::splitmix64(s);
    return detail::splitmix64(s);
}

// Two-level derivation for (replicate, attempt) pairs, e.g. redraws after a
// discarded replicate.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t r, std::uint64_t attempt) {
    return derive_seed(derive_seed(seed, r), attempt);
}

// xoshiro256++ with splitmix64 seeding. Gaussians come from the classic
// (trigonometric) Box-Muller transform; the spare value is cached so that a
// generator's output stream is a pure function of its seed.
class Rng {
  public:
    explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

    void reseed(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = detail::splitmix64(sm);
        has_spare_ = false;
        spare_ = 0.0;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl(state_[3], 45);
        return result;
    }

    // uniform on (0, 1]; never returns 0 so log() below is safe
    double uniform() {
        const std::uint64_t bits = next_u64() >> 11;  // 53 bits
        return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

  private:
    std::uint64_t state_[4]{};
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace scusum
