#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace mixl {

namespace detail {

// splitmix64: seeds the main generator and hashes substream tags.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d4a2fcf41d564dULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// xoshiro256++ with counter-based substreams.
//
// A substream is derived from the parent's root seed and the tag triple, never
// from the parent's consumption position. Work items that own disjoint tags
// draw identical values regardless of scheduling order, which is what makes
// the parallel kernels bit-reproducible.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) : root_(seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = detail::splitmix64_next(sm);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
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

    // Child generator for tag (a, b, c); independent of this->operator() history.
    Rng substream(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
        std::uint64_t mix = root_;
        mix ^= detail::splitmix64_next(a += 0x637973746d617473ULL);
        mix ^= detail::splitmix64_next(b += 0x9e6c63746f727374ULL);
        mix ^= detail::splitmix64_next(c += 0x61626d657274696dULL);
        return Rng(mix);
    }

    std::uint64_t root_seed() const { return root_; }

    // Uniform on [0, 1): 53-bit mantissa.
    double uniform() {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    // Uniform on (0, 1): safe under log().
    double uniform_pos() {
        double u;
        do {
            u = uniform();
        } while (u <= 0.0);
        return u;
    }

    // Standard normal via Box-Muller; caches the second variate.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return r * std::cos(theta);
    }

    // Standard Gumbel (location 0, scale 1).
    double gumbel() {
        return -std::log(-std::log(uniform_pos()));
    }

private:
    std::uint64_t root_;
    std::array<std::uint64_t, 4> state_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace mixl
