#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace sgst {

// Deterministic splittable random source. splitmix64 core; forks derive
// independent streams from (state, label) so parallel and serial runs draw
// identical values per stream. No libc/libstdc++ distributions are used, so
// sequences are identical across platforms and toolchains.
class Rng {
public:
    explicit Rng(uint64_t seed = 0) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform integer in [0, bound). Lemire rejection, exactly uniform.
    uint32_t next_uint(uint32_t bound) {
        uint32_t x = static_cast<uint32_t>(next_u64());
        uint64_t m = static_cast<uint64_t>(x) * bound;
        uint32_t lo = static_cast<uint32_t>(m);
        if (lo < bound) {
            uint32_t threshold = (0u - bound) % bound;
            while (lo < threshold) {
                x = static_cast<uint32_t>(next_u64());
                m = static_cast<uint64_t>(x) * bound;
                lo = static_cast<uint32_t>(m);
            }
        }
        return static_cast<uint32_t>(m >> 32);
    }

    // Uniform in [0, 1).
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi].
    double next_range(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Standard normal via Box-Muller; second value cached.
    double next_normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = next_double();
        double u2 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * 3.14159265358979323846 * u2;
        cached_ = r * std::sin(theta);
        have_cached_ = true;
        return r * std::cos(theta);
    }

    // Derive an independent stream. Streams forked with distinct labels or
    // ids never share state with the parent or each other.
    Rng fork(std::string_view label, uint64_t a = 0, uint64_t b = 0) const {
        uint64_t h = state_ ^ 0xa0761d6478bd642fULL;
        for (char c : label) h = mix(h, static_cast<uint64_t>(static_cast<unsigned char>(c)));
        h = mix(h, a);
        h = mix(h, b);
        return Rng(h);
    }

    uint64_t state() const { return state_; }
    void set_state(uint64_t s) {
        state_ = s;
        have_cached_ = false;
    }

private:
    static uint64_t mix(uint64_t h, uint64_t v) {
        h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        h *= 0xff51afd7ed558ccdULL;
        h ^= h >> 33;
        return h;
    }

    uint64_t state_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace sgst
