#pragma once

#include <array>
#include <cmath>
#include <cstring>
#include <string_view>

#include "c3/common.hpp"

namespace c3 {

inline u64 splitmix64(u64& x) {
    u64 z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Seedable, splittable PRNG (xoshiro256++). Every stochastic operation takes
// one of these by reference; derived streams are produced with split() or the
// keyed constructors, so replaying a state replays outputs exactly.
class Rng {
public:
    Rng() : Rng(0) {}

    explicit Rng(u64 seed) {
        u64 x = seed;
        for (auto& w : s_) w = splitmix64(x);
    }

    // Stream keyed on (seed, a, b): used to give every training step and
    // every sampling purpose its own independent, resume-stable stream.
    static Rng keyed(u64 seed, u64 a, u64 b = 0) {
        u64 x = seed ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b * 0xd1b54a32d192ed03ULL);
        return Rng(splitmix64(x));
    }

    static Rng keyed(u64 seed, std::string_view tag, u64 b = 0) {
        u64 h = 1469598103934665603ULL;  // FNV-1a
        for (char c : tag) h = (h ^ (unsigned char)c) * 1099511628211ULL;
        return keyed(seed, h, b);
    }

    Rng split() {
        u64 s = next();
        return Rng(s);
    }

    u64 next() {
        auto rotl = [](u64 v, int k) { return (v << k) | (v >> (64 - k)); };
        u64 result = rotl(s_[0] + s_[3], 23) + s_[0];
        u64 t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0,1) with 53-bit resolution.
    double uniform() { return (double)(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Integer in [0, n).
    u64 uniform_int(u64 n) {
        // Lemire rejection-free-ish: rejection loop keeps it unbiased.
        u64 threshold = (0 - n) % n;
        for (;;) {
            u64 r = next();
            if (r >= threshold) return r % n;
        }
    }

    // Standard normal via Box-Muller (two uniforms per draw, no cached spare:
    // keeps the state a pure function of draw count).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    bool bernoulli(double p) { return uniform() < p; }

    std::array<u64, 4> state() const { return s_; }
    void set_state(const std::array<u64, 4>& s) { s_ = s; }

private:
    std::array<u64, 4> s_{};
};

}  // namespace c3
