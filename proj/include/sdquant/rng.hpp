#pragma once

#include "sdquant/types.hpp"

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace sdquant {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
} // namespace detail

// Deterministic random stream. A stream is identified by a 64-bit master
// seed plus a path of ids (trial indices, sweep indices, ...); streams with
// distinct paths are independent for Monte-Carlo purposes. The engine is
// std::mt19937_64 (bit-exact across platforms); the uniform/normal
// transforms below are hand-rolled for the same reason -- std::
// distributions are not portable bit-for-bit.
class RngStream {
public:
    explicit RngStream(std::uint64_t master, std::initializer_list<std::uint64_t> path = {}) {
        std::uint64_t s = master;
        std::uint64_t mixed = detail::splitmix64(s);
        for (std::uint64_t id : path) {
            s ^= id + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
            mixed = detail::splitmix64(s);
        }
        engine_.seed(mixed);
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n), unbiased (rejection sampling).
    std::uint64_t uniform_below(std::uint64_t n) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Standard normal via Box-Muller (caches the spare deviate).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * M_PI * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    Complex complex_normal() {
        const double re = normal();
        const double im = normal();
        return {re, im};
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace sdquant
