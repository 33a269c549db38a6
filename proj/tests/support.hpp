// Hand-rolled generators for property tests. Fixed seeds keep failures reproducible.

#pragma once

#include <cstddef>
#include <cmath>
#include <cstdint>
#include <random>

namespace zeno::testing {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double log_uniform(double lo, double hi);
    std::size_t odd(std::size_t lo, std::size_t hi) {
        std::size_t n = std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
        return n % 2 == 0 ? n + 1 : n;
    }

private:
    std::mt19937_64 rng_;
};

inline double Gen::log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
}

inline constexpr int kCases = 40;

}  // namespace zeno::testing
