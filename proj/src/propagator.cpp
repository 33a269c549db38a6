#include "zeno/propagator.hpp"

#include <algorithm>
#include <cmath>

namespace zeno {

namespace {

void add_product(Block4& out, const Block4& a, const Block4& b) noexcept {
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t k = 0; k < 4; ++k) {
            const double ark = a[4 * r + k];
            if (ark == 0.0) continue;
            for (std::size_t c = 0; c < 4; ++c) {
                out[4 * r + c] += ark * b[4 * k + c];
            }
        }
    }
}

double max_abs(const std::vector<Block4>& series) noexcept {
    double m = 0.0;
    for (const auto& b : series)
        for (double v : b) m = std::max(m, std::abs(v));
    return m;
}

// (P * Q) truncated to the length of P.
std::vector<Block4> ring_multiply(const std::vector<Block4>& p, const std::vector<Block4>& q) {
    std::vector<Block4> out(p.size(), Block4{});
    for (std::size_t k = 0; k < out.size(); ++k) {
        for (std::size_t j = 0; j <= k; ++j) {
            add_product(out[k], p[j], q[k - j]);
        }
    }
    return out;
}

}  // namespace

Block4 identity_block() noexcept {
    Block4 id{};
    for (std::size_t i = 0; i < 4; ++i) id[5 * i] = 1.0;
    return id;
}

Block4 multiply(const Block4& a, const Block4& b) noexcept {
    Block4 out{};
    add_product(out, a, b);
    return out;
}

double max_row_sum(const Block4& a) noexcept {
    double best = 0.0;
    for (std::size_t r = 0; r < 4; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < 4; ++c) s += std::abs(a[4 * r + c]);
        best = std::max(best, s);
    }
    return best;
}

std::size_t ladder_degree(double rate_times_h) {
    if (!(rate_times_h > 0.0)) return 0;
    // log of x^k / k!, accumulated until below log(1e-20) past the mode.
    const double target = std::log(1e-20);
    double log_term = 0.0;
    std::size_t k = 0;
    while (true) {
        ++k;
        log_term += std::log(rate_times_h) - std::log(static_cast<double>(k));
        if (static_cast<double>(k) > rate_times_h && log_term < target) return k;
    }
}

int squarings_for(double generator_norm) {
    if (!(generator_norm > 0.5)) return 0;
    return static_cast<int>(std::ceil(std::log2(generator_norm / 0.5)));
}

std::vector<Block4> toeplitz_exponential(const Block4& a0, const Block4& a1, double h,
                                         std::size_t max_degree, int squarings) {
    const double norm = h * (max_row_sum(a0) + max_row_sum(a1));
    const int s = squarings < 0 ? squarings_for(norm) : squarings;
    const double scale = h / std::ldexp(1.0, s);

    Block4 x0{}, x1{};
    for (std::size_t i = 0; i < 16; ++i) {
        x0[i] = a0[i] * scale;
        x1[i] = a1[i] * scale;
    }

    const std::size_t len = max_degree + 1;
    std::vector<Block4> result(len, Block4{});
    std::vector<Block4> term(len, Block4{});
    result[0] = identity_block();
    term[0] = identity_block();

    // Taylor series of exp(X0 + X1 S) in the truncated ring.
    for (int j = 1; j <= 60; ++j) {
        std::vector<Block4> next(len, Block4{});
        const double inv_j = 1.0 / j;
        for (std::size_t k = 0; k < len; ++k) {
            add_product(next[k], term[k], x0);
            if (k > 0) add_product(next[k], term[k - 1], x1);
            for (double& v : next[k]) v *= inv_j;
        }
        term = std::move(next);
        for (std::size_t k = 0; k < len; ++k)
            for (std::size_t i = 0; i < 16; ++i) result[k][i] += term[k][i];
        if (max_abs(term) <= 1e-18 * max_abs(result)) break;
    }

    for (int i = 0; i < s; ++i) result = ring_multiply(result, result);
    return result;
}

Block4 block_exponential(const Block4& a, double h, int squarings) {
    return toeplitz_exponential(a, Block4{}, h, 0, squarings).front();
}

}  // namespace zeno
