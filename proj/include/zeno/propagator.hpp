// propagator.hpp — Exact propagators for count-ladder systems
//
// A count-resolved linear system u_n' = A0 u_n + A1 u_{n-1} has the
// block-Toeplitz generator M = A0 (x) I + A1 (x) S, with S the ladder shift.
// Its exponential is again lower block-Toeplitz: exp(hM) = sum_k F_k (x) S^k.
// The blocks F_0..F_K are computed exactly (to rounding) by scaling and
// squaring in the ring of degree-K block polynomials in S; truncation at
// degree K does not perturb the retained blocks.

#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace zeno {

// Row-major 4x4 block.
using Block4 = std::array<double, 16>;

inline double& at(Block4& m, std::size_t r, std::size_t c) noexcept { return m[4 * r + c]; }
inline double at(const Block4& m, std::size_t r, std::size_t c) noexcept { return m[4 * r + c]; }

Block4 identity_block() noexcept;
Block4 multiply(const Block4& a, const Block4& b) noexcept;
double max_row_sum(const Block4& a) noexcept;

// Degree K at which a Poisson-like tail (rate*h)^k / k! drops below 1e-20.
std::size_t ladder_degree(double rate_times_h);

// Number of halvings that bring the scaled generator norm below 1/2.
int squarings_for(double generator_norm);

// Blocks F_0..F_max_degree of exp(h (A0 (x) I + A1 (x) S)).
// `squarings` < 0 selects the count automatically; a fixed value lets several
// propagators share identical rounding in common sub-blocks.
std::vector<Block4> toeplitz_exponential(const Block4& a0, const Block4& a1, double h,
                                         std::size_t max_degree, int squarings = -1);

// exp(h A) for a single block.
Block4 block_exponential(const Block4& a, double h, int squarings = -1);

}  // namespace zeno
