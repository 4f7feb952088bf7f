#pragma once

// Nonnegative +-1 lattice paths: exact counts, weighted sums I and I+, and the
// comparison of both against their Brownian limits.

#include "airy/rational.hpp"

#include <optional>
#include <string>

namespace airy {

enum class FloorMode { Nonnegative, StayAboveStart };

struct PathCountQuery {
    long X = 0;  // steps
    long H = 0;  // start height
    long G = 0;  // end height
    FloorMode floor = FloorMode::Nonnegative;
    bool parity_valid() const { return (X + H + G) % 2 == 0; }
};

// Reflection principle: C(X, (X+H-G)/2) - C(X, (X+H+G)/2 + 1). StayAboveStart
// counts paths with F >= H and requires H <= G.
BigInt count_paths(const PathCountQuery& q);
// Exhaustive enumeration; X <= 24, otherwise ResourceError.
BigInt count_paths_bruteforce(const PathCountQuery& q);
// C_{X/2}; zero for odd X.
BigInt catalan_count(long X);

// I(X;H,G) = 2^{-X-1} sum_F prod_{down steps} (1 + 2 F(t)/(beta N)) by a
// transfer-matrix pass over (t, height). An empty beta means beta = infinity.
double weighted_sum_I(const PathCountQuery& q, std::optional<double> beta, long N);
Rational weighted_sum_I_exact(const PathCountQuery& q, std::optional<Rational> beta, long N);

// Integer grid point for (x, h, g) at scale N: X ~ x N^{2/3}, H ~ h N^{1/3},
// G ~ g N^{1/3}, with X moved by one towards x N^{2/3} when X + H + G is odd.
struct GridPoint {
    long X, H, G;
    double x, h, g;  // the grid point rescaled back; these enter the limits
};
GridPoint grid_point(double x, double h, double g, long N);

enum class CountKind { General, EndAtZero, Catalan };  // F, F0, F00

struct CountCheck {
    GridPoint grid;
    double discrete = 0;   // 2^{-X-1} N^{a} |F(X;H,G)| with a = 1/3, 2/3, 1
    double continuum = 0;  // F, F0 or F00 at the rescaled grid point
    double rel_error = 0;
    double budget = 0;     // the lemma's bracket with constant 1
    bool violated = false;
};

// Throws ArgumentError outside the lemma windows (x > N^{-2/3}, h, g > N^{-1/3}
// where they are used).
CountCheck asymptotic_count_check(double x, double h, double g, long N, CountKind kind,
                                  double constant = 1.0);

enum class KernelCase { One = 1, Two = 2, Three = 3, Four = 4 };

struct KernelCheck {
    GridPoint grid;
    double discrete = 0;  // scaled DP value
    double continuum = 0; // Monte Carlo value including the exp(+x h / beta) factor
    double stderr_ = 0;
    double tolerance = 0; // rel_tol * |continuum| + 3 stderr
    bool pass = false;
    bool budget_flag = false;  // 3 stderr alone exceeds rel_tol * |continuum|
};

// Cases: (1) N^{1/3} I(X;H,G) vs I(x;h,g); (2) N^{2/3} I(X;H,0) vs I0(x;h);
// (3) N^{2/3} I+(X;H,G) vs e^{xh/beta} I0(x;g-h); (4) N I+(X;H,H) vs e^{xh/beta} I00(x).
KernelCheck kernel_scaling_check(double x, double h, double g, double beta, long N,
                                 KernelCase which, long mc_budget, unsigned long seed,
                                 double rel_tol = 0.05, int mesh = 512);

}  // namespace airy
