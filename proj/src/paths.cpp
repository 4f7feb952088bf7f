#include "airy/paths.hpp"

#include "airy/bridges.hpp"
#include "airy/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace airy {

namespace {

BigInt binomial(long n, long k) {
    if (k < 0 || k > n) return 0;
    BigInt out;
    mpz_bin_uiui(out.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
    return out;
}

void check_query(const PathCountQuery& q) {
    require(q.X >= 0 && q.H >= 0 && q.G >= 0, "X, H, G must be nonnegative");
    if (q.floor == FloorMode::StayAboveStart) require(q.H <= q.G, "stay_above_start needs H <= G");
}

// Shift a stay-above-start query to an ordinary one from height zero.
PathCountQuery normalized(const PathCountQuery& q) {
    if (q.floor == FloorMode::Nonnegative) return q;
    return {q.X, 0, q.G - q.H, FloorMode::Nonnegative};
}

}  // namespace

BigInt count_paths(const PathCountQuery& query) {
    check_query(query);
    const auto q = normalized(query);
    if (!q.parity_valid() || std::abs(q.H - q.G) > q.X) return 0;
    return binomial(q.X, (q.X + q.H - q.G) / 2) - binomial(q.X, (q.X + q.H + q.G) / 2 + 1);
}

BigInt count_paths_bruteforce(const PathCountQuery& q) {
    check_query(q);
    if (q.X > 24) throw ResourceError("brute force limited to X <= 24");
    const long floor = q.floor == FloorMode::Nonnegative ? 0 : q.H;
    long count = 0;
    for (unsigned long bits = 0; bits < (1UL << q.X); ++bits) {
        long y = q.H;
        bool ok = true;
        for (long t = 0; t < q.X && ok; ++t) {
            y += (bits >> t) & 1UL ? 1 : -1;
            ok = y >= floor;
        }
        if (ok && y == q.G) ++count;
    }
    return count;
}

BigInt catalan_count(long X) {
    require(X >= 0, "X must be nonnegative");
    if (X % 2) return 0;
    return binomial(X, X / 2) / (X / 2 + 1);
}

namespace {

// One transfer-matrix pass. Each step carries a factor 1/2 so values stay
// bounded; the last factor 1/2 of 2^{-X-1} is applied by the caller.
template <typename T, typename Factor>
T weighted_dp(const PathCountQuery& query, Factor&& down_factor) {
    check_query(query);
    const long floor = query.floor == FloorMode::Nonnegative ? 0 : query.H;
    if (!query.parity_valid() || std::abs(query.H - query.G) > query.X) return T(0);
    const long top = query.X + std::max(query.H, query.G);
    std::vector<T> cur(top + 2, T(0)), next(top + 2, T(0));
    cur[query.H] = T(1);
    long lo = query.H, hi = query.H;
    for (long t = 1; t <= query.X; ++t) {
        const long left = query.X - t;
        const long nlo = std::max({floor, lo - 1, query.G - left});
        const long nhi = std::min({top, hi + 1, query.G + left});
        for (long y = nlo; y <= nhi; ++y) next[y] = T(0);
        for (long y = lo; y <= hi; ++y) {
            if (cur[y] == T(0)) continue;
            if (y + 1 >= nlo && y + 1 <= nhi) next[y + 1] += cur[y] / 2;
            if (y - 1 >= nlo && y - 1 <= nhi) next[y - 1] += cur[y] * down_factor(y - 1) / 2;
        }
        for (long y = lo; y <= hi; ++y)
            if (y < nlo || y > nhi) cur[y] = T(0);
        for (long y = nlo; y <= nhi; ++y) cur[y] = next[y];
        lo = nlo;
        hi = nhi;
        if (lo > hi) return T(0);
    }
    return cur[query.G] / 2;
}

}  // namespace

double weighted_sum_I(const PathCountQuery& q, std::optional<double> beta, long N) {
    require(N >= 1, "N must be positive");
    if (beta) require(*beta > 0, "beta must be positive");
    const double c = beta ? 2.0 / (*beta * N) : 0.0;
    return static_cast<double>(weighted_dp<long double>(q, [&](long f) {
        return 1.0L + static_cast<long double>(c) * f;
    }));
}

Rational weighted_sum_I_exact(const PathCountQuery& q, std::optional<Rational> beta, long N) {
    require(N >= 1, "N must be positive");
    if (beta) require(*beta > 0, "beta must be positive");
    const Rational c = beta ? Rational(2) / (*beta * N) : Rational(0);
    return weighted_dp<Rational>(q, [&](long f) -> Rational { return 1 + c * f; });
}

GridPoint grid_point(double x, double h, double g, long N) {
    require(N >= 1, "N must be positive");
    require(x > 0 && h >= 0 && g >= 0, "need x > 0 and h, g >= 0");
    const double s2 = std::pow(static_cast<double>(N), 2.0 / 3.0);
    const double s1 = std::cbrt(static_cast<double>(N));
    GridPoint p{};
    p.X = std::lround(x * s2);
    p.H = std::lround(h * s1);
    p.G = std::lround(g * s1);
    if ((p.X + p.H + p.G) % 2 != 0) p.X += (x * s2 > p.X || p.X == 0) ? 1 : -1;
    p.x = p.X / s2;
    p.h = p.H / s1;
    p.g = p.G / s1;
    return p;
}

CountCheck asymptotic_count_check(double x, double h, double g, long N, CountKind kind,
                                  double constant) {
    const double n = static_cast<double>(N);
    require(x > std::pow(n, -2.0 / 3.0), "x below the lemma window N^{-2/3}");
    if (kind != CountKind::Catalan) require(h > std::pow(n, -1.0 / 3.0), "h below N^{-1/3}");
    if (kind == CountKind::General) require(g > std::pow(n, -1.0 / 3.0), "g below N^{-1/3}");
    if (kind == CountKind::EndAtZero) g = 0;
    if (kind == CountKind::Catalan) h = g = 0;

    CountCheck out;
    out.grid = grid_point(x, h, g, N);
    const auto& p = out.grid;
    const BigInt count = count_paths({p.X, p.H, p.G, FloorMode::Nonnegative});
    BigInt denom;
    mpz_ui_pow_ui(denom.get_mpz_t(), 2, static_cast<unsigned long>(p.X + 1));
    const double ratio = Rational(count, denom).get_d();
    const double head = std::min(1.0, std::pow(n, -0.6) / (p.x * p.x * p.x));
    switch (kind) {
        case CountKind::General:
            out.discrete = ratio * std::cbrt(n);
            out.continuum = F(p.x, p.h, p.g);
            out.budget = head + std::pow(n, -0.1) + std::pow(n, -1.0 / 3.0) * (1 / p.h + 1 / p.g);
            break;
        case CountKind::EndAtZero:
            out.discrete = ratio * std::pow(n, 2.0 / 3.0);
            out.continuum = F0(p.x, p.h);
            out.budget = head + std::pow(n, -0.1) + std::pow(n, -1.0 / 3.0) / p.h;
            break;
        case CountKind::Catalan:
            out.discrete = ratio * n;
            out.continuum = F00(p.x);
            out.budget = std::pow(n, -2.0 / 3.0) / p.x;
            break;
    }
    out.budget = constant * std::min(1.0, out.budget);
    out.rel_error = std::abs(out.discrete - out.continuum) / out.continuum;
    out.violated = out.rel_error > out.budget;
    return out;
}

KernelCheck kernel_scaling_check(double x, double h, double g, double beta, long N,
                                 KernelCase which, long mc_budget, unsigned long seed,
                                 double rel_tol, int mesh) {
    require(beta > 0, "beta must be positive");
    const double n = static_cast<double>(N);
    KernelCheck out;
    FunctionalEstimate est;
    double pre = 1;
    switch (which) {
        case KernelCase::One: {
            out.grid = grid_point(x, h, g, N);
            const auto& p = out.grid;
            require(p.H > 0 && p.G > 0, "case 1 needs positive heights");
            out.discrete = std::cbrt(n) * weighted_sum_I({p.X, p.H, p.G}, beta, N);
            est = I_mc(p.x, p.h, p.g, beta, mc_budget, seed, mesh);
            break;
        }
        case KernelCase::Two: {
            out.grid = grid_point(x, h, 0, N);
            const auto& p = out.grid;
            require(p.H > 0, "case 2 needs a positive start height");
            out.discrete = std::pow(n, 2.0 / 3.0) * weighted_sum_I({p.X, p.H, 0}, beta, N);
            est = I0_mc(p.x, p.h, beta, mc_budget, seed, mesh);
            break;
        }
        case KernelCase::Three: {
            require(g > h, "case 3 needs g > h");
            out.grid = grid_point(x, h, g, N);
            const auto& p = out.grid;
            require(p.G > p.H, "case 3 needs G > H after rounding");
            out.discrete = std::pow(n, 2.0 / 3.0) *
                           weighted_sum_I({p.X, p.H, p.G, FloorMode::StayAboveStart}, beta, N);
            pre = std::exp(p.x * p.h / beta);
            est = I0_mc(p.x, p.g - p.h, beta, mc_budget, seed, mesh);
            break;
        }
        case KernelCase::Four: {
            out.grid = grid_point(x, h, h, N);
            const auto& p = out.grid;
            out.discrete = n * weighted_sum_I({p.X, p.H, p.H, FloorMode::StayAboveStart}, beta, N);
            pre = std::exp(p.x * p.h / beta);
            est = I00_mc(p.x, beta, mc_budget, seed, mesh);
            break;
        }
    }
    out.continuum = pre * est.mean;
    out.stderr_ = pre * est.stderr_;
    out.tolerance = rel_tol * std::abs(out.continuum) + 3 * out.stderr_;
    out.pass = std::abs(out.discrete - out.continuum) <= out.tolerance;
    out.budget_flag = 3 * out.stderr_ > rel_tol * std::abs(out.continuum);
    return out;
}

}  // namespace airy
