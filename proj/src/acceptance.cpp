#include "airy/acceptance.hpp"

#include "airy/blocks.hpp"
#include "airy/dunkl.hpp"
#include "airy/ensembles.hpp"
#include "airy/errors.hpp"
#include "airy/paths.hpp"
#include "airy/walks.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <map>

namespace airy {

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass;
    std::string detail;
};

Rational pow2(long e) {
    BigInt d;
    mpz_ui_pow_ui(d.get_mpz_t(), 2, static_cast<unsigned long>(e));
    return Rational(d);
}

Outcome a1(Tier tier, std::uint64_t) {
    const int n_max = tier == Tier::Full ? 3 : 2;
    const int k_max = tier == Tier::Full ? 4 : 3;
    long checks = 0, failures = 0;
    for (const Rational& beta : {Rational(1), Rational(2), Rational(7, 3)})
        for (int N = 1; N <= n_max; ++N)
            for (const Rational& tau : {Rational(1), Rational(Rational(2 * N) / beta)})
                for (int N1 = 1; N1 <= N; ++N1)
                    for (int i1 = 1; i1 <= N1; ++i1)
                        for (int k1 = 1; k1 <= k_max; ++k1) {
                            ++checks;
                            failures += !expansion_check({i1}, {k1}, {N1}, N, beta, tau).equal;
                            for (int N2 = 1; N2 <= N1; ++N2)
                                for (int i2 = 1; i2 <= N2; ++i2)
                                    for (int k2 = 1; k2 <= k_max; ++k2) {
                                        ++checks;
                                        failures += !expansion_check({i1, i2}, {k1, k2}, {N1, N2}, N,
                                                                     beta, tau)
                                                         .equal;
                                    }
                        }
    return {failures == 0, fmt::format("{} expansion identities, {} unequal", checks, failures)};
}

Outcome a2(Tier tier, std::uint64_t) {
    const int n_max = tier == Tier::Full ? 3 : 2;
    const int cap = tier == Tier::Full ? 6 : 4;
    long checks = 0, failures = 0;
    for (const Rational& beta : {Rational(1, 2), Rational(1), Rational(3, 2), Rational(2)})
        for (int N = 1; N <= n_max; ++N) {
            for (int k1 = 1; k1 <= 3; ++k1)
                for (int k2 = 1; k2 <= 3; ++k2) {
                    ++checks;
                    failures += !check_commutation(N, k1, k2, beta, Rational(1), cap);
                }
            for (int k : {2, 3}) {
                ++checks;
                failures += !check_nested_commutator(N, k, beta, Rational(1), cap);
            }
        }
    return {failures == 0, fmt::format("{} commutator identities at degree cap {}, {} failed", checks, cap,
                                       failures)};
}

Outcome a3(Tier tier, std::uint64_t) {
    const long x_max = tier == Tier::Full ? 14 : 10;
    long checks = 0, failures = 0;
    for (long X = 0; X <= x_max; ++X)
        for (long H = 0; H <= X; ++H)
            for (long G = 0; G <= X; ++G) {
                PathCountQuery q{X, H, G, FloorMode::Nonnegative};
                ++checks;
                failures += count_paths(q) != count_paths_bruteforce(q);
                if (H <= G) {
                    q.floor = FloorMode::StayAboveStart;
                    ++checks;
                    failures += count_paths(q) != count_paths_bruteforce(q);
                }
            }
    return {failures == 0, fmt::format("{} reflection counts against enumeration, {} differ", checks, failures)};
}

Outcome a4(Tier tier, std::uint64_t) {
    const long x_max = tier == Tier::Full ? 200 : 60;
    long checks = 0, failures = 0;
    for (long X = 0; X <= x_max; ++X)
        for (long H : {0L, 1L, 2L, 5L, 12L, 30L, 77L})
            for (long G : {0L, 1L, 3L, 6L, 12L, 31L, 80L}) {
                if (H > X || G > X) continue;
                for (auto mode : {FloorMode::Nonnegative, FloorMode::StayAboveStart}) {
                    if (mode == FloorMode::StayAboveStart && H > G) continue;
                    const PathCountQuery q{X, H, G, mode};
                    ++checks;
                    failures += weighted_sum_I_exact(q, std::nullopt, 7) * pow2(X + 1) != Rational(count_paths(q));
                }
            }
    return {failures == 0, fmt::format("{} weighted sums at beta = infinity for X <= {}, {} differ", checks,
                                       x_max, failures)};
}

Outcome a5(Tier tier, std::uint64_t seed) {
    const long N = tier == Tier::Full ? 1000000 : 100000;
    const long budget = tier == Tier::Full ? 1000000 : 20000;
    const auto c1 = kernel_scaling_check(1, 1, 1, 2.0, N, KernelCase::One, budget, seed);
    const auto c4 = kernel_scaling_check(1, 0, 0, 2.0, N, KernelCase::Four, budget, seed + 1);
    return {c1.pass && c4.pass,
            fmt::format("case 1: discrete {:.6f} vs {:.6f} +- {:.2e} (tol {:.2e}); case 4: discrete {:.6f} vs "
                        "{:.6f} +- {:.2e} (tol {:.2e})",
                        c1.discrete, c1.continuum, c1.stderr_, c1.tolerance, c4.discrete, c4.continuum,
                        c4.stderr_, c4.tolerance)};
}

Outcome a6(Tier tier, std::uint64_t seed) {
    const long n = tier == Tier::Full ? 1000000 : 20000;
    const Rational beta(3, 2), tau(1);
    bool pass = true;
    std::string detail;
    for (int k : {2, 4}) {
        MomentQuery q;
        q.powers = {k};
        q.rows = {3};
        const auto e = corners_moment_mc(q, 3, 1.5, 1.0, n, seed + k);
        const double exact = corners_moment({k}, {3}, 3, beta, tau).get_d();
        const bool ok = std::abs(e.mean - exact) < 3 * e.stderr_;
        pass = pass && ok;
        detail += fmt::format("corners k={}: {:.5f} +- {:.5f} vs {:.5f}; ", k, e.mean, e.stderr_, exact);
    }
    MomentQuery q;
    q.mode = EnsembleMode::Dbm;
    q.powers = {2};
    q.times = {1.0};
    const auto d = dbm_moment_mc(q, 4, 2.0, 1e-3, n, seed + 5);
    const double exact = dbm_moment({2}, {Rational(1)}, 4, Rational(2)).get_d();
    const double dt_budget = d.em_excess + 3 * d.em_excess_stderr;
    pass = pass && std::abs(d.estimate.mean - exact) < 3 * d.estimate.stderr_ + dt_budget;
    detail += fmt::format("DBM k=2 (dt 1e-3): {:.5f} +- {:.5f} vs {:.5f}, dt budget {:.4f}", d.estimate.mean,
                          d.estimate.stderr_, exact, dt_budget);
    return {pass, detail};
}

Outcome a7(Tier tier, std::uint64_t seed) {
    const std::vector<int> Ns{16, 32, 64};
    std::vector<double> s;
    for (int N : Ns) s.push_back(scaled_edge_moment(N, {1}, {0}, Rational(2)).value);
    const double d1 = std::abs(s[1] - s[0]), d2 = std::abs(s[2] - s[1]);
    const std::vector<double> eps{0.4, 0.2, 0.1};
    std::vector<double> vals, errs;
    bool flagged = false;
    for (double e : eps) {
        LQuery q;
        q.kappa = {1};
        q.taus = {0};
        q.beta = 2;
        q.epsilon = e;
        q.delta_max = 2;
        q.mc_budget = tier == Tier::Full ? 200000 : 10000;
        q.mesh = tier == Tier::Full ? 128 : 32;
        q.seed = seed;
        const auto r = L_beta_truncated(q);
        vals.push_back(r.total.mean);
        errs.push_back(r.total.stderr_);
        for (const auto& st : r.strata) flagged = flagged || st.flagged;
    }
    const auto x = epsilon_extrapolate(eps, vals, errs);
    const double tol = 0.10 * std::abs(s[2]) + 3 * x.uncertainty;
    // k = round(N^{2/3}) is 6, 10, 16 here; the rounding offsets can outweigh the
    // finite-N drift, so the trend half is reported on its own.
    const bool trend = d2 < d1, agree = std::abs(x.value - s[2]) <= tol;
    return {trend && agree,
            fmt::format("trend {}, agreement {}: ", trend ? "ok" : "VIOLATED", agree ? "ok" : "VIOLATED") +
            fmt::format("edge moments {:.6f}, {:.6f}, {:.6f} (diffs {:.2e}, {:.2e}); L_beta(eps) {:.4f}, "
                              "{:.4f}, {:.4f} -> {:.4f} +- {:.4f}{}; |diff| {:.4f} vs tol {:.4f}",
                              s[0], s[1], s[2], d1, d2, vals[0], vals[1], vals[2], x.value, x.uncertainty,
                              flagged ? " (flagged strata)" : "", std::abs(x.value - s[2]), tol)};
}

Outcome a8(Tier tier, std::uint64_t seed) {
    const int n = tier == Tier::Full ? 100000 : 10000;
    const std::vector<double> lambda{1.3, -0.4};
    bool pass = true;
    std::string detail;
    for (double beta : {1.0, 2.0, 4.0}) {
        Rng rng(seed + static_cast<std::uint64_t>(beta));
        std::vector<double> w(n);
        for (auto& v : w) v = (lambda[0] - corners_level_down(lambda, beta, rng)[0]) / (lambda[0] - lambda[1]);
        const auto ks = ks_test(w, [beta](double x) {
            return boost::math::ibeta(beta / 2, beta / 2, std::clamp(x, 0.0, 1.0));
        });
        pass = pass && ks.p_value > 0.01;
        detail += fmt::format("beta {}: D {:.4f} p {:.3f}; ", beta, ks.statistic, ks.p_value);
    }
    Rng rng(seed + 99);
    std::vector<double> u(n);
    for (auto& v : u) {
        const auto c = sample_gbe_corners(2, 2.0, 1.0, rng);
        v = (c.rows[0][0] - c.rows[1][1]) / (c.rows[1][0] - c.rows[1][1]);
    }
    const auto ks = ks_test(u, [](double x) { return std::clamp(x, 0.0, 1.0); });
    pass = pass && ks.p_value > 0.01;
    detail += fmt::format("beta 2 uniform given top row: D {:.4f} p {:.3f}", ks.statistic, ks.p_value);
    return {pass, detail};
}

Outcome a9(Tier tier, std::uint64_t seed) {
    const long n = tier == Tier::Full ? 100000 : 5000;
    const double dt = tier == Tier::Full ? 1e-4 : 1e-3;
    MomentQuery q;
    q.mode = EnsembleMode::Dbm;
    q.powers = {2};
    q.times = {1.0};
    const auto d = dbm_moment_mc(q, 4, 2.0, dt, n, seed);
    const double exact = 4 + 2.0 * 4 * 3 / 2;
    const double dt_budget = d.em_excess + 3 * d.em_excess_stderr;
    return {std::abs(d.estimate.mean - exact) < 3 * d.estimate.stderr_ + dt_budget,
            fmt::format("E sum Y(1)^2 = {:.5f} +- {:.5f} vs {} (dt {:g}, {} paths, dt budget {:.5f})",
                        d.estimate.mean, d.estimate.stderr_, exact, dt, n, dt_budget)};
}

Outcome a10(Tier tier, std::uint64_t seed) {
    const int N = 200;
    const long n = tier == Tier::Full ? 100000 : 3000;
    Rng rng(seed);
    double mean = 0, m2 = 0;
    for (long s = 1; s <= n; ++s) {
        CornersArray c;
        c.beta = 2;
        c.rows.resize(N);
        c.rows[N - 1] = sample_gbe(N, 2.0, 1.0, rng).values;
        const double v = edge_rescale(c, {0}, 1).top[0][0];
        const double d = v - mean;
        mean += d / s;
        m2 += d * (v - mean);
    }
    const double se = std::sqrt(m2 / (n - 1) / n);
    const double target = -1.7711;
    return {std::abs(mean - target) < 0.15,
            fmt::format("mean rescaled top particle {:.4f} +- {:.4f} at N = {} over {} samples; offset {:+.4f}", mean,
                        se, N, n, mean - target)};
}

Outcome a11(Tier, std::uint64_t) {
    const auto b = illustrated_blocks();
    const auto violations = validate_blocks(b);
    if (!violations.empty()) return {false, "validator rejects the illustrated blocks: " + violations.front()};
    const auto xi = xi_partition(b);
    const std::vector<int> expected{2, 4, 3, 1, 4, 4, 3, 1, 3, 3};
    std::string got;
    bool match = xi.size() == expected.size();
    for (std::size_t i = 0; i < xi.size(); ++i) {
        got += std::to_string(xi[i].cls);
        match = match && xi[i].cls == expected[i];
    }
    return {match && b.bp.delta() == 5,
            fmt::format("delta {}, {} segments, classes {} (expected 2431443133)", b.bp.delta(), xi.size(), got)};
}

struct Entry {
    const char* title;
    Outcome (*fn)(Tier, std::uint64_t);
};

const std::map<std::string, Entry>& registry() {
    static const std::map<std::string, Entry> r{
        {"A1", {"exact walk expansion identity", a1}},
        {"A2", {"commutation and nested commutator", a2}},
        {"A3", {"path counts against enumeration", a3}},
        {"A4", {"beta = infinity weighted sums are path counts", a4}},
        {"A5", {"discrete-to-continuum kernels", a5}},
        {"A6", {"exact moments against Monte Carlo", a6}},
        {"A7", {"edge moment trend and truncated L_beta", a7}},
        {"A8", {"corners level-down law", a8}},
        {"A9", {"DBM marginal second moment", a9}},
        {"A10", {"Tracy-Widom GUE mean beacon", a10}},
        {"A11", {"illustrated blocks and kernel classes", a11}},
    };
    return r;
}

}  // namespace

std::vector<std::string> criterion_ids() {
    std::vector<std::string> ids;
    for (int i = 1; i <= 11; ++i) ids.push_back("A" + std::to_string(i));
    return ids;
}

CriterionResult run_criterion(const std::string& id, Tier tier, std::uint64_t seed) {
    const auto it = registry().find(id);
    require(it != registry().end(), "unknown acceptance criterion " + id);
    CriterionResult r;
    r.id = id;
    r.title = it->second.title;
    const auto t0 = Clock::now();
    try {
        const auto o = it->second.fn(tier, seed);
        r.pass = o.pass;
        r.detail = o.detail;
    } catch (const std::exception& e) {
        r.pass = false;
        r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return r;
}

std::vector<CriterionResult> run_acceptance(Tier tier, const std::vector<std::string>& ids, std::uint64_t seed,
                                            const std::function<void(const CriterionResult&)>& report) {
    std::vector<CriterionResult> out;
    for (const auto& id : ids.empty() ? criterion_ids() : ids) {
        out.push_back(run_criterion(id, tier, seed));
        if (report) report(out.back());
    }
    return out;
}

}  // namespace airy
