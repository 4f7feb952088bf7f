#include "airy/dunkl.hpp"
#include "airy/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace airy;

namespace {

Rational Q(const char* s) { return parse_rational(s); }

// E[sum lambda_i^2] under density prop. to |l1-l2|^2 exp(-(l1^2+l2^2)/2), by a
// tensor trapezoid rule. Independent of the operator machinery.
double gue2_second_moment_quadrature() {
    const int n = 801;
    const double L = 10.0, h = 2 * L / (n - 1);
    double z = 0, m2 = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double a = -L + i * h, b = -L + j * h;
            double w = (a - b) * (a - b) * std::exp(-(a * a + b * b) / 2);
            z += w;
            m2 += w * (a * a + b * b);
        }
    }
    return m2 / z;
}

SymPoly random_sympoly(std::mt19937_64& rng, int n, int max_deg) {
    SymPoly f;
    std::uniform_int_distribution<int> coef(-5, 5);
    for (int t = 0; t < 4; ++t) {
        Partition lam;
        int left = std::uniform_int_distribution<int>(0, max_deg)(rng);
        while (left > 0 && static_cast<int>(lam.size()) < n) {
            int part = std::uniform_int_distribution<int>(1, left)(rng);
            lam.push_back(part);
            left -= part;
        }
        std::sort(lam.begin(), lam.end(), std::greater<int>());
        f[lam] += coef(rng);
        if (f[lam] == 0) f.erase(lam);
    }
    return f;
}

}  // namespace

TEST(RawDunkl, SingleVariableSecondPowerGivesTau) {
    OperatorSpec spec{1, Q("7/3"), Q("2"), 1};
    RawPoly p = apply_dunkl_power(RawPoly::constant(1, 1), 1, 2, spec);
    EXPECT_EQ(p.constant_term(), Q("7/3"));
}

TEST(RawDunkl, WorkedExampleSevenMonomials) {
    const Rational beta = Q("3/2");
    const int N = 5;
    OperatorSpec spec{N, Rational(2 * N) / beta, beta, 1};
    RawPoly p = apply_dunkl(RawPoly::monomial({5, 2, 0, 1, 0}), 2, spec);
    ASSERT_EQ(p.terms().size(), 7u);
    EXPECT_EQ(p.coefficient({5, 3, 0, 1, 0}), Rational(2 * N) / beta);
    EXPECT_EQ(p.coefficient({5, 1, 0, 1, 0}), 2 + 3 * beta / 2);
    EXPECT_EQ(p.coefficient({5, 0, 1, 1, 0}), beta / 2);
    EXPECT_EQ(p.coefficient({5, 0, 0, 1, 1}), beta / 2);
    EXPECT_EQ(p.coefficient({4, 2, 0, 1, 0}), -beta / 2);
    EXPECT_EQ(p.coefficient({3, 3, 0, 1, 0}), -beta / 2);
    EXPECT_EQ(p.coefficient({2, 4, 0, 1, 0}), -beta / 2);
}

TEST(RawDunkl, EqualDegreesLeaveOnlyDerivativeAndTau) {
    OperatorSpec spec{3, Q("1/2"), Q("5/2"), 1};
    RawPoly p = apply_dunkl(RawPoly::monomial({2, 2, 2}), 1, spec);
    ASSERT_EQ(p.terms().size(), 2u);
    EXPECT_EQ(p.coefficient({3, 2, 2}), Q("1/2"));
    EXPECT_EQ(p.coefficient({1, 2, 2}), 2);
}

TEST(RawDunkl, IndexOutsideRangeIsArgumentError) {
    OperatorSpec spec{2, 1, 2, 1};
    EXPECT_THROW(apply_dunkl(RawPoly::constant(2, 1), 3, spec), ArgumentError);
}

TEST(RawDunkl, DegreeCapRaisesResourceError) {
    OperatorSpec spec{1, 1, 2, 1};
    EngineLimits lim;
    lim.max_degree = 3;
    EXPECT_THROW(apply_dunkl_power(RawPoly::constant(1, 1), 1, 5, spec, lim), ResourceError);
}

TEST(PowerSum, SmallCases) {
    const Rational tau = Q("3/4");
    EXPECT_EQ(apply_power_sum(RawPoly::constant(1, 1), OperatorSpec{1, tau, 2, 2}).constant_term(), tau);
    for (int N = 1; N <= 4; ++N)
        EXPECT_EQ(apply_power_sum(RawPoly::constant(N, 1), OperatorSpec{N, tau, Q("3/2"), 1}).constant_term(), 0);
    EXPECT_EQ(apply_power_sum(RawPoly::constant(2, 1), OperatorSpec{2, 1, 2, 2}).constant_term(), 4);
}

TEST(PowerSum, QuadratureOracleForTwoByTwoGue) {
    EXPECT_NEAR(gue2_second_moment_quadrature(), 4.0, 1e-6);
    EXPECT_EQ(corners_moment({2}, {2}, 2, 2, 1), 4);
}

TEST(PowerSum, SymmetricEngineMatchesRaw) {
    std::mt19937_64 rng(11);
    const Rational betas[] = {Q("1/2"), Q("1"), Q("7/3")};
    for (int N = 1; N <= 4; ++N) {
        for (int k = 1; k <= 3; ++k) {
            for (const auto& beta : betas) {
                SymPoly f = random_sympoly(rng, N, 4);
                OperatorSpec spec{N, Q("5/3"), beta, k};
                RawPoly via_sym = expand(apply_power_sum(f, spec), N);
                RawPoly via_raw = apply_power_sum(expand(f, N), spec);
                EXPECT_TRUE(via_sym == via_raw) << "N=" << N << " k=" << k;
            }
        }
    }
}

TEST(Profile, MarkedDunklMatchesRawOnOrbitSums) {
    // x_1^a m_mu(x_2..x_n) expanded, then D_1 applied raw.
    const int n = 4;
    OperatorSpec spec{n, Q("2/5"), Q("3/2"), 1};
    const std::vector<std::pair<int, std::vector<int>>> cases = {
        {0, {}}, {3, {1}}, {1, {3, 1}}, {2, {2, 2}}, {4, {2, 1, 1}}, {0, {3, 3}}};
    for (const auto& [a, mu] : cases) {
        ProfileSum st{{DegreeProfile{a, mu}, Rational(1)}};
        ProfileSum img = apply_dunkl(st, spec);

        auto orbit = [&](int marked, const std::vector<int>& rest, const Rational& c) {
            SymPoly others{{rest, c}};
            RawPoly tail = expand(others, n - 1);
            RawPoly full(n);
            for (const auto& [e, v] : tail.terms()) {
                Exponents x{marked};
                x.insert(x.end(), e.begin(), e.end());
                full.add(x, v);
            }
            return full;
        };
        RawPoly expected = apply_dunkl(orbit(a, mu, 1), 1, spec);
        RawPoly got(n);
        for (const auto& [prof, c] : img) got += orbit(prof.marked, prof.rest, c);
        EXPECT_TRUE(got == expected) << "a=" << a;
    }
}

TEST(Moments, SingleVariableAndOddVanish) {
    EXPECT_EQ(corners_moment({2}, {1}, 1, Q("5/2"), Q("9/7")), Q("9/7"));
    EXPECT_EQ(corners_moment({4}, {1}, 1, Q("5/2"), Q("2")), 12);  // 3 tau^2
    for (int N = 1; N <= 4; ++N)
        for (int k : {1, 3, 5}) EXPECT_EQ(corners_moment({k}, {N}, N, Q("3/2"), 1), 0);
    EXPECT_EQ(corners_moment({2, 1}, {3, 2}, 3, Q("3/2"), 1), 0);
    EXPECT_EQ(dbm_moment({1, 2}, {Q("1/2"), Q("1")}, 3, Q("3/2")), 0);
}

TEST(Moments, SecondMomentTraceIdentity) {
    // E Tr H^2 = tau (N + beta N (N-1)/2) for the tridiagonal model.
    for (int N = 1; N <= 5; ++N) {
        for (const auto& beta : {Q("1/2"), Q("3/2"), Q("4")}) {
            const Rational tau = Q("3/5");
            Rational expected = tau * (N + beta * N * (N - 1) / 2);
            EXPECT_EQ(corners_moment({2}, {N}, N, beta, tau), expected);
        }
    }
}

TEST(Moments, CornersAgreesWithRawProduct) {
    const Rational beta = Q("7/3"), tau = Q("2");
    const std::vector<std::vector<int>> rows = {{3, 3}, {3, 2}, {3, 1}, {2, 2}};
    for (const auto& r : rows) {
        for (int k1 = 1; k1 <= 3; ++k1) {
            for (int k2 = 1; k2 <= 3; ++k2) {
                RawPoly p = RawPoly::constant(3, 1);
                p = apply_power_sum(p, OperatorSpec{r[0], tau, beta, k1});
                p = apply_power_sum(p, OperatorSpec{r[1], tau, beta, k2});
                EXPECT_EQ(corners_moment({k1, k2}, r, 3, beta, tau), p.constant_term());
            }
        }
    }
}

TEST(Moments, CornersEqualsDbmForOneTime) {
    for (int N = 1; N <= 4; ++N)
        for (int k = 1; k <= 6; ++k)
            for (const auto& beta : {Q("1"), Q("5/2")})
                EXPECT_EQ(corners_moment({k}, {N}, N, beta, Q("4/3")), dbm_moment({k}, {Q("4/3")}, N, beta));
}

TEST(Moments, DbmBrownianCovariance) {
    EXPECT_EQ(dbm_moment({1, 1}, {Q("1/3"), Q("2")}, 1, 2), Q("1/3"));
    EXPECT_EQ(dbm_moment({2}, {Q("5/2")}, 1, 2), Q("5/2"));
}

TEST(Moments, DbmCenterOfMassIsBrownian) {
    // sum_i Y_i is sqrt(N) times a standard Brownian motion: E = N min(s,t).
    for (int N = 1; N <= 4; ++N)
        EXPECT_EQ(dbm_moment({1, 1}, {Q("1/2"), Q("3/2")}, N, Q("3/2")), Rational(N) / 2);
}

TEST(Moments, ArgumentValidation) {
    EXPECT_THROW(corners_moment({2, 2}, {2, 3}, 3, 2, 1), ArgumentError);
    EXPECT_THROW(dbm_moment({2, 2}, {Q("2"), Q("1")}, 3, 2), ArgumentError);
}

TEST(Moments, ReversedSummationOrderIsIdentical) {
    OperatorSpec spec{3, Q("3/2"), Q("7/3"), 4};
    RawPoly forward = apply_power_sum(RawPoly::constant(3, 1), spec);
    RawPoly backward(3);
    for (int i = 3; i >= 1; --i) backward += apply_dunkl_power(RawPoly::constant(3, 1), i, 4, spec);
    EXPECT_TRUE(forward == backward);
}

TEST(Identities, CommutationExamples) {
    EXPECT_TRUE(check_commutation(2, 1, 2, Q("3/2"), Q("5/7"), 6));
    EXPECT_TRUE(check_commutation(3, 2, 3, Q("1"), Q("1"), 5));
    // P_1 does not depend on beta, so use k >= 2 on both sides.
    OperatorSpec a{2, 1, Q("3/2"), 2}, b{2, 1, Q("5/2"), 3};
    EXPECT_FALSE(check_commutation(a, b, 6));
}

TEST(Identities, NestedCommutatorExamples) {
    EXPECT_TRUE(check_nested_commutator(2, 2, Q("2"), Q("1"), 6));
    EXPECT_TRUE(check_nested_commutator(3, 3, Q("5/2"), Q("1"), 4));
    EXPECT_THROW(check_nested_commutator(2, 1, Q("2"), Q("1"), 2), ArgumentError);
}

TEST(Identities, SingleCommutatorIsNotZero) {
    RawPoly img = single_commutator_image(2, 2, Q("2"), Q("1"), {1, 0});
    EXPECT_FALSE(img.is_zero());
}

TEST(Bessel, ClosedForms) {
    EXPECT_NEAR(bessel_beta2({1.3}, {0.7}), std::exp(1.3 * 0.7), 1e-14);
    // det[[e^1, e^-1], [1, 1]] / ((1 - (-1)) (1 - 0)) = sinh(1).
    EXPECT_NEAR(bessel_beta2({1, 0}, {1, -1}), std::sinh(1.0), 1e-14);
    EXPECT_NEAR(bessel_beta2({1, 0}, {1, 0}), std::exp(1.0) - 1, 1e-14);
    EXPECT_THROW(bessel_beta2({1, 1}, {0.1, 0.2}), ArgumentError);
    EXPECT_THROW(bessel_beta2({1, 0}, {0.1, 0.1}), ArgumentError);
}

TEST(Bessel, NormalizationAtOrigin) {
    const std::vector<double> lambda{2.0, 0.5, -1.0};
    for (double s : {1e-2, 1e-3}) {
        double v = bessel_beta2(lambda, {s, 0.0, -s});
        EXPECT_NEAR(v, 1.0, 10 * s);
    }
}

TEST(Bessel, EigenRelation) {
    EXPECT_LT(eigenrelation_residual_beta2({0.8}, {0.4}, 1, 1e-4).residual, 1e-8);
    auto r1 = eigenrelation_residual_beta2({1, 0}, {0.3, -0.2}, 1, 1e-4);
    EXPECT_LT(r1.residual, 1e-6);
    EXPECT_FALSE(r1.step_warning);
    EXPECT_LT(eigenrelation_residual_beta2({1, 0}, {0.3, -0.2}, 2, 1e-4).residual, 1e-5);
    EXPECT_LT(eigenrelation_residual_beta2({1.5, 0.2, -0.7}, {0.4, -0.1, -0.6}, 2, 1e-3).residual, 1e-5);
    EXPECT_TRUE(eigenrelation_residual_beta2({1, 0}, {0.3, 0.2997}, 1, 1e-4).step_warning);
}

TEST(EdgeMoment, PositiveAndConverging) {
    auto a = scaled_edge_moment(16, {1.0}, {0.0}, 2);
    auto b = scaled_edge_moment(32, {1.0}, {0.0}, 2);
    auto c = scaled_edge_moment(64, {1.0}, {0.0}, 2);
    EXPECT_EQ(a.powers[0], 6);
    EXPECT_NEAR(a.value, 0.6298828125, 1e-12);  // regression baseline
    EXPECT_EQ(b.powers[0], 10);
    EXPECT_EQ(c.powers[0], 16);
    for (const auto* s : {&a, &b, &c}) {
        ASSERT_EQ(s->raw_terms.size(), 2u);
        // The odd-degree term vanishes; the even one is strictly positive.
        EXPECT_GT(s->raw_terms[0], 0);
        EXPECT_EQ(s->raw_terms[1], 0);
        EXPECT_GT(s->value, 0);
    }
    // GUE edge limit E sum exp(t a_i) = exp(t^3/12) / (2 sqrt(pi) t^{3/2}) at t = 1/2.
    const double limit = std::exp(1.0 / 96) / (2 * std::sqrt(M_PI) * std::pow(0.5, 1.5));
    auto d = scaled_edge_moment(128, {1.0}, {0.0}, 2);
    EXPECT_LT(std::abs(d.value - limit), std::abs(a.value - limit));
    EXPECT_LT(std::abs(d.value - limit), 0.12);
}
