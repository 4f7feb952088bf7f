#include "airy/bridges.hpp"
#include "airy/errors.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace airy;

namespace {

struct Moments {
    double mean = 0, m2 = 0;
    long n = 0;
    void add(double v) {
        ++n;
        const double d = v - mean;
        mean += d / n;
        m2 += d * (v - mean);
    }
    double stderr_() const { return std::sqrt(m2 / (n - 1) / n); }
};

}  // namespace

TEST(Kernels, ClosedFormValues) {
    EXPECT_NEAR(F(1, 1, 1), (1 - std::exp(-2.0)) / std::sqrt(2 * M_PI), 1e-15);
    EXPECT_NEAR(F(1, 1, 1), 0.344955, 1e-5);
    EXPECT_NEAR(F00(1), 0.797885, 1e-6);
    EXPECT_NEAR(F0(2, 1), 2.0 / std::sqrt(2 * M_PI * 8) * std::exp(-0.25), 1e-15);
    EXPECT_EQ(F(1, 0, 2), 0.0);
}

TEST(Kernels, EndpointLimit) {
    for (double x : {0.5, 1.0, 3.0})
        for (double h : {0.2, 1.0, 2.5}) {
            const double g = 1e-6;
            EXPECT_NEAR(F(x, h, g) / g / F0(x, h), 1.0, 1e-4);
            EXPECT_NEAR(F0(x, g) / g / F00(x), 1.0, 1e-4);
        }
}

TEST(Kernels, Errors) {
    EXPECT_THROW(F(0, 1, 1), ArgumentError);
    EXPECT_THROW(F0(-1, 1), ArgumentError);
    EXPECT_THROW(F00(0), ArgumentError);
    EXPECT_THROW(F(1, -1, 1), ArgumentError);
}

TEST(Samplers, EndpointsAndPositivity) {
    const BridgeSpec specs[] = {
        {1.3, 0.7, 1.1, BridgeKind::BridgePositive, 64},
        {0.9, 0.0, 0.8, BridgeKind::Bessel3Bridge, 64},
        {2.0, 0.0, 0.0, BridgeKind::Excursion, 64},
    };
    for (const auto& s : specs) {
        Rng rng(17);
        for (int rep = 0; rep < 200; ++rep) {
            const auto p = sample_path(s, rng);
            ASSERT_EQ(static_cast<int>(p.size()), mesh_intervals(s) + 1);
            EXPECT_EQ(p.front(), s.h);
            EXPECT_EQ(p.back(), s.g);
            for (std::size_t k = 1; k + 1 < p.size(); ++k) ASSERT_GT(p[k], 0.0);
        }
    }
}

TEST(Samplers, SpecValidation) {
    EXPECT_THROW(sample_path({1, 0.5, 0.5, BridgeKind::Excursion, 64}, 1), ArgumentError);
    EXPECT_THROW(sample_path({1, 0.5, 0.5, BridgeKind::Bessel3Bridge, 64}, 1), ArgumentError);
    EXPECT_THROW(sample_path({1, 0.0, 0.5, BridgeKind::BridgePositive, 64}, 1), ArgumentError);
    EXPECT_THROW(sample_path({1, 0.0, 0.0, BridgeKind::Excursion, 8}, 1), ArgumentError);
    EXPECT_THROW(sample_path({0, 0.0, 0.0, BridgeKind::Excursion, 64}, 1), ArgumentError);
}

TEST(Samplers, CollapsedAcceptanceAdvisesOtherKinds) {
    try {
        sample_path({1, 1e-4, 1e-4, BridgeKind::BridgePositive, 256}, 3);
        FAIL() << "expected ArgumentError";
    } catch (const ArgumentError& e) {
        EXPECT_NE(std::string(e.what()).find("bessel3"), std::string::npos);
    }
}

TEST(Samplers, SeedDeterminism) {
    const BridgeSpec s{1, 0.4, 0.9, BridgeKind::BridgePositive, 128};
    EXPECT_EQ(sample_path(s, 99), sample_path(s, 99));
    EXPECT_NE(sample_path(s, 99), sample_path(s, 100));
    const auto a = I00_mc(1, 2, 2000, 5);
    const auto b = I00_mc(1, 2, 2000, 5);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.stderr_, b.stderr_);
}

TEST(Area, TrapezoidExactForLinear) {
    std::vector<double> p(11);
    for (int k = 0; k <= 10; ++k) p[k] = 1 + 0.3 * k;
    EXPECT_NEAR(trapezoid_area(p, 2.0), 2.0 * (1 + 4.0) / 2, 1e-12);
}

// Sequential killed-transition sampling and whole-path rejection target the
// same law at the mesh points; compare area and midpoint means.
TEST(DualRoute, PositiveBridgeSamplers) {
    const BridgeSpec s{1.0, 0.5, 0.8, BridgeKind::BridgePositive, 64};
    Rng r1(1), r2(2);
    Moments a1, a2, m1, m2;
    long rejected = 0;
    for (int rep = 0; rep < 40000; ++rep) {
        const auto p = sample_path(s, r1);
        const auto q = sample_positive_bridge_rejection(s, r2, &rejected);
        a1.add(trapezoid_area(p, s.x));
        a2.add(trapezoid_area(q, s.x));
        m1.add(p[32]);
        m2.add(q[32]);
    }
    EXPECT_GT(rejected, 0);
    EXPECT_LT(std::abs(a1.mean - a2.mean), 4 * std::hypot(a1.stderr_(), a2.stderr_()));
    EXPECT_LT(std::abs(m1.mean - m2.mean), 4 * std::hypot(m1.stderr_(), m2.stderr_()));
}

// Vervaat rotation versus the norm of a 3-d bridge 0 -> 0; both against the
// exact mean area of a standard excursion, sqrt(pi/8). Rotating at the
// discrete minimum lowers the path by about 0.58 sqrt(dt), so the Vervaat
// route gets that allowance and it must shrink under refinement.
TEST(DualRoute, ExcursionAreaMean) {
    const double exact = std::sqrt(M_PI / 8);
    auto run = [](BridgeKind kind, int mesh, std::uint64_t seed) {
        const BridgeSpec s{1.0, 0, 0, kind, mesh};
        Rng rng(seed);
        Moments m;
        for (int rep = 0; rep < 20000; ++rep)
            m.add(trapezoid_area(kind == BridgeKind::Excursion ? sample_path(s, rng)
                                                               : sample_excursion_bessel3(s, rng),
                                 1.0));
        return m;
    };
    const auto bessel = run(BridgeKind::Bessel3Bridge, 256, 7);
    EXPECT_LT(std::abs(bessel.mean - exact), 4 * bessel.stderr_() + 0.01);
    const auto coarse = run(BridgeKind::Excursion, 64, 8);
    const auto fine = run(BridgeKind::Excursion, 1024, 9);
    EXPECT_LT(std::abs(fine.mean - exact), 4 * fine.stderr_() + 0.6 / std::sqrt(1024.0));
    EXPECT_LT(std::abs(fine.mean - exact), std::abs(coarse.mean - exact));
    EXPECT_LT(std::abs(fine.mean - bessel.mean),
              4 * std::hypot(fine.stderr_(), bessel.stderr_()) + 0.6 / std::sqrt(1024.0));
}

TEST(Functionals, InfiniteBetaGivesKernel) {
    const auto e = I_mc(1.2, 0.7, 0.4, INFINITY, 1000, 1);
    EXPECT_DOUBLE_EQ(e.mean, F(1.2, 0.7, 0.4));
    EXPECT_EQ(e.stderr_, 0.0);
    EXPECT_DOUBLE_EQ(I0_mc(1.2, 0.7, INFINITY, 1000, 1).mean, F0(1.2, 0.7));
    EXPECT_DOUBLE_EQ(I00_mc(1.2, INFINITY, 1000, 1).mean, F00(1.2));
}

TEST(Functionals, AreaFactorAtLeastOne) {
    for (double x : {0.3, 1.0, 2.0}) EXPECT_GE(I00_mc(x, 2, 1000, 3).mean, F00(x));
    EXPECT_GE(I0_mc(1, 0.5, 1, 1000, 3).mean, F0(1, 0.5));
    EXPECT_GE(I_mc(1, 0.5, 0.5, 1, 1000, 3).mean, F(1, 0.5, 0.5));
}

TEST(Functionals, MonotoneInBetaWithCommonNumbers) {
    for (auto kind : {0, 1, 2}) {
        double prev = INFINITY;
        for (double beta : {1.0, 2.0, 4.0}) {
            const double v = kind == 0   ? I_mc(1, 0.6, 0.9, beta, 2000, 21).mean
                             : kind == 1 ? I0_mc(1, 0.6, beta, 2000, 21).mean
                                         : I00_mc(1, beta, 2000, 21).mean;
            EXPECT_LE(v, prev);
            prev = v;
        }
    }
}

TEST(Functionals, MeshRefinementAgrees) {
    const auto e = I0_mc(1, 0.8, 2, 100000, 4, 64, true);
    ASSERT_TRUE(e.refined);
    EXPECT_LT(std::abs(e.mean - e.refined_mean), 3 * std::hypot(e.stderr_, e.refined_stderr));
}

TEST(Functionals, BudgetPrecondition) {
    EXPECT_THROW(I00_mc(1, 2, 999, 1), ArgumentError);
    EXPECT_THROW(I_mc(1, 1, 1, 2, 10, 1), ArgumentError);
}
