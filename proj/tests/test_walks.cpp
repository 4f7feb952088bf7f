#include "airy/dunkl.hpp"
#include "airy/errors.hpp"
#include "airy/walks.hpp"

#include <gtest/gtest.h>

using namespace airy;

namespace {

Rational Q(const char* s) { return parse_rational(s); }

std::vector<int> piecewise(int len, const std::vector<std::pair<int, int>>& knots) {
    // Linear interpolation between (t, value) knots; knots sorted, first at 0.
    std::vector<int> out(len + 1, 0);
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        auto [t0, v0] = knots[k];
        auto [t1, v1] = knots[k + 1];
        for (int t = t0; t <= t1; ++t) {
            if (t1 - t0 == 1) {
                out[t] = t == t0 ? v0 : v1;
            } else {
                int dir = (v1 > v0) - (v1 < v0);
                out[t] = v0 + dir * (t - t0);
            }
        }
    }
    return out;
}

// Walk with one auxiliary variable taking height 2 from a 3(a) jump at t=5 and
// returning through a 3(b) jump at t=11 (one marked variable, k=14).
Walk two_jump_walk() {
    std::vector<int> r1 = {0, 1, 2, 3, 4, 1, 2, 3, 2, 1, 0, 1, 2, 1, 0};
    std::vector<int> r2 = {0, 0, 0, 0, 0, 2, 2, 2, 2, 2, 2, 0, 0, 0, 0};
    return make_walk({1}, {14}, 2, {{1, r1}, {2, r2}});
}

// Three-stage walk with auxiliary variable 9, read off the discrete-blocks
// illustration (half-unit grid).
Walk three_stage_walk() {
    const int len = 56;
    std::vector<int> r1 = piecewise(len, {{0, 0}, {4, 4}, {5, 0}, {11, 6}, {12, 3}, {13, 2},
                                          {14, 3}, {17, 0}, {56, 0}});
    std::vector<int> r2 = piecewise(len, {{0, 0}, {11, 0}, {12, 2}, {17, 2}, {18, 3}, {19, 2},
                                          {20, 3}, {21, 2}, {22, 1}, {23, 2}, {24, 2}, {29, 7},
                                          {30, 2}, {31, 3}, {34, 0}, {56, 0}});
    std::vector<int> r3 = piecewise(len, {{0, 0}, {4, 0}, {5, 3}, {23, 3}, {24, 2}, {34, 2},
                                          {36, 4}, {40, 0}, {41, 1}, {42, 2}, {43, 1}, {44, 0},
                                          {45, 1}, {46, 0}, {47, 3}, {48, 4}, {51, 1}, {53, 3},
                                          {56, 0}});
    std::vector<int> r9 = piecewise(len, {{0, 0}, {29, 0}, {30, 4}, {46, 4}, {47, 0}, {56, 0}});
    return make_walk({1, 2, 3}, {17, 17, 22}, 27, {{1, r1}, {2, r2}, {3, r3}, {9, r9}});
}

}  // namespace

TEST(Enumerate, SingleVariableDyckCounts) {
    EXPECT_EQ(collect_walks({1}, {2}, {1}, 1).size(), 1u);
    EXPECT_EQ(collect_walks({1}, {4}, {1}, 1).size(), 2u);
    EXPECT_EQ(collect_walks({1}, {12}, {1}, 1).size(), 132u);
    EXPECT_EQ(collect_walks({1}, {5}, {1}, 1).size(), 0u);
}

TEST(Enumerate, CountEqualsExpansionTerms) {
    const Rational beta = Q("7/3");
    struct Case {
        std::vector<int> marked, powers, rows;
        int N;
    };
    const std::vector<Case> cases = {
        {{1}, {4}, {2}, 2},         {{1}, {6}, {3}, 3},          {{2}, {6}, {3}, 3},
        {{1, 2}, {3, 3}, {3, 3}, 3}, {{1, 1}, {4, 2}, {3, 2}, 3}, {{2, 1}, {2, 4}, {2, 2}, 3},
        {{1}, {8}, {4}, 4}};
    for (const auto& c : cases) {
        const std::size_t walks = collect_walks(c.marked, c.powers, c.rows, c.N).size();
        const std::size_t terms =
            count_expansion_terms(c.marked, c.powers, c.rows, c.N, beta, Rational(2 * c.N) / beta);
        EXPECT_EQ(walks, terms);
    }
    // Jump walks exist once a second variable is available.
    const std::size_t n2 = collect_walks({1}, {4}, {2}, 2).size();
    EXPECT_GT(n2, 2u);
    EXPECT_EQ(n2, 3u);  // two Dyck paths plus up, up, 3(a) onto x_2, 3(b) back
}

TEST(Enumerate, OrderIsDeterministic) {
    auto a = collect_walks({1, 2}, {3, 3}, {3, 3}, 3);
    auto b = collect_walks({1, 2}, {3, 3}, {3, 3}, 3);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(a[i] == b[i]);
}

TEST(Enumerate, BudgetRaisesWithProgress) {
    try {
        collect_walks({1}, {12}, {1}, 1, 10);
        FAIL() << "expected ResourceError";
    } catch (const ResourceError& e) {
        EXPECT_EQ(e.progress(), 10u);
    }
}

TEST(Weight, TwoStepWalk) {
    auto walks = collect_walks({1}, {2}, {1}, 1);
    ASSERT_EQ(walks.size(), 1u);
    // (sqrt(1*1))^2 * 1^0 * (1 + 2*1/(2*1) - 1/1) = 1.
    EXPECT_EQ(walk_weight_corners(walks[0], 2, {1}), 1);
    // N=3, beta=3/2: up gives tau = 2N/beta = 4, down gives 1 + (3/4)*2.
    Walk w = make_walk({1}, {2}, 3, {{1, {0, 1, 0}}});
    EXPECT_EQ(walk_weight_corners(w, Q("3/2"), {3}), 10);
}

TEST(Weight, ClosedFormsMatchStepProduct) {
    for (const auto& beta : {Q("1"), Q("2"), Q("7/3")}) {
        for (int N = 2; N <= 3; ++N) {
            const Rational tau = Rational(2 * N) / beta;
            for (const auto& w : collect_walks({1, 2}, {3, 3}, {N, 2}, N))
                EXPECT_EQ(walk_weight_corners(w, beta, {N, 2}), step_product_weight(w, beta, {N, 2}, {tau, tau}));
            const std::vector<Rational> taus = {Q("1/3"), Q("5/4")};
            for (const auto& w : collect_walks({2, 1}, {4, 2}, {N, N}, N))
                EXPECT_EQ(walk_weight_dbm(w, beta, taus), step_product_weight(w, beta, {N, N}, taus));
        }
    }
}

TEST(Weight, SignCountsJumpDownSteps) {
    for (const auto& w : collect_walks({1, 2}, {4, 4}, {3, 3}, 3)) {
        int flips = 0;
        for (const auto& s : walk_steps(w, {3, 3})) flips += s.kind == StepKind::JumpDown;
        Rational wt = walk_weight_corners(w, Q("7/3"), {3, 3});
        ASSERT_NE(wt, 0);
        EXPECT_EQ(wt < 0, flips % 2 == 1);
    }
}

TEST(Weight, LargeBetaLimit) {
    // At beta = 10^9 the down-step factor is within 1e-8 of 1 - #{r_j >= r_i}/N_l.
    Walk w = two_jump_walk();
    Rational huge = Q("1000000000");
    Rational a = walk_weight_corners(w, huge, {2});
    Rational b = walk_weight_corners(w, Q("1000000000000"), {2});
    EXPECT_NEAR(to_double(a), to_double(b), 1e-6 * std::abs(to_double(b)) + 1e-12);
}

TEST(Expansion, SpecExamples) {
    EXPECT_TRUE(expansion_check({1}, {2}, {1}, 1, 2, 1).equal);
    EXPECT_TRUE(expansion_check({1, 2}, {2, 2}, {2, 2}, 2, 2, 2).equal);
    EXPECT_TRUE(expansion_check({2}, {4}, {3}, 3, Q("3/2"), 4).equal);
}

TEST(Expansion, FullGridAllFormulas) {
    for (const auto& beta : {Q("1"), Q("2"), Q("7/3")}) {
        for (int N = 1; N <= 3; ++N) {
            for (int k1 = 1; k1 <= 4; ++k1) {
                const Rational tc = Rational(2 * N) / beta;
                auto one = expansion_check({N}, {k1}, {N}, N, beta, tc);
                EXPECT_TRUE(one.equal);
                EXPECT_EQ(one.formula, "corners");
                auto dbm = expansion_check({1}, {k1}, {N}, N, beta, Q("3/5"));
                EXPECT_TRUE(dbm.equal);
                for (int k2 = 1; k2 <= 4; ++k2) {
                    const int N2 = std::max(1, N - 1);
                    EXPECT_TRUE(expansion_check({1, N2}, {k1, k2}, {N, N2}, N, beta, tc).equal);
                    auto gen = expansion_check({1, 1}, {k1, k2}, {N, N2}, N, beta, Q("1/2"));
                    EXPECT_TRUE(gen.equal);
                }
            }
        }
    }
}

TEST(Expansion, SumOverMarkedTuplesGivesMoment) {
    const Rational beta = Q("7/3");
    const int N = 3;
    const std::vector<int> rows = {3, 2};
    Rational total = 0;
    for (int i1 = 1; i1 <= rows[0]; ++i1)
        for (int i2 = 1; i2 <= rows[1]; ++i2)
            for (const auto& w : collect_walks({i1, i2}, {3, 3}, rows, N))
                total += walk_weight_corners(w, beta, rows);
    EXPECT_EQ(total, corners_moment({3, 3}, rows, N, beta, Rational(2 * N) / beta));
}

TEST(WalkRules, InvalidWalksRejected) {
    // Two variables changing in one step.
    EXPECT_THROW(validate_walk(make_walk({1}, {2}, 3, {{1, {0, 1, 0}}, {2, {0, 1, 0}}}), {3}),
                 ArgumentError);
    // Jump partner outside N_l.
    Walk w = two_jump_walk();
    EXPECT_NO_THROW(validate_walk(w, {2}));
    Walk wide = make_walk({1}, {14}, 3, {{1, w.r.at(1)}, {3, w.r.at(2)}});
    EXPECT_THROW(validate_walk(wide, {2}), ArgumentError);
    EXPECT_NO_THROW(validate_walk(wide, {3}));
}

TEST(Jumps, DyckWalkHasNone) {
    for (const auto& w : collect_walks({1}, {8}, {1}, 1)) EXPECT_EQ(jump_data(w).delta, 0);
}

TEST(Jumps, TwoJumpWalk) {
    Walk w = two_jump_walk();
    auto jd = jump_data(w);
    EXPECT_EQ(jd.delta, 2);
    EXPECT_EQ(jd.delta_jl(2, 1), 2);
    EXPECT_EQ(jd.Delta, (std::set<int>{5, 11}));
    auto steps = walk_steps(w, {2});
    EXPECT_EQ(steps[4].kind, StepKind::JumpUp);
    EXPECT_EQ(steps[4].gamma, 3);
    EXPECT_EQ(steps[10].kind, StepKind::JumpDown);
    EXPECT_EQ(steps[10].gamma, 2);
    EXPECT_LT(walk_weight_corners(w, 2, {2}), 0);
    auto blocks = to_discrete_blocks(w, {2}, 0.1);
    ASSERT_TRUE(blocks.blocks) << blocks.rejection;
    EXPECT_EQ(blocks_delta(*blocks.blocks), 2);
}

TEST(Blocks, NoJumpWalkHasEmptyAuxiliaryData) {
    for (const auto& w : collect_walks({1, 2}, {4, 2}, {3, 3}, 3)) {
        if (jump_data(w).delta != 0) continue;
        auto res = to_discrete_blocks(w, {3, 3}, 0.1);
        ASSERT_TRUE(res.blocks) << res.rejection;
        EXPECT_EQ(res.blocks->u, 0);
        for (const auto& u : res.blocks->upsilon) EXPECT_FALSE(u.has_value());
    }
}

TEST(Blocks, RejectionTags) {
    Walk w = make_walk({2}, {2}, 2, {{2, {0, 1, 0}}});
    EXPECT_EQ(to_discrete_blocks(w, {2}, 0.1).rejection, "marked_indices");
    // r_1 left positive after its own stage.
    Walk end = make_walk({1, 2}, {2, 2}, 2, {{1, {0, 1, 2, 2, 0}}, {2, {0, 0, 0, 0, 1}}});
    EXPECT_THROW(validate_walk(end, {2, 2}), ArgumentError);
    // r_1 still positive at Q_1, removed by a 3(b) jump in stage 2.
    Walk ending = make_walk({1, 2}, {2, 2}, 2, {{1, {0, 1, 2, 0, 0}}, {2, {0, 0, 0, 1, 0}}});
    EXPECT_EQ(to_discrete_blocks(ending, {2, 2}, 0.1).rejection, "ending");
    Walk early = two_jump_walk();
    EXPECT_EQ(to_discrete_blocks(early, {2}, 5.0).rejection, "early_jump");
}

TEST(Blocks, ThreeStageIllustration) {
    Walk w = three_stage_walk();
    const std::vector<int> rows = {27, 27, 27};
    ASSERT_NO_THROW(validate_walk(w, rows));
    EXPECT_GT(walk_weight_corners(w, 2, rows), 0);  // two 3(b) steps
    auto res = to_discrete_blocks(w, rows, 0.5);
    ASSERT_TRUE(res.blocks) << res.rejection;
    const auto& b = *res.blocks;
    EXPECT_EQ(b.u, 1);
    ASSERT_EQ(b.p.size(), 4u);
    for (int v : b.p[0]) EXPECT_EQ(v, 0);
    for (int t = 0; t <= 56; ++t) {
        EXPECT_EQ(b.p[1][t], t <= 17 ? w.at(2, t) : 0) << t;
        int p3 = (t >= 5 && t <= 23) ? 3 : (t >= 24 && t <= 34) ? 2 : 0;
        EXPECT_EQ(b.p[2][t], p3) << t;
        EXPECT_EQ(b.p[3][t], w.at(9, t)) << t;
    }
    EXPECT_FALSE(b.upsilon[0].has_value());
    EXPECT_EQ(b.upsilon[1], 5);
    EXPECT_EQ(b.upsilon[2], 5);
    const std::map<int, int> H = {{0, 0},  {4, 4},  {5, 3},  {11, 9}, {12, 8}, {17, 5},
                                  {21, 5}, {22, 4}, {23, 5}, {24, 4}, {29, 9}, {30, 8},
                                  {34, 6}, {38, 6}, {39, 5}, {46, 4}, {47, 3}, {56, 0}};
    EXPECT_EQ(b.H, H);
    EXPECT_EQ(blocks_delta(b), 5);
    EXPECT_EQ(jump_data(w).delta, 5);
    EXPECT_TRUE(validate_discrete_blocks(b, rows).empty());
}

TEST(Blocks, PreimageRoundTripAndSign) {
    Walk w = three_stage_walk();
    const std::vector<int> rows = {27, 27, 27};
    auto b = *to_discrete_blocks(w, rows, 0.5).blocks;
    auto pre = preimage(b, 27, rows, {9}, 0.5);
    ASSERT_FALSE(pre.walks.empty());
    EXPECT_GE(pre.heights, pre.walks.size());
    bool found = false;
    for (const auto& v : pre.walks) {
        found = found || v == w;
        auto back = to_discrete_blocks(v, rows, 0.5);
        ASSERT_TRUE(back.blocks);
        EXPECT_TRUE(*back.blocks == b);
        EXPECT_GT(walk_weight_corners(v, 2, rows), 0);
        EXPECT_EQ(jump_data(v).delta, 5);
    }
    EXPECT_TRUE(found);
}

TEST(Blocks, SmallInstancePreimagesPartitionAcceptedWalks) {
    // Every accepted walk lies in the preimage of its own image, and images
    // group walks of equal sign.
    const std::vector<int> rows = {3, 3};
    std::map<std::string, int> sign_of;
    std::size_t accepted = 0, covered = 0;
    std::vector<DiscreteBlocks> seen;
    for (const auto& w : collect_walks({1, 2}, {4, 4}, rows, 3)) {
        auto res = to_discrete_blocks(w, rows, 0.05);
        if (!res.blocks) continue;
        ++accepted;
        if (std::find(seen.begin(), seen.end(), *res.blocks) != seen.end()) continue;
        seen.push_back(*res.blocks);
        std::vector<int> aux;
        for (const auto& [j, traj] : w.r)
            if (j > 2) aux.push_back(j);
        auto pre = preimage(*res.blocks, 3, rows, aux, 0.05);
        covered += pre.walks.size();
        int sign = 0;
        for (const auto& v : pre.walks) {
            int s = walk_weight_corners(v, 2, rows) > 0 ? 1 : -1;
            if (sign == 0) sign = s;
            EXPECT_EQ(s, sign);
        }
    }
    EXPECT_GT(accepted, 0u);
    EXPECT_EQ(covered, accepted);
}
