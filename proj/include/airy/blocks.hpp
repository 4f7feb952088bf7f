#pragma once

// Continuous blocks (p, upsilon, H): step-function block processes, virtual
// blocks and compatible heights; the partition of the height points into the
// four kernel classes; the blocks integrand and a stratified Monte Carlo
// evaluator of the truncated principal-value integral L_beta.

#include "airy/bridges.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace airy {

// Right-continuous step function on [a, b]: levels[0] on [a, breaks[0]),
// levels[i] on [breaks[i-1], breaks[i]), levels.back() on [breaks.back(), b].
// Block functions vanish at a, at b and just before b, and have connected support.
struct BlockFunction {
    double a = 0, b = 0;
    std::vector<double> breaks;
    std::vector<double> levels{0.0};

    static BlockFunction zero(double a, double b) { return {a, b, {}, {0.0}}; }
    double value(double x) const;
    double left_limit(double x) const;
    bool is_zero() const;
    // Positions where the value changes, with the signed jump.
    std::vector<std::pair<double, double>> jumps() const;
};

struct BlockProcess {
    int m = 1;
    std::vector<double> kappa;          // k_1..k_m, positive
    std::vector<BlockFunction> p;       // p_1..p_{m+u}
    int u() const { return static_cast<int>(p.size()) - m; }
    std::vector<double> Q() const;      // Q_0 = 0, ..., Q_m
    double p_upper(int l, double x) const;       // sum_{j>l} p_j(x)
    double p_upper_left(int l, double x) const;  // left limit of the same
    // Discontinuities of p_j strictly inside (Q_{l-1}, Q_l); j, l are 1-based.
    std::vector<double> Delta(int j, int l) const;
    int delta() const;
    // Largest point where p_j is positive (its final drop), j > m.
    double support_end(int j) const;
};

struct Blocks {
    BlockProcess bp;
    std::vector<std::optional<double>> upsilon;  // upsilon_1..upsilon_m
    std::map<double, double> H;

    // Points carrying H: all jumps, all Q_l, and Q_{l-1} + upsilon_l when set.
    std::vector<double> mandated_points() const;
};

// Every violated condition by name; empty means the triple is valid blocks.
// Names: block_shape, block_negative, block_endpoint, block_support,
// block_spurious_break, main_block_tail, extra_block_zero, left_continuity,
// jumps_overlap, extra_block_order, virtual_count, virtual_position,
// virtual_not_allowed, height_domain, height_negative, height_at_Q,
// height_at_virtual, height_below_floor, height_jump_sign, height_stage_start.
std::vector<std::string> validate_blocks(const Blocks& b, double tol = 1e-9);

struct XiSegment {
    double x, y;
    int cls;   // 1..4
    double A;  // lower level for the path on [x, y]
};

// Consecutive mandated points with their class. Throws ArgumentError on invalid blocks.
std::vector<XiSegment> xi_partition(const Blocks& b);

// 2^{-delta - #upsilon} prod over segments of the class kernel. Each sample
// draws one path per segment, so the product is an unbiased single-sample
// estimate. beta = infinity returns the exact kernel product with zero stderr.
FunctionalEstimate blocks_integrand(const Blocks& b, double beta, long mc_budget,
                                    std::uint64_t seed, int mesh = 256);

// One draw of the single-sample estimator above; used by the L_beta sampler.
double blocks_integrand_sample(const Blocks& b, const std::vector<XiSegment>& xi, double beta,
                               int mesh, Rng& rng);

// The three-stage configuration with one extra block and delta = 5 drawn in
// the reference illustration: k = (9, 8, 11).
Blocks illustrated_blocks();

struct LQuery {
    int m = 1;
    std::vector<double> kappa{1.0};
    std::vector<double> taus{0.0};
    double beta = 2;
    double epsilon = 0.1;
    int delta_max = 2;
    long mc_budget = 100000;  // per stratum
    std::uint64_t seed = 1;
    int mesh = 128;
};

struct Stratum {
    int u = 0;
    std::vector<std::vector<int>> delta;  // delta[j-1][l-1]
    std::vector<bool> virtual_set;        // upsilon_l present
    int total_delta() const;
    std::string describe() const;
};

struct StratumResult {
    Stratum stratum;
    FunctionalEstimate estimate;
    long n_nonzero = 0;
    bool flagged = false;  // too few nonzero samples or relative stderr above 0.2
};

struct LResult {
    FunctionalEstimate total;
    std::vector<StratumResult> strata;
};

// All strata with delta <= delta_max, in a fixed order.
std::vector<Stratum> enumerate_strata(int m, int delta_max);
LResult L_beta_truncated(const LQuery& q);

struct Extrapolation {
    double value = 0;
    double uncertainty = 0;
    double slope = 0;       // coefficient of sqrt(eps)
    bool monotone = true;
};

// Least-squares fit of a + b sqrt(eps). Non-monotone input returns the
// smallest-eps value with uncertainty widened to the spread of the sequence.
Extrapolation epsilon_extrapolate(const std::vector<double>& eps, const std::vector<double>& values,
                                  const std::vector<double>& stderrs);

}  // namespace airy
