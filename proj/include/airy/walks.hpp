#pragma once

// Walks: the degree trajectories of single terms in the expansion of
// D_{i_m}^{k_m} ... D_{i_1}^{k_1}[1], their weights, jump data, and the map to
// discrete blocks.

#include "airy/rational.hpp"

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace airy {

struct Walk {
    std::vector<int> marked;  // i_1..i_m, 1-based
    std::vector<int> powers;  // k_1..k_m
    int N = 1;                // number of variables
    // r_j(0..Q_m), stored only for j with r_j not identically zero.
    std::map<int, std::vector<int>> r;

    int length() const;                     // Q_m
    std::vector<int> partial_sums() const;  // Q_0..Q_m
    int stage_of(int t) const;              // l with Q_{l-1} < t <= Q_l, 1-based
    int at(int j, int t) const;
    std::vector<int> height() const;        // H(t) = sum_j r_j(t)
    bool operator==(const Walk& o) const {
        return marked == o.marked && powers == o.powers && N == o.N && r == o.r;
    }
};

// Builds a walk from dense or sparse trajectories; identically zero ones are dropped.
Walk make_walk(std::vector<int> marked, std::vector<int> powers, int N,
               const std::map<int, std::vector<int>>& trajectories);

enum class StepKind { Up, Down, JumpUp, JumpDown };  // cases 1, 2, 3(a), 3(b)

struct Step {
    StepKind kind;
    int stage;        // 1-based
    int partner = 0;  // the j != i_l that changed, for jumps
    int gamma = 0;    // jump size parameter, for jumps
};

// Decodes every step; throws ArgumentError naming the first violated walk rule.
// rows[l] bounds the partner index of jumps in stage l+1.
std::vector<Step> walk_steps(const Walk& w, const std::vector<int>& rows);
void validate_walk(const Walk& w, const std::vector<int>& rows);

// Depth-first enumeration in lexicographic step order (Up, Down, then jumps by
// partner and gamma). Returns the number of walks. Throws ResourceError once
// more than `budget` walks have been produced.
std::size_t enumerate_walks(const std::vector<int>& marked, const std::vector<int>& powers,
                            const std::vector<int>& rows, int N,
                            const std::function<void(const Walk&)>& sink,
                            std::size_t budget = 5'000'000);
std::vector<Walk> collect_walks(const std::vector<int>& marked, const std::vector<int>& powers,
                                const std::vector<int>& rows, int N,
                                std::size_t budget = 5'000'000);

// Product of the per-step factors of the four term cases with variances
// taus[l]; valid for every tau. This is the constant P(Q_m) of the term.
Rational step_product_weight(const Walk& w, const Rational& beta, const std::vector<int>& rows,
                             const std::vector<Rational>& taus);

// Corners weight at tau = 2N/beta: sign, N-powers and down-step factors
// (1 + 2 r_i/(beta N_l) - #{j : r_j >= r_i}/N_l), evaluated as written.
Rational walk_weight_corners(const Walk& w, const Rational& beta, const std::vector<int>& rows);

// DBM weight with stage variances taus[l] and all rows equal to N.
Rational walk_weight_dbm(const Walk& w, const Rational& beta, const std::vector<Rational>& taus);

struct ExpansionCheck {
    Rational walk_sum;
    Rational operator_value;
    bool equal = false;
    std::size_t walks = 0;
    std::string formula;  // "corners", "dbm" or "step_product"
};

// Sum of walk weights against the degree-zero term of the operator product.
// Uses the corners formula when tau = 2N/beta, the DBM formula when all rows
// equal N, and the step product otherwise.
ExpansionCheck expansion_check(const std::vector<int>& marked, const std::vector<int>& powers,
                               const std::vector<int>& rows, int N, const Rational& beta,
                               const Rational& tau);

struct JumpData {
    std::set<int> Delta;
    std::map<std::pair<int, int>, std::set<int>> Delta_jl;  // (j, l) -> times
    int delta = 0;
    int delta_jl(int j, int l) const;
};

JumpData jump_data(const Walk& w);

// ---------------------------------------------------------------------------
// Discrete blocks.

struct DiscreteBlocks {
    int m = 0;
    int u = 0;
    std::vector<int> Q;                      // Q_0..Q_m
    std::vector<std::vector<int>> p;         // p_1..p_{m+u} on [0, Q_m]; p[j-1] is p_j
    std::vector<std::optional<int>> upsilon; // upsilon_1..upsilon_m
    std::map<int, int> H;                    // block height at its mandated points

    int p_upper(int l, int t) const;         // p^l(t) = sum_{j > l} p_j(t)
    std::set<int> mandated_points() const;
    bool operator==(const DiscreteBlocks&) const = default;
};

// Violated conditions of the block process, virtual block and block height
// definitions, plus "parity" when the triple is not valid in parity. Empty
// means valid.
std::vector<std::string> validate_discrete_blocks(const DiscreteBlocks& b,
                                                  const std::vector<int>& rows);

// Jump count of the triple: times where some p^l changes.
int blocks_delta(const DiscreteBlocks& b);

struct BlocksResult {
    std::optional<DiscreteBlocks> blocks;
    std::string rejection;  // empty when accepted
};

// Rejection tags: "marked_indices" (i_l != l), "ending" (r_l not zero on
// [Q_l, Q_m]), "early_jump" (p^l changes within eps N^{2/3} of Q_{l-1}),
// "early_virtual" (upsilon_l <= eps N^{2/3}), "invalid_image:<reason>".
BlocksResult to_discrete_blocks(const Walk& w, const std::vector<int>& rows, double epsilon);

struct Preimage {
    std::vector<Walk> walks;     // members that map back to the triple
    std::size_t heights = 0;     // height paths satisfying the pointwise constraints
};

// All walks with the given triple whose auxiliary variables are aux[0..u-1]
// (any fixed choice; the triple does not depend on it).
Preimage preimage(const DiscreteBlocks& b, int N, const std::vector<int>& rows,
                  const std::vector<int>& aux, double epsilon, std::size_t budget = 2'000'000);

}  // namespace airy
