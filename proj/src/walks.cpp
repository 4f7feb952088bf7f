#include "airy/walks.hpp"

#include "airy/dunkl.hpp"
#include "airy/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace airy {

// ---------------------------------------------------------------------------
// Walk accessors

int Walk::length() const { return std::accumulate(powers.begin(), powers.end(), 0); }

std::vector<int> Walk::partial_sums() const {
    std::vector<int> q{0};
    for (int k : powers) q.push_back(q.back() + k);
    return q;
}

int Walk::stage_of(int t) const {
    int acc = 0;
    for (std::size_t l = 0; l < powers.size(); ++l) {
        acc += powers[l];
        if (t <= acc) return static_cast<int>(l) + 1;
    }
    throw ArgumentError("time outside the walk");
}

int Walk::at(int j, int t) const {
    auto it = r.find(j);
    return it == r.end() ? 0 : it->second.at(t);
}

std::vector<int> Walk::height() const {
    std::vector<int> h(length() + 1, 0);
    for (const auto& [j, traj] : r)
        for (std::size_t t = 0; t < h.size(); ++t) h[t] += traj[t];
    return h;
}

Walk make_walk(std::vector<int> marked, std::vector<int> powers, int N,
               const std::map<int, std::vector<int>>& trajectories) {
    require(marked.size() == powers.size() && !marked.empty(), "marked and powers must match");
    Walk w{std::move(marked), std::move(powers), N, {}};
    const std::size_t len = w.length() + 1;
    for (const auto& [j, traj] : trajectories) {
        require(j >= 1 && j <= N, "trajectory index outside 1..N");
        require(traj.size() == len, "trajectory length must be Q_m + 1");
        if (std::any_of(traj.begin(), traj.end(), [](int v) { return v != 0; })) w.r[j] = traj;
    }
    return w;
}

namespace {

void check_rows(const std::vector<int>& marked, const std::vector<int>& powers,
                const std::vector<int>& rows, int N) {
    require(N >= 1, "N must be positive");
    require(!powers.empty() && marked.size() == powers.size() && rows.size() == powers.size(),
            "marked, powers and rows must have equal nonzero length");
    for (std::size_t l = 0; l < rows.size(); ++l) {
        require(powers[l] >= 1, "powers must be positive");
        require(rows[l] >= 1 && rows[l] <= N, "rows must lie in 1..N");
        require(marked[l] >= 1 && marked[l] <= rows[l], "marked index must lie in 1..N_l");
    }
}

// Rational products with half-integer exponents, merged by base value.
class HalfPowers {
public:
    void add(const Rational& base, long twice_exponent) { twice_[base] += twice_exponent; }
    Rational value() const {
        Rational out = 1;
        for (const auto& [base, e] : twice_) {
            if (e % 2 != 0) throw ArgumentError("weight exponent is not an integer");
            out *= pow(base, e / 2);
        }
        return out;
    }

private:
    std::map<Rational, long> twice_;
};

}  // namespace

std::vector<Step> walk_steps(const Walk& w, const std::vector<int>& rows) {
    check_rows(w.marked, w.powers, rows, w.N);
    const int len = w.length();
    for (const auto& [j, traj] : w.r) {
        require(static_cast<int>(traj.size()) == len + 1, "trajectory length must be Q_m + 1");
        for (int v : traj) require(v >= 0, "degrees must be nonnegative");
        require(traj.front() == 0 && traj.back() == 0, "walk must start and end at zero");
    }
    std::vector<Step> steps;
    steps.reserve(len);
    for (int t = 1; t <= len; ++t) {
        const int l = w.stage_of(t);
        const int i = w.marked[l - 1];
        int partner = 0, changed = 0;
        for (const auto& [j, traj] : w.r) {
            if (j != i && traj[t] != traj[t - 1]) {
                partner = j;
                ++changed;
            }
        }
        const int di = w.at(i, t) - w.at(i, t - 1);
        const std::string where = " at t=" + std::to_string(t);
        if (changed == 0) {
            require(di == 1 || di == -1, "marked variable must move by one" + where);
            steps.push_back({di == 1 ? StepKind::Up : StepKind::Down, l});
            continue;
        }
        require(changed == 1, "more than one auxiliary variable changed" + where);
        require(partner <= rows[l - 1], "jump partner exceeds N_l" + where);
        const int dj = w.at(partner, t) - w.at(partner, t - 1);
        require(di + dj == -1, "jump must lower the height by one" + where);
        if (dj > 0) {
            require(w.at(partner, t) < w.at(i, t - 1), "3(a) jump overshoots the marked degree" + where);
            steps.push_back({StepKind::JumpUp, l, partner, dj + 1});
        } else {
            require(w.at(partner, t) >= w.at(i, t - 1), "3(b) jump undershoots the marked degree" + where);
            steps.push_back({StepKind::JumpDown, l, partner, -dj});
        }
    }
    return steps;
}

void validate_walk(const Walk& w, const std::vector<int>& rows) { (void)walk_steps(w, rows); }

std::size_t enumerate_walks(const std::vector<int>& marked, const std::vector<int>& powers,
                            const std::vector<int>& rows, int N,
                            const std::function<void(const Walk&)>& sink, std::size_t budget) {
    check_rows(marked, powers, rows, N);
    const int m = static_cast<int>(powers.size());
    std::vector<int> stage_at{0};  // stage_at[t] for t >= 1, 0-based stage
    for (int l = 0; l < m; ++l)
        for (int s = 0; s < powers[l]; ++s) stage_at.push_back(l);
    const int len = static_cast<int>(stage_at.size()) - 1;
    // A variable beyond every remaining row can never return to zero.
    std::vector<int> reach(len + 2, 0);
    for (int t = len; t >= 1; --t) reach[t] = std::max(reach[t + 1], rows[stage_at[t]]);

    std::vector<std::vector<int>> hist{std::vector<int>(N, 0)};
    std::size_t count = 0;

    std::function<void(int, int)> dfs = [&](int t, int total) {
        if (t > len) {
            if (total != 0) return;
            if (++count > budget) throw ResourceError("walk enumeration budget exceeded", count - 1);
            std::map<int, std::vector<int>> traj;
            for (int j = 0; j < N; ++j) {
                std::vector<int> col(len + 1);
                for (int s = 0; s <= len; ++s) col[s] = hist[s][j];
                traj[j + 1] = std::move(col);
            }
            sink(make_walk(marked, powers, N, traj));
            return;
        }
        const int l = stage_at[t];
        const int i = marked[l] - 1;
        const int Nl = rows[l];
        const std::vector<int> cur = hist.back();
        auto descend = [&](std::vector<int> next, int new_total) {
            if (new_total > len - t) return;
            for (int j = reach[t + 1]; j < N && t < len; ++j)
                if (next[j] != 0) return;
            hist.push_back(std::move(next));
            dfs(t + 1, new_total);
            hist.pop_back();
        };
        const int d = cur[i];
        {
            auto next = cur;
            ++next[i];
            descend(std::move(next), total + 1);
        }
        if (d >= 1) {
            auto next = cur;
            --next[i];
            descend(std::move(next), total - 1);
        }
        for (int j = 0; j < Nl; ++j) {
            if (j == i) continue;
            const int dj = cur[j];
            for (int g = 2; g <= d - dj; ++g) {
                auto next = cur;
                next[i] -= g;
                next[j] += g - 1;
                descend(std::move(next), total - 1);
            }
            for (int g = 1; g <= dj - d; ++g) {
                auto next = cur;
                next[i] += g - 1;
                next[j] -= g;
                descend(std::move(next), total - 1);
            }
        }
    };
    dfs(1, 0);
    return count;
}

std::vector<Walk> collect_walks(const std::vector<int>& marked, const std::vector<int>& powers,
                                const std::vector<int>& rows, int N, std::size_t budget) {
    std::vector<Walk> out;
    enumerate_walks(marked, powers, rows, N, [&](const Walk& w) { out.push_back(w); }, budget);
    return out;
}

// ---------------------------------------------------------------------------
// Weights

Rational step_product_weight(const Walk& w, const Rational& beta, const std::vector<int>& rows,
                             const std::vector<Rational>& taus) {
    const auto steps = walk_steps(w, rows);
    require(taus.size() == w.powers.size(), "one variance per stage");
    const Rational half_beta = beta / 2;
    Rational out = 1;
    for (int t = 1; t <= static_cast<int>(steps.size()); ++t) {
        const Step& s = steps[t - 1];
        const int i = w.marked[s.stage - 1];
        switch (s.kind) {
            case StepKind::Up: out *= taus[s.stage - 1]; break;
            case StepKind::Down: {
                const int d = w.at(i, t - 1);
                // R counts j <= N_l, j != i, with smaller degree.
                int at_least = 0;
                for (const auto& [j, traj] : w.r)
                    if (j != i && j <= rows[s.stage - 1] && traj[t - 1] >= d) ++at_least;
                out *= Rational(d) + half_beta * (rows[s.stage - 1] - 1 - at_least);
                break;
            }
            case StepKind::JumpUp: out *= half_beta; break;
            case StepKind::JumpDown: out *= -half_beta; break;
        }
    }
    return out;
}

namespace {

// Shared traversal for the two closed-form weights. `down_factor(r, count_ge, l)`
// returns the factor of a non-jump down step.
struct StageTally {
    int sign_flips = 0;
    int jumps = 0;
};

template <typename DownFactor>
Rational tally_walk(const Walk& w, const std::vector<int>& rows, std::vector<StageTally>& tally,
                    bool positive_only, DownFactor&& down_factor) {
    const auto steps = walk_steps(w, rows);
    tally.assign(w.powers.size(), {});
    Rational out = 1;
    for (int t = 1; t <= static_cast<int>(steps.size()); ++t) {
        const Step& s = steps[t - 1];
        auto& st = tally[s.stage - 1];
        const int i = w.marked[s.stage - 1];
        if (s.kind == StepKind::JumpDown) ++st.sign_flips;
        if (s.kind == StepKind::JumpUp || s.kind == StepKind::JumpDown) ++st.jumps;
        if (s.kind != StepKind::Down) continue;
        const int ri = w.at(i, t - 1);
        int count_ge = 0;
        for (const auto& [j, traj] : w.r)
            if (traj[t - 1] >= ri && (!positive_only || ri > 0)) ++count_ge;
        out *= down_factor(ri, count_ge, s.stage - 1);
    }
    return out;
}

}  // namespace

Rational walk_weight_corners(const Walk& w, const Rational& beta, const std::vector<int>& rows) {
    std::vector<StageTally> tally;
    Rational out = tally_walk(w, rows, tally, false, [&](int r, int count_ge, int l) -> Rational {
        const Rational Nl = rows[l];
        return 1 + Rational(2 * r) / (beta * Nl) - Rational(count_ge) / Nl;
    });
    const auto q = w.partial_sums();
    const auto h = w.height();
    HalfPowers powers;
    for (std::size_t l = 0; l < w.powers.size(); ++l) {
        if (tally[l].sign_flips % 2) out = -out;
        powers.add(w.N, w.powers[l]);
        powers.add(rows[l], w.powers[l] + h[q[l]] - h[q[l + 1]] - 2 * tally[l].jumps);
    }
    return out * powers.value();
}

Rational walk_weight_dbm(const Walk& w, const Rational& beta, const std::vector<Rational>& taus) {
    require(taus.size() == w.powers.size(), "one time per stage");
    const std::vector<int> rows(w.powers.size(), w.N);
    std::vector<StageTally> tally;
    const Rational Nq = w.N;
    Rational out = tally_walk(w, rows, tally, true, [&](int r, int count_ge, int) -> Rational {
        return 1 + Rational(2 * r) / (beta * Nq) - Rational(count_ge) / Nq;
    });
    const auto q = w.partial_sums();
    const auto h = w.height();
    HalfPowers powers;
    int delta = 0;
    for (std::size_t l = 0; l < w.powers.size(); ++l) {
        if (tally[l].sign_flips % 2) out = -out;
        delta += tally[l].jumps;
        const Rational bt = beta * taus[l] / 2;
        powers.add(bt * Nq, w.powers[l]);
        powers.add(bt, h[q[l + 1]] - h[q[l]]);
    }
    powers.add(Nq, -2L * delta);
    return out * powers.value();
}

ExpansionCheck expansion_check(const std::vector<int>& marked, const std::vector<int>& powers,
                               const std::vector<int>& rows, int N, const Rational& beta,
                               const Rational& tau) {
    check_rows(marked, powers, rows, N);
    ExpansionCheck out;
    const std::vector<Rational> taus(powers.size(), tau);
    const bool corners = tau == Rational(2 * N) / beta;
    const bool dbm = std::all_of(rows.begin(), rows.end(), [&](int r) { return r == N; }) && tau > 0;
    out.formula = corners ? "corners" : dbm ? "dbm" : "step_product";
    out.walk_sum = 0;
    out.walks = enumerate_walks(marked, powers, rows, N, [&](const Walk& w) {
        if (corners) out.walk_sum += walk_weight_corners(w, beta, rows);
        else if (dbm) out.walk_sum += walk_weight_dbm(w, beta, taus);
        else out.walk_sum += step_product_weight(w, beta, rows, taus);
    });
    RawPoly p = RawPoly::constant(N, 1);
    for (std::size_t l = 0; l < powers.size(); ++l)
        p = apply_dunkl_power(p, marked[l], powers[l], OperatorSpec{rows[l], tau, beta, 1});
    out.operator_value = p.constant_term();
    out.equal = out.walk_sum == out.operator_value;
    return out;
}

// ---------------------------------------------------------------------------
// Jump data

int JumpData::delta_jl(int j, int l) const {
    auto it = Delta_jl.find({j, l});
    return it == Delta_jl.end() ? 0 : static_cast<int>(it->second.size());
}

JumpData jump_data(const Walk& w) {
    JumpData out;
    for (const auto& [j, traj] : w.r) {
        for (int t = 1; t <= w.length(); ++t) {
            const int l = w.stage_of(t);
            if (j == w.marked[l - 1] || traj[t] == traj[t - 1]) continue;
            out.Delta.insert(t);
            out.Delta_jl[{j, l}].insert(t);
            ++out.delta;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Discrete blocks

int DiscreteBlocks::p_upper(int l, int t) const {
    int s = 0;
    for (int j = l + 1; j <= m + u; ++j) s += p[j - 1][t];
    return s;
}

std::set<int> DiscreteBlocks::mandated_points() const {
    std::set<int> pts(Q.begin(), Q.end());
    for (int l = 1; l <= m; ++l) {
        for (int t = Q[l - 1] + 1; t <= Q[l]; ++t) {
            if (p_upper(l, t) != p_upper(l, t - 1)) {
                pts.insert(t - 1);
                pts.insert(t);
            }
        }
        if (upsilon[l - 1]) {
            pts.insert(Q[l - 1] + *upsilon[l - 1] - 1);
            pts.insert(Q[l - 1] + *upsilon[l - 1]);
        }
    }
    return pts;
}

int blocks_delta(const DiscreteBlocks& b) {
    int d = 0;
    for (int l = 1; l <= b.m; ++l)
        for (int t = b.Q[l - 1] + 1; t <= b.Q[l]; ++t)
            if (b.p_upper(l, t) != b.p_upper(l, t - 1)) ++d;
    return d;
}

std::vector<std::string> validate_discrete_blocks(const DiscreteBlocks& b,
                                                  const std::vector<int>& rows) {
    std::vector<std::string> bad;
    auto fail = [&](const std::string& s) { bad.push_back(s); };
    const int m = b.m, n = b.m + b.u;
    if (static_cast<int>(b.Q.size()) != m + 1 || static_cast<int>(b.p.size()) != n ||
        static_cast<int>(b.upsilon.size()) != m || static_cast<int>(rows.size()) != m) {
        fail("shape");
        return bad;
    }
    const int len = b.Q[m];
    for (const auto& pj : b.p) {
        if (static_cast<int>(pj.size()) != len + 1) {
            fail("shape");
            return bad;
        }
        if (std::any_of(pj.begin(), pj.end(), [](int v) { return v < 0; })) fail("negative_block");
    }
    auto P = [&](int j, int t) { return b.p[j - 1][t]; };

    for (int l = 1; l <= m; ++l) {
        bool ok = P(l, 0) == 0;
        for (int t = b.Q[l - 1] + 1; t <= len; ++t) ok = ok && P(l, t) == 0;
        if (!ok) fail("main_block_support");
    }
    std::vector<int> first_positive;
    for (int j = m + 1; j <= n; ++j) {
        if (P(j, 0) != 0 || P(j, len) != 0) fail("aux_block_endpoints");
        int fp = -1;
        for (int t = 0; t <= len && fp < 0; ++t)
            if (P(j, t) > 0) fp = t;
        if (fp < 0) fail("aux_block_zero");
        first_positive.push_back(fp);
    }
    for (std::size_t s = 1; s < first_positive.size(); ++s)
        if (first_positive[s - 1] >= first_positive[s]) fail("aux_block_order");
    for (int l = 1; l <= m; ++l) {
        for (int t = b.Q[l - 1] + 1; t <= b.Q[l]; ++t) {
            int changes = 0;
            // p_l itself drops to zero right after Q_{l-1}; that is not a block change.
            for (int j = l + (t == b.Q[l - 1] + 1 ? 1 : 0); j <= n; ++j) {
                if (P(j, t) == P(j, t - 1)) continue;
                ++changes;
                if (j < l + 1 || j > rows[l - 1]) fail("block_change_index");
            }
            if (changes > 1) fail("block_change_multiple");
        }
    }

    for (int l = 1; l <= m; ++l) {
        const auto& ups = b.upsilon[l - 1];
        if (ups) {
            if (*ups < 1 || *ups > b.Q[l] - b.Q[l - 1]) {
                fail("virtual_range");
                continue;
            }
            for (int t = b.Q[l - 1] + 1; t <= b.Q[l - 1] + *ups; ++t)
                if (b.p_upper(l, t) != b.p_upper(l, t - 1)) fail("virtual_not_constant");
        }
        if (P(l, b.Q[l - 1]) == 0 && ups) fail("virtual_without_block");
    }

    const auto pts = b.mandated_points();
    std::set<int> keys;
    for (const auto& [t, v] : b.H) {
        keys.insert(t);
        if (v < 0) fail("height_negative");
    }
    if (keys != pts) {
        fail("height_domain");
        return bad;
    }
    auto H = [&](int t) { return b.H.at(t); };
    if (H(0) != 0) fail("height_start");
    for (int l = 1; l <= m; ++l)
        if (H(b.Q[l]) != b.p_upper(0, b.Q[l])) fail("height_at_Q");
    for (int l = 1; l <= m; ++l) {
        const auto& ups = b.upsilon[l - 1];
        const int base = b.Q[l - 1];
        if (ups) {
            if (H(base + *ups - 1) != b.p_upper(0, base) || H(base + *ups) != b.p_upper(0, base) - 1)
                fail("height_at_virtual");
        }
        for (int t = base + 1; t <= b.Q[l]; ++t) {
            for (int j = l + 1; j <= n; ++j) {
                const int jump = P(j, t) - P(j, t - 1);
                if (jump == 0) continue;
                if (H(t - 1) != H(t) + 1 || H(t) < b.p_upper(l, t) || H(t - 1) < b.p_upper(l, t - 1))
                    fail("height_at_jump");
                // Twice (H(t) + 1/2 - p^l(t-1) - p_j(t)) keeps the test in integers.
                const int gap2 = 2 * (H(t) - b.p_upper(l, t - 1) - P(j, t)) + 1;
                if ((jump > 0) != (gap2 > 0)) fail("height_jump_sign");
            }
        }
        if (!ups) {
            int t = base;
            while (t < b.Q[l] && b.p_upper(l, t + 1) == b.p_upper(l, base)) ++t;
            if (H(t) < H(base)) fail("height_plateau");
        }
    }

    bool parity = true;
    for (int l = 1; l <= m; ++l) {
        if ((b.Q[l] + b.p_upper(l, b.Q[l])) % 2 != 0) parity = false;
        if (b.upsilon[l - 1] && *b.upsilon[l - 1] % 2 == 0) parity = false;
        for (int t = b.Q[l - 1] + 1; t <= b.Q[l]; ++t)
            if (b.p_upper(l, t) != b.p_upper(l, t - 1) && (t + H(t)) % 2 != 0) parity = false;
    }
    if (!parity) fail("parity");
    return bad;
}

BlocksResult to_discrete_blocks(const Walk& w, const std::vector<int>& rows, double epsilon) {
    const int m = static_cast<int>(w.powers.size());
    for (int l = 1; l <= m; ++l)
        if (w.marked[l - 1] != l) return {std::nullopt, "marked_indices"};
    validate_walk(w, rows);
    const auto q = w.partial_sums();
    const int len = q[m];
    const auto h = w.height();
    for (int l = 1; l <= m; ++l)
        for (int t = q[l]; t <= len; ++t)
            if (w.at(l, t) != 0) return {std::nullopt, "ending"};

    DiscreteBlocks b;
    b.m = m;
    b.Q = q;
    std::vector<std::pair<int, int>> aux;  // (first positive time, index)
    for (const auto& [j, traj] : w.r) {
        if (j <= m) continue;
        int fp = 0;
        while (traj[fp] == 0) ++fp;
        aux.push_back({fp, j});
    }
    std::sort(aux.begin(), aux.end());
    b.u = static_cast<int>(aux.size());
    for (int l = 1; l <= m; ++l) {
        std::vector<int> pl(len + 1, 0);
        for (int t = 0; t <= q[l - 1]; ++t) pl[t] = w.at(l, t);
        b.p.push_back(std::move(pl));
    }
    for (const auto& [fp, j] : aux) b.p.push_back(w.r.at(j));

    const auto jumps = jump_data(w);
    for (int l = 1; l <= m; ++l) {
        std::optional<int> ups;
        for (int t = 1; t <= q[l] - q[l - 1]; ++t) {
            if (jumps.Delta.count(q[l - 1] + t)) break;
            if (h[q[l - 1] + t] < h[q[l - 1]]) {
                ups = t;
                break;
            }
        }
        b.upsilon.push_back(ups);
    }
    for (int t : b.mandated_points()) b.H[t] = h[t];

    const double window = epsilon * std::pow(static_cast<double>(w.N), 2.0 / 3.0);
    for (int l = 1; l <= m; ++l) {
        const int base = q[l - 1];
        for (int t = base + 1; t <= len && t <= base + window; ++t)
            if (b.p_upper(l, t) != b.p_upper(l, base)) return {std::nullopt, "early_jump"};
        if (b.upsilon[l - 1] && *b.upsilon[l - 1] <= window) return {std::nullopt, "early_virtual"};
    }
    const auto bad = validate_discrete_blocks(b, rows);
    if (!bad.empty()) return {std::nullopt, "invalid_image:" + bad.front()};
    return {b, ""};
}

Preimage preimage(const DiscreteBlocks& b, int N, const std::vector<int>& rows,
                  const std::vector<int>& aux, double epsilon, std::size_t budget) {
    require(static_cast<int>(aux.size()) == b.u, "one auxiliary index per auxiliary block");
    const int m = b.m, len = b.Q[m];
    for (int j : aux) require(j > m && j <= N, "auxiliary indices must lie in m+1..N");

    // Pointwise constraints: the block height is the path height at every
    // mandated point, and forced drops are enforced on both ends.
    std::vector<std::optional<int>> fixed(len + 1);
    for (const auto& [t, v] : b.H) fixed[t] = v;
    std::vector<int> floor(len + 1);
    for (int t = 0; t <= len; ++t) floor[t] = b.p_upper(0, t);
    std::vector<int> next_fixed(len + 2, len);
    for (int t = len; t >= 0; --t) next_fixed[t] = fixed[t] ? t : next_fixed[t + 1];

    Preimage out;
    std::vector<int> path(len + 1, 0);
    std::vector<int> powers;
    for (int l = 1; l <= m; ++l) powers.push_back(b.Q[l] - b.Q[l - 1]);
    std::vector<int> marked(m);
    std::iota(marked.begin(), marked.end(), 1);

    auto emit = [&]() {
        if (++out.heights > budget) throw ResourceError("preimage budget exceeded", out.heights - 1);
        std::map<int, std::vector<int>> traj;
        for (int l = 1; l <= m; ++l) {
            std::vector<int> rl(len + 1, 0);
            for (int t = 0; t <= b.Q[l - 1]; ++t) rl[t] = b.p[l - 1][t];
            for (int t = b.Q[l - 1] + 1; t <= b.Q[l]; ++t) rl[t] = path[t] - b.p_upper(l, t);
            traj[l] = std::move(rl);
        }
        for (int s = 0; s < b.u; ++s) traj[aux[s]] = b.p[m + s];
        Walk w = make_walk(marked, powers, N, traj);
        try {
            auto res = to_discrete_blocks(w, rows, epsilon);
            if (res.blocks && *res.blocks == b) out.walks.push_back(std::move(w));
        } catch (const ArgumentError&) {
            // Not a walk: the triple admits no member with this height path.
        }
    };

    std::function<void(int)> dfs = [&](int t) {
        if (t > len) {
            emit();
            return;
        }
        for (int step : {1, -1}) {
            const int v = path[t - 1] + step;
            if (v < floor[t]) continue;
            if (fixed[t] && *fixed[t] != v) continue;
            const int nf = next_fixed[t];
            if (std::abs(*fixed[nf] - v) > nf - t) continue;
            path[t] = v;
            dfs(t + 1);
        }
    };
    if (fixed[len]) dfs(1);
    return out;
}

}  // namespace airy
