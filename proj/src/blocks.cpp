#include "airy/blocks.hpp"

#include "airy/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

namespace airy {

// ---------------------------------------------------------------- block functions

double BlockFunction::value(double x) const {
    const auto it = std::upper_bound(breaks.begin(), breaks.end(), x);
    return levels[it - breaks.begin()];
}

double BlockFunction::left_limit(double x) const {
    const auto it = std::lower_bound(breaks.begin(), breaks.end(), x);
    return levels[it - breaks.begin()];
}

bool BlockFunction::is_zero() const {
    return std::all_of(levels.begin(), levels.end(), [](double v) { return v == 0; });
}

std::vector<std::pair<double, double>> BlockFunction::jumps() const {
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i < breaks.size(); ++i)
        if (levels[i + 1] != levels[i]) out.emplace_back(breaks[i], levels[i + 1] - levels[i]);
    return out;
}

// ---------------------------------------------------------------- block processes

std::vector<double> BlockProcess::Q() const {
    std::vector<double> q(m + 1, 0.0);
    for (int l = 1; l <= m; ++l) q[l] = q[l - 1] + kappa[l - 1];
    return q;
}

double BlockProcess::p_upper(int l, double x) const {
    double s = 0;
    for (std::size_t j = l; j < p.size(); ++j) s += p[j].value(x);
    return s;
}

double BlockProcess::p_upper_left(int l, double x) const {
    if (x <= 0) return 0;
    double s = 0;
    for (std::size_t j = l; j < p.size(); ++j) s += p[j].left_limit(x);
    return s;
}

std::vector<double> BlockProcess::Delta(int j, int l) const {
    const auto q = Q();
    std::vector<double> out;
    for (const auto& [x, jump] : p[j - 1].jumps())
        if (x > q[l - 1] && x < q[l]) out.push_back(x);
    return out;
}

int BlockProcess::delta() const {
    int d = 0;
    for (int j = 1; j <= static_cast<int>(p.size()); ++j)
        for (int l = 1; l <= m; ++l) d += static_cast<int>(Delta(j, l).size());
    return d;
}

double BlockProcess::support_end(int j) const {
    const auto js = p[j - 1].jumps();
    require(!js.empty(), "block has no jumps");
    return js.back().first;
}

std::vector<double> Blocks::mandated_points() const {
    std::vector<double> pts = bp.Q();
    for (int j = 1; j <= static_cast<int>(bp.p.size()); ++j)
        for (int l = 1; l <= bp.m; ++l)
            for (double x : bp.Delta(j, l)) pts.push_back(x);
    const auto q = bp.Q();
    for (int l = 1; l <= bp.m && l <= static_cast<int>(upsilon.size()); ++l)
        if (upsilon[l - 1]) pts.push_back(q[l - 1] + *upsilon[l - 1]);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

namespace {

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(a)); }

std::optional<double> lookup(const std::map<double, double>& H, double x, double tol) {
    auto it = H.lower_bound(x - tol * std::max(1.0, std::abs(x)));
    if (it != H.end() && near(it->first, x, tol)) return it->second;
    return std::nullopt;
}

double stage_first_point(const BlockProcess& bp, int l) {
    double first = bp.Q()[l];
    for (int j = 1; j <= static_cast<int>(bp.p.size()); ++j)
        for (double x : bp.Delta(j, l)) first = std::min(first, x);
    return first;
}

}  // namespace

std::vector<std::string> validate_blocks(const Blocks& b, double tol) {
    std::vector<std::string> out;
    auto flag = [&](const char* name) {
        if (std::find(out.begin(), out.end(), name) == out.end()) out.emplace_back(name);
    };
    const auto& bp = b.bp;

    // Shape first; later checks assume it.
    if (bp.m < 1 || static_cast<int>(bp.kappa.size()) != bp.m ||
        static_cast<int>(bp.p.size()) < bp.m ||
        std::any_of(bp.kappa.begin(), bp.kappa.end(), [](double k) { return !(k > 0); })) {
        flag("block_shape");
        return out;
    }
    const auto q = bp.Q();
    for (const auto& f : bp.p) {
        bool ok = f.levels.size() == f.breaks.size() + 1 && near(f.a, 0, tol) && near(f.b, q[bp.m], tol);
        for (std::size_t i = 0; ok && i < f.breaks.size(); ++i)
            ok = f.breaks[i] > f.a && f.breaks[i] < f.b && (i == 0 || f.breaks[i] > f.breaks[i - 1]);
        if (!ok) {
            flag("block_shape");
            return out;
        }
    }

    // Each p_j is a block function.
    for (const auto& f : bp.p) {
        if (std::any_of(f.levels.begin(), f.levels.end(), [](double v) { return v < 0; }))
            flag("block_negative");
        if (f.levels.front() != 0 || f.levels.back() != 0) flag("block_endpoint");
        const auto first = std::find_if(f.levels.begin(), f.levels.end(), [](double v) { return v > 0; });
        const auto last = std::find_if(f.levels.rbegin(), f.levels.rend(), [](double v) { return v > 0; });
        if (first != f.levels.end() && std::find(first, last.base(), 0.0) != last.base())
            flag("block_support");
        for (std::size_t i = 1; i < f.levels.size(); ++i)
            if (f.levels[i] == f.levels[i - 1]) flag("block_spurious_break");
    }

    const int total = static_cast<int>(bp.p.size());
    for (int j = 1; j <= total; ++j) {
        const auto& f = bp.p[j - 1];
        if (j <= bp.m) {
            if (f.value(q[j - 1]) != 0) flag("main_block_tail");
            for (std::size_t i = 0; i < f.breaks.size(); ++i)
                if (f.breaks[i] >= q[j - 1] && f.levels[i + 1] != 0) flag("main_block_tail");
        } else if (f.is_zero()) {
            flag("extra_block_zero");
        }
        for (const auto& [x, jump] : f.jumps())
            for (int l = 1; l <= bp.m; ++l)
                if (near(x, q[l - 1], tol) && j != l) flag("left_continuity");
    }

    // Regularity: disjoint jump sets, extra blocks ordered by first jump.
    std::vector<double> all;
    for (int j = 1; j <= total; ++j)
        for (int l = 1; l <= bp.m; ++l)
            for (double x : bp.Delta(j, l)) all.push_back(x);
    std::sort(all.begin(), all.end());
    for (std::size_t i = 1; i < all.size(); ++i)
        if (near(all[i], all[i - 1], tol)) flag("jumps_overlap");
    double prev_min = -INFINITY;
    for (int j = bp.m + 1; j <= total; ++j) {
        double mn = INFINITY;
        for (int l = 1; l <= bp.m; ++l)
            for (double x : bp.Delta(j, l)) mn = std::min(mn, x);
        if (!(mn > prev_min)) flag("extra_block_order");
        prev_min = mn;
    }

    // Virtual blocks.
    if (static_cast<int>(b.upsilon.size()) != bp.m) {
        flag("virtual_count");
        return out;
    }
    for (int l = 1; l <= bp.m; ++l) {
        const auto& v = b.upsilon[l - 1];
        if (!v) continue;
        if (!(*v > 0) || !(q[l - 1] + *v < stage_first_point(bp, l))) flag("virtual_position");
        if (l == 1 || bp.p[l - 1].left_limit(q[l - 1]) == 0) flag("virtual_not_allowed");
    }

    // Heights.
    const auto pts = b.mandated_points();
    bool domain_ok = pts.size() == b.H.size();
    for (double x : pts) domain_ok = domain_ok && lookup(b.H, x, tol).has_value();
    if (!domain_ok) {
        flag("height_domain");
        return out;
    }
    auto H = [&](double x) { return *lookup(b.H, x, tol); };
    for (const auto& [x, h] : b.H)
        if (h < 0) flag("height_negative");
    if (!near(H(0), 0, tol)) flag("height_at_Q");
    for (int l = 1; l <= bp.m; ++l)
        if (!near(H(q[l]), bp.p_upper_left(0, q[l]), tol)) flag("height_at_Q");
    for (int l = 1; l <= bp.m; ++l)
        if (b.upsilon[l - 1] && !near(H(q[l - 1] + *b.upsilon[l - 1]), bp.p_upper_left(0, q[l - 1]), tol))
            flag("height_at_virtual");
    const double slack = tol * std::max(1.0, q[bp.m]);
    for (int j = 1; j <= total; ++j)
        for (const auto& [x, jump] : bp.p[j - 1].jumps()) {
            bool in_delta = false;
            for (int l = 1; l <= bp.m; ++l) in_delta = in_delta || (x > q[l - 1] && x < q[l]);
            if (!in_delta) continue;
            const double h = H(x);
            if (h < std::max(bp.p_upper(0, x), bp.p_upper_left(0, x)) - slack) flag("height_below_floor");
            const double d = h - bp.p_upper_left(0, x) - bp.p[j - 1].value(x);
            if ((jump > 0 && d < -slack) || (jump < 0 && d > slack)) flag("height_jump_sign");
        }
    for (int l = 1; l <= bp.m; ++l)
        if (!b.upsilon[l - 1] && H(stage_first_point(bp, l)) < H(q[l - 1]) - slack)
            flag("height_stage_start");
    return out;
}

// ---------------------------------------------------------------- Xi partition

std::vector<XiSegment> xi_partition(const Blocks& b) {
    const auto bad = validate_blocks(b);
    if (!bad.empty()) {
        std::string msg = "invalid blocks:";
        for (const auto& s : bad) msg += " " + s;
        throw ArgumentError(msg);
    }
    const auto& bp = b.bp;
    const auto q = bp.Q();
    const auto pts = b.mandated_points();
    std::set<double> starts(q.begin(), q.end() - 1);  // Q_0..Q_{m-1}
    std::set<double> level_ends(q.begin() + 1, q.end());
    for (int l = 1; l <= bp.m; ++l)
        if (b.upsilon[l - 1]) level_ends.insert(q[l - 1] + *b.upsilon[l - 1]);
    for (int j = bp.m + 1; j <= static_cast<int>(bp.p.size()); ++j) level_ends.insert(bp.support_end(j));

    std::vector<XiSegment> out;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double x = pts[i], y = pts[i + 1];
        const bool from_start = starts.count(x) > 0;
        const bool to_level = level_ends.count(y) > 0;
        XiSegment s{x, y, 0, 0};
        s.A = from_start ? bp.p_upper_left(0, x) : bp.p_upper(0, x);
        s.cls = from_start ? (to_level ? 1 : 2) : (to_level ? 3 : 4);
        out.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------- integrand

namespace {

struct SegmentKernel {
    double len = 0, h = 0, g = 0;  // path from h to g above the floor
    double factor = 1;             // sign, prefactor and F kernel
};

SegmentKernel segment_kernel(const Blocks& b, const XiSegment& s, double beta) {
    const auto& bp = b.bp;
    const double Hx = *lookup(b.H, s.x, 1e-9), Hy = *lookup(b.H, s.y, 1e-9);
    SegmentKernel k;
    k.len = s.y - s.x;
    const double inv_beta = std::isfinite(beta) ? 1 / beta : 0.0;
    const double sign = bp.p_upper(0, s.x) < bp.p_upper_left(0, s.x) ? -1.0 : 1.0;
    switch (s.cls) {
        case 1:
            k.factor = std::exp(inv_beta * k.len * (Hx - bp.p_upper(0, s.x))) * F00(k.len);
            break;
        case 2:
            k.g = std::max(0.0, Hy - Hx);
            k.factor = std::exp(inv_beta * k.len * (Hx - bp.p_upper(0, s.x))) * F0(k.len, k.g);
            break;
        case 3:
            k.h = std::max(0.0, Hx - Hy);
            k.factor = sign * F0(k.len, k.h);
            break;
        case 4:
            k.h = std::max(0.0, Hx - bp.p_upper(0, s.x));
            k.g = std::max(0.0, Hy - bp.p_upper_left(0, s.y));
            k.factor = sign * F(k.len, k.h, k.g);
            break;
    }
    return k;
}

double power_of_two_factor(const Blocks& b) {
    int v = 0;
    for (const auto& u : b.upsilon) v += u.has_value();
    return std::ldexp(1.0, -(b.bp.delta() + v));
}

}  // namespace

double blocks_integrand_sample(const Blocks& b, const std::vector<XiSegment>& xi, double beta,
                               int mesh, Rng& rng) {
    double prod = power_of_two_factor(b);
    for (const auto& s : xi) {
        const auto k = segment_kernel(b, s, beta);
        if (k.factor == 0) return 0;
        prod *= k.factor;
        if (std::isfinite(beta)) {
            const BridgeSpec spec{k.len, k.h, k.g, BridgeKind::BridgePositive, mesh};
            prod *= std::exp(trapezoid_area(sample_killed_bridge_3d(spec, rng), k.len) / beta);
        }
    }
    return prod;
}

FunctionalEstimate blocks_integrand(const Blocks& b, double beta, long mc_budget,
                                    std::uint64_t seed, int mesh) {
    require(beta > 0, "beta must be positive");
    require(mc_budget >= 1, "budget must be positive");
    const auto xi = xi_partition(b);
    FunctionalEstimate est;
    est.mesh = mesh;
    if (!std::isfinite(beta)) {
        Rng unused(seed);
        est.mean = blocks_integrand_sample(b, xi, beta, mesh, unused);
        est.n_samples = 1;
        return est;
    }
    Rng rng(seed);
    double mean = 0, m2 = 0;
    for (long s = 1; s <= mc_budget; ++s) {
        const double v = blocks_integrand_sample(b, xi, beta, mesh, rng);
        const double d = v - mean;
        mean += d / s;
        m2 += d * (v - mean);
    }
    est.mean = mean;
    est.n_samples = mc_budget;
    est.stderr_ = mc_budget > 1 ? std::sqrt(m2 / (mc_budget - 1) / mc_budget) : 0.0;
    return est;
}

Blocks illustrated_blocks() {
    Blocks b;
    b.bp.m = 3;
    b.bp.kappa = {9, 8, 11};
    const double end = 28;
    b.bp.p = {
        BlockFunction::zero(0, end),
        {0, end, {6, 9}, {0, 2, 0}},
        {0, end, {3, 12, 17}, {0, 1.5, 1, 0}},
        {0, end, {15, 24}, {0, 1.7, 0}},
    };
    b.upsilon = {std::nullopt, 2.0, 1.5};
    b.H = {{0, 0},    {3, 2.7},  {6, 5.6},    {9, 3.5},  {11, 3.5}, {12, 1.9},
           {15, 4.1}, {17, 2.7}, {18.5, 2.7}, {24, 1.7}, {28, 0}};
    return b;
}

// ---------------------------------------------------------------- strata

int Stratum::total_delta() const {
    int s = 0;
    for (const auto& row : delta) s += std::accumulate(row.begin(), row.end(), 0);
    return s;
}

std::string Stratum::describe() const {
    std::ostringstream os;
    os << "u=" << u << " delta=[";
    for (std::size_t j = 0; j < delta.size(); ++j) {
        os << (j ? ";" : "");
        for (std::size_t l = 0; l < delta[j].size(); ++l) os << (l ? "," : "") << delta[j][l];
    }
    os << "] upsilon=";
    for (bool v : virtual_set) os << (v ? '+' : '0');
    return os.str();
}

namespace {

// All vectors of length n with entries >= 0 summing to at most cap.
void compositions(int n, int cap, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == n) {
        out.push_back(cur);
        return;
    }
    for (int v = 0; v <= cap; ++v) {
        cur.push_back(v);
        compositions(n, cap - v, cur, out);
        cur.pop_back();
    }
}

int sum(const std::vector<int>& v) { return std::accumulate(v.begin(), v.end(), 0); }

}  // namespace

std::vector<Stratum> enumerate_strata(int m, int delta_max) {
    require(m >= 1, "m must be positive");
    require(delta_max >= 0, "delta_max must be nonnegative");
    std::vector<Stratum> out;
    // Row j <= m may jump only in stages before j; rows j > m need at least two jumps.
    std::vector<std::vector<std::vector<int>>> main_rows(m);
    for (int j = 1; j <= m; ++j) {
        std::vector<int> cur;
        std::vector<std::vector<int>> rows;
        compositions(j - 1, delta_max, cur, rows);
        for (auto& r : rows) r.resize(m, 0);
        main_rows[j - 1] = rows;
    }
    std::vector<std::vector<int>> extra_rows;
    {
        std::vector<int> cur;
        compositions(m, delta_max, cur, extra_rows);
        extra_rows.erase(std::remove_if(extra_rows.begin(), extra_rows.end(),
                                        [](const std::vector<int>& r) { return sum(r) < 2; }),
                         extra_rows.end());
    }
    std::vector<std::vector<int>> rows;
    std::function<void(int, int)> rec_main, rec_extra;
    auto emit = [&](int u) {
        Stratum s;
        s.u = u;
        s.delta = rows;
        // upsilon_l may be set only when l > 1 and p_l is positive just before Q_{l-1}.
        std::vector<int> allowed;
        for (int l = 2; l <= m; ++l)
            if (sum(rows[l - 1]) > 0) allowed.push_back(l);
        for (unsigned mask = 0; mask < (1u << allowed.size()); ++mask) {
            s.virtual_set.assign(m, false);
            for (std::size_t i = 0; i < allowed.size(); ++i)
                if (mask >> i & 1u) s.virtual_set[allowed[i] - 1] = true;
            out.push_back(s);
        }
    };
    rec_extra = [&](int u, int budget) {
        emit(u);
        for (const auto& r : extra_rows) {
            if (sum(r) > budget) continue;
            rows.push_back(r);
            rec_extra(u + 1, budget - sum(r));
            rows.pop_back();
        }
    };
    rec_main = [&](int j, int budget) {
        if (j > m) {
            rec_extra(0, budget);
            return;
        }
        for (const auto& r : main_rows[j - 1]) {
            if (sum(r) > budget) continue;
            rows.push_back(r);
            rec_main(j + 1, budget - sum(r));
            rows.pop_back();
        }
    };
    rec_main(1, delta_max);
    return out;
}

namespace {

double half_normal_pdf(double x, double s) {
    return std::sqrt(2 / M_PI) / s * std::exp(-x * x / (2 * s * s));
}

struct Draw {
    Blocks blocks;
    double weight = 0;  // 1 / proposal density, 0 when outside the stratum
};

// Proposal: gaps within a stage ~ Dirichlet(1/2) (matches the x^{-1/2} kernel
// singularities), uniform interleaving of owners, half-normal levels, and
// half-normal excess heights scaled by the adjacent gaps.
Draw draw_blocks(const Stratum& st, const LQuery& q, Rng& rng) {
    Draw d;
    d.weight = 1;
    BlockProcess bp;
    bp.m = q.m;
    bp.kappa = q.kappa;
    const auto Q = bp.Q();
    const int total = q.m + st.u;
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    std::normal_distribution<double> nd;
    std::gamma_distribution<double> gd(0.5, 1.0);

    // jump positions per owner, in time order
    std::vector<std::vector<double>> pos(total);
    for (int l = 1; l <= q.m; ++l) {
        std::vector<int> owners;
        for (int j = 1; j <= total; ++j)
            for (int c = 0; c < st.delta[j - 1][l - 1]; ++c) owners.push_back(j);
        const int n = static_cast<int>(owners.size()) + (st.virtual_set[l - 1] ? 1 : 0);
        if (n == 0) continue;
        const int K = n + 1;
        const double L = q.kappa[l - 1];
        std::vector<double> g(K);
        double gs = 0;
        for (auto& v : g) gs += (v = gd(rng));
        double log_q = std::lgamma(K / 2.0) - K * std::lgamma(0.5) - (K - 1) * std::log(L);
        for (auto& v : g) {
            v /= gs;
            log_q -= 0.5 * std::log(v);
        }
        d.weight *= std::exp(-log_q);
        std::vector<double> pts;
        double acc = Q[l - 1];
        for (int i = 0; i < n; ++i) pts.push_back(acc += g[i] * L);
        if (pts.front() - Q[l - 1] <= q.epsilon) {
            d.weight = 0;
            return d;
        }
        std::size_t first = 0;
        if (st.virtual_set[l - 1]) {
            d.blocks.upsilon.resize(q.m);
            d.blocks.upsilon[l - 1] = pts[0] - Q[l - 1];
            first = 1;
        }
        // uniform interleaving; weight by the multinomial count
        std::shuffle(owners.begin(), owners.end(), rng);
        double log_multi = std::lgamma(owners.size() + 1.0);
        for (int j = 1; j <= total; ++j) log_multi -= std::lgamma(st.delta[j - 1][l - 1] + 1.0);
        d.weight *= std::exp(log_multi);
        for (std::size_t i = 0; i < owners.size(); ++i) pos[owners[i] - 1].push_back(pts[first + i]);
    }
    d.blocks.upsilon.resize(q.m);

    const double level_scale = std::sqrt(Q[q.m]);
    for (int j = 1; j <= total; ++j) {
        BlockFunction f = BlockFunction::zero(0, Q[q.m]);
        const auto& xs = pos[j - 1];
        if (!xs.empty()) {
            f.breaks = xs;
            f.levels.assign(1, 0.0);
            for (std::size_t i = 0; i < xs.size(); ++i) {
                const bool final_drop = j > q.m && i + 1 == xs.size();
                if (final_drop) {
                    f.levels.push_back(0);
                } else {
                    const double c = std::abs(nd(rng)) * level_scale;
                    d.weight /= half_normal_pdf(c, level_scale);
                    f.levels.push_back(c);
                }
            }
            if (j <= q.m) {  // drops to zero at Q_{j-1}
                f.breaks.push_back(Q[j - 1]);
                f.levels.push_back(0);
            }
        }
        bp.p.push_back(f);
    }
    d.blocks.bp = bp;

    // heights
    auto& H = d.blocks.H;
    for (int l = 0; l <= q.m; ++l) H[Q[l]] = bp.p_upper_left(0, Q[l]);
    for (int l = 1; l <= q.m; ++l)
        if (d.blocks.upsilon[l - 1]) H[Q[l - 1] + *d.blocks.upsilon[l - 1]] = bp.p_upper_left(0, Q[l - 1]);
    const auto pts = d.blocks.mandated_points();
    for (int j = 1; j <= total; ++j) {
        const auto& f = bp.p[j - 1];
        const auto& xs = pos[j - 1];
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double x = xs[i];
            const double base = bp.p_upper_left(0, x);
            const double jump = f.value(x) - f.left_limit(x);
            if (j > q.m && i + 1 == xs.size()) {
                H[x] = base;
            } else if (jump < 0) {
                H[x] = base + ud(rng) * f.value(x);
                d.weight *= f.value(x);
            } else {
                const auto it = std::lower_bound(pts.begin(), pts.end(), x);
                const double s1 = std::sqrt(x - *(it - 1)), s2 = std::sqrt(*(it + 1) - x);
                const double h = std::abs(nd(rng)) * (ud(rng) < 0.5 ? s1 : s2);
                H[x] = base + f.value(x) + h;
                d.weight /= 0.5 * (half_normal_pdf(h, s1) + half_normal_pdf(h, s2));
            }
        }
    }
    if (!validate_blocks(d.blocks).empty()) d.weight = 0;
    return d;
}

}  // namespace

LResult L_beta_truncated(const LQuery& q) {
    require(q.m >= 1 && static_cast<int>(q.kappa.size()) == q.m, "kappa must have m entries");
    require(static_cast<int>(q.taus.size()) == q.m, "taus must have m entries");
    require(std::is_sorted(q.taus.begin(), q.taus.end()), "taus must be nondecreasing");
    require(q.epsilon > 0, "epsilon must be positive");
    require(q.delta_max >= 0 && q.delta_max <= 3, "delta_max must be in [0, 3]");
    require(q.beta > 0, "beta must be positive");
    require(q.mc_budget >= 1, "budget must be positive");
    for (double k : q.kappa) require(k > q.epsilon, "each k must exceed epsilon");

    LResult res;
    double total_var = 0;
    const auto strata = enumerate_strata(q.m, q.delta_max);
    for (std::size_t si = 0; si < strata.size(); ++si) {
        const auto& st = strata[si];
        Rng rng(q.seed + 0x9e3779b97f4a7c15ULL * (si + 1));
        StratumResult r;
        r.stratum = st;
        double mean = 0, m2 = 0;
        for (long s = 1; s <= q.mc_budget; ++s) {
            double v = 0;
            auto draw = draw_blocks(st, q, rng);
            if (draw.weight > 0) {
                const auto xi = xi_partition(draw.blocks);
                double tilt = 0;
                const auto Q = draw.blocks.bp.Q();
                for (int l = 1; l < q.m; ++l)
                    tilt += (q.taus[l - 1] - q.taus[l]) * draw.blocks.H.at(Q[l]) / 2;
                v = draw.weight * std::exp(tilt) *
                    blocks_integrand_sample(draw.blocks, xi, q.beta, q.mesh, rng);
                if (v != 0) ++r.n_nonzero;
            }
            const double dv = v - mean;
            mean += dv / s;
            m2 += dv * (v - mean);
        }
        r.estimate.mean = mean;
        r.estimate.n_samples = q.mc_budget;
        r.estimate.mesh = q.mesh;
        r.estimate.stderr_ = q.mc_budget > 1 ? std::sqrt(m2 / (q.mc_budget - 1) / q.mc_budget) : 0.0;
        r.flagged = r.n_nonzero < 100 || r.estimate.stderr_ > 0.2 * std::abs(mean);
        res.total.mean += mean;
        total_var += r.estimate.stderr_ * r.estimate.stderr_;
        res.total.n_samples += q.mc_budget;
        res.strata.push_back(r);
    }
    res.total.stderr_ = std::sqrt(total_var);
    res.total.mesh = q.mesh;
    return res;
}

Extrapolation epsilon_extrapolate(const std::vector<double>& eps, const std::vector<double>& values,
                                  const std::vector<double>& stderrs) {
    require(eps.size() >= 3, "need at least three epsilon values");
    require(values.size() == eps.size() && stderrs.size() == eps.size(), "length mismatch");
    std::vector<std::size_t> order(eps.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return eps[a] > eps[b]; });
    for (auto i : order) require(eps[i] > 0, "epsilon must be positive");

    Extrapolation out;
    int sgn = 0;
    for (std::size_t k = 1; k < order.size(); ++k) {
        const double d = values[order[k]] - values[order[k - 1]];
        const int s = (d > 0) - (d < 0);
        if (s != 0 && sgn != 0 && s != sgn) out.monotone = false;
        if (s != 0) sgn = s;
    }
    if (!out.monotone) {
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        out.value = values[order.back()];
        out.uncertainty = (*hi - *lo) + stderrs[order.back()];
        return out;
    }
    // Weighted least squares on (sqrt(eps), value).
    const bool weighted = std::all_of(stderrs.begin(), stderrs.end(), [](double s) { return s > 0; });
    double S = 0, Sx = 0, Sy = 0, Sxx = 0, Sxy = 0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const double w = weighted ? 1 / (stderrs[i] * stderrs[i]) : 1.0;
        const double x = std::sqrt(eps[i]);
        S += w;
        Sx += w * x;
        Sy += w * values[i];
        Sxx += w * x * x;
        Sxy += w * x * values[i];
    }
    const double det = S * Sxx - Sx * Sx;
    out.slope = (S * Sxy - Sx * Sy) / det;
    out.value = (Sy - out.slope * Sx) / S;
    double chi2 = 0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const double r = values[i] - out.value - out.slope * std::sqrt(eps[i]);
        chi2 += weighted ? r * r / (stderrs[i] * stderrs[i]) : r * r;
    }
    const double dof = static_cast<double>(eps.size()) - 2;
    const double var_a = Sxx / det;
    if (weighted)
        out.uncertainty = std::sqrt(var_a * std::max(1.0, chi2 / dof));
    else
        out.uncertainty = std::sqrt(var_a * chi2 / dof);
    return out;
}

}  // namespace airy
