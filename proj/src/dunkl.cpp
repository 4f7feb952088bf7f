#include "airy/dunkl.hpp"

#include "airy/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace airy {

// ---------------------------------------------------------------------------
// RawPoly

RawPoly RawPoly::constant(int nvars, const Rational& c) {
    RawPoly p(nvars);
    p.add(Exponents(static_cast<std::size_t>(nvars), 0), c);
    return p;
}

RawPoly RawPoly::monomial(const Exponents& e, const Rational& c) {
    RawPoly p(static_cast<int>(e.size()));
    p.add(e, c);
    return p;
}

Rational RawPoly::coefficient(const Exponents& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? Rational(0) : it->second;
}

Rational RawPoly::constant_term() const {
    return coefficient(Exponents(static_cast<std::size_t>(nvars_), 0));
}

int RawPoly::max_degree() const {
    int best = 0;
    for (const auto& [e, c] : terms_)
        best = std::max(best, std::accumulate(e.begin(), e.end(), 0));
    return best;
}

void RawPoly::add(const Exponents& e, const Rational& c) {
    if (c == 0) return;
    auto [it, fresh] = terms_.try_emplace(e, c);
    if (!fresh) {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }
}

RawPoly& RawPoly::operator+=(const RawPoly& other) {
    for (const auto& [e, c] : other.terms_) add(e, c);
    return *this;
}

RawPoly& RawPoly::operator-=(const RawPoly& other) {
    for (const auto& [e, c] : other.terms_) add(e, -c);
    return *this;
}

RawPoly RawPoly::operator-(const RawPoly& other) const {
    RawPoly out = *this;
    out -= other;
    return out;
}

namespace {

void check_spec(const OperatorSpec& spec) {
    require(spec.N >= 1, "operator N must be >= 1");
    require(spec.beta > 0, "beta must be positive");
}

// Emits every term of D_i x^e as (exponents, factor) pairs; case analysis of
// the divided difference (x_i^a x_j^d - x_j^a x_i^d)/(x_i - x_j).
template <class Emit>
void dunkl_terms(const Exponents& e, int i, const OperatorSpec& spec, Emit&& emit) {
    const int ii = i - 1;
    const int a = e[static_cast<std::size_t>(ii)];
    const Rational half_beta = spec.beta / 2;

    if (spec.tau != 0) {
        Exponents up = e;
        ++up[static_cast<std::size_t>(ii)];
        emit(up, spec.tau);
    }
    if (a > 0) {
        int below = 0;
        for (int j = 0; j < spec.N; ++j)
            if (j != ii && e[static_cast<std::size_t>(j)] < a) ++below;
        Exponents down = e;
        --down[static_cast<std::size_t>(ii)];
        emit(down, Rational(a) + half_beta * below);
    }
    for (int j = 0; j < spec.N; ++j) {
        if (j == ii) continue;
        const int d = e[static_cast<std::size_t>(j)];
        if (a >= d + 2) {
            for (int g = 2; g <= a - d; ++g) {
                Exponents t = e;
                t[static_cast<std::size_t>(ii)] = a - g;
                t[static_cast<std::size_t>(j)] = d + g - 1;
                emit(t, half_beta);
            }
        } else if (a < d) {
            for (int g = 1; g <= d - a; ++g) {
                Exponents t = e;
                t[static_cast<std::size_t>(ii)] = a + g - 1;
                t[static_cast<std::size_t>(j)] = d - g;
                emit(t, -half_beta);
            }
        }
    }
}

}  // namespace

RawPoly apply_dunkl(const RawPoly& p, int i, const OperatorSpec& spec, const EngineLimits& lim) {
    check_spec(spec);
    require(spec.N <= p.nvars(), "operator N exceeds the number of variables");
    require(i >= 1 && i <= spec.N, "Dunkl index outside 1..N");
    if (p.max_degree() + 1 > lim.max_degree)
        throw ResourceError("degree cap exceeded in apply_dunkl");
    RawPoly out(p.nvars());
    for (const auto& [e, c] : p.terms())
        dunkl_terms(e, i, spec, [&](const Exponents& t, const Rational& f) { out.add(t, c * f); });
    if (out.terms().size() > lim.max_terms)
        throw ResourceError("term cap exceeded in apply_dunkl", out.terms().size());
    return out;
}

RawPoly apply_dunkl_power(const RawPoly& p, int i, int times, const OperatorSpec& spec,
                          const EngineLimits& lim) {
    RawPoly out = p;
    for (int s = 0; s < times; ++s) out = apply_dunkl(out, i, spec, lim);
    return out;
}

RawPoly apply_power_sum(const RawPoly& p, const OperatorSpec& spec, const EngineLimits& lim) {
    RawPoly out(p.nvars());
    for (int i = 1; i <= spec.N; ++i) out += apply_dunkl_power(p, i, spec.k, spec, lim);
    return out;
}

RawPoly multiply_x(const RawPoly& p, int i) {
    require(i >= 1 && i <= p.nvars(), "variable index out of range");
    RawPoly out(p.nvars());
    for (const auto& [e, c] : p.terms()) {
        Exponents t = e;
        ++t[static_cast<std::size_t>(i - 1)];
        out.add(t, c);
    }
    return out;
}

RawPoly apply_tau_derivative_power_sum(const RawPoly& p, const OperatorSpec& spec,
                                       const EngineLimits& lim) {
    require(spec.k >= 1, "k must be >= 1");
    RawPoly out(p.nvars());
    for (int i = 1; i <= spec.N; ++i) {
        for (int w = 0; w < spec.k; ++w) {
            RawPoly t = apply_dunkl_power(p, i, spec.k - 1 - w, spec, lim);
            t = multiply_x(t, i);
            out += apply_dunkl_power(t, i, w, spec, lim);
        }
    }
    return out;
}

std::size_t count_expansion_terms(const std::vector<int>& marked, const std::vector<int>& powers,
                                  const std::vector<int>& rows, int nvars, const Rational& beta,
                                  const Rational& tau) {
    require(marked.size() == powers.size() && powers.size() == rows.size(),
            "marked/powers/rows length mismatch");
    const std::size_t m = powers.size();
    std::vector<int> steps_after(m + 1, 0);
    for (std::size_t l = m; l-- > 0;) steps_after[l] = steps_after[l + 1] + powers[l];

    std::size_t count = 0;
    std::function<void(const Exponents&, std::size_t, int)> rec =
        [&](const Exponents& e, std::size_t stage, int done) {
            if (stage == m) {
                if (std::all_of(e.begin(), e.end(), [](int v) { return v == 0; })) ++count;
                return;
            }
            if (done == powers[stage]) {
                rec(e, stage + 1, 0);
                return;
            }
            const int left = steps_after[stage] - done;
            const int deg = std::accumulate(e.begin(), e.end(), 0);
            if (deg > left) return;
            OperatorSpec spec{rows[stage], tau, beta, 1};
            dunkl_terms(e, marked[stage], spec,
                        [&](const Exponents& t, const Rational&) { rec(t, stage, done + 1); });
        };
    rec(Exponents(static_cast<std::size_t>(nvars), 0), 0, 0);
    return count;
}

// ---------------------------------------------------------------------------
// Degree profiles

namespace {

int multiplicity(const std::vector<int>& rest, int value, int others) {
    if (value == 0) return others - static_cast<int>(rest.size());
    return static_cast<int>(std::count(rest.begin(), rest.end(), value));
}

// rest with one copy of `from` replaced by `to` (0 means absent), kept sorted.
std::vector<int> replace_one(const std::vector<int>& rest, int from, int to) {
    std::vector<int> out = rest;
    if (from > 0) out.erase(std::find(out.begin(), out.end(), from));
    if (to > 0) out.insert(std::upper_bound(out.begin(), out.end(), to, std::greater<int>()), to);
    return out;
}

std::vector<int> distinct_values(const std::vector<int>& rest, int others) {
    std::vector<int> vals;
    for (int v : rest)
        if (vals.empty() || vals.back() != v) vals.push_back(v);
    if (static_cast<int>(rest.size()) < others) vals.push_back(0);
    return vals;
}

template <class Map, class Key>
void accumulate(Map& m, Key&& key, const Rational& c) {
    if (c == 0) return;
    auto [it, fresh] = m.try_emplace(std::forward<Key>(key), c);
    if (!fresh) {
        it->second += c;
        if (it->second == 0) m.erase(it);
    }
}

}  // namespace

ProfileSum apply_dunkl(const ProfileSum& state, const OperatorSpec& spec, const EngineLimits& lim) {
    check_spec(spec);
    const int others = spec.N - 1;
    const Rational half_beta = spec.beta / 2;
    ProfileSum out;
    for (const auto& [prof, c] : state) {
        const int a = prof.marked;
        const auto& mu = prof.rest;
        require(static_cast<int>(mu.size()) <= others, "profile has more variables than N");
        if (a + 1 > lim.max_degree) throw ResourceError("degree cap exceeded in apply_dunkl");

        if (spec.tau != 0) accumulate(out, DegreeProfile{a + 1, mu}, spec.tau * c);
        if (a > 0) {
            int below = 0;
            for (int d : mu)
                if (d < a) ++below;
            below += others - static_cast<int>(mu.size());
            accumulate(out, DegreeProfile{a - 1, mu}, (Rational(a) + half_beta * below) * c);
        }
        for (int d : distinct_values(mu, others)) {
            if (a >= d + 2) {
                for (int g = 2; g <= a - d; ++g) {
                    const int e = d + g - 1;
                    auto rho = replace_one(mu, d, e);
                    const int mult = multiplicity(rho, e, others);
                    accumulate(out, DegreeProfile{a - g, std::move(rho)}, half_beta * mult * c);
                }
            } else if (a < d) {
                for (int g = 1; g <= d - a; ++g) {
                    const int e = d - g;
                    auto rho = replace_one(mu, d, e);
                    const int mult = multiplicity(rho, e, others);
                    accumulate(out, DegreeProfile{a + g - 1, std::move(rho)}, -half_beta * mult * c);
                }
            }
        }
    }
    if (out.size() > lim.max_terms) throw ResourceError("profile cap exceeded", out.size());
    return out;
}

namespace {

int total_degree(const DegreeProfile& p) {
    return p.marked + std::accumulate(p.rest.begin(), p.rest.end(), 0);
}

}  // namespace

SymPoly apply_power_sum(const SymPoly& f, const OperatorSpec& spec, std::optional<int> prune_above,
                        const EngineLimits& lim) {
    check_spec(spec);
    require(spec.k >= 0, "power must be nonnegative");
    const int n = spec.N;

    ProfileSum state;
    for (const auto& [lam, c] : f) {
        require(static_cast<int>(lam.size()) <= n, "symmetric polynomial uses more than N variables");
        for (int a : distinct_values(lam, n)) state.emplace(DegreeProfile{a, replace_one(lam, a, 0)}, c);
    }
    for (int step = 1; step <= spec.k; ++step) {
        state = apply_dunkl(state, spec, lim);
        if (prune_above) {
            const int allowed = *prune_above + (spec.k - step);
            std::erase_if(state, [&](const auto& kv) { return total_degree(kv.first) > allowed; });
        }
    }

    SymPoly out;
    for (const auto& [prof, c] : state) {
        Partition lam = replace_one(prof.rest, 0, prof.marked);
        const int mult = multiplicity(lam, prof.marked, n);
        accumulate(out, std::move(lam), c * mult);
    }
    return out;
}

RawPoly expand(const SymPoly& f, int nvars) {
    RawPoly out(nvars);
    for (const auto& [lam, c] : f) {
        require(static_cast<int>(lam.size()) <= nvars, "partition longer than variable count");
        Exponents e(static_cast<std::size_t>(nvars), 0);
        std::copy(lam.begin(), lam.end(), e.begin());
        std::sort(e.begin(), e.end());
        do {
            out.add(e, c);
        } while (std::next_permutation(e.begin(), e.end()));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Moments

Rational corners_moment(const std::vector<int>& powers, const std::vector<int>& rows, int N,
                        const Rational& beta, const Rational& tau, const EngineLimits& lim) {
    require(!powers.empty() && powers.size() == rows.size(), "powers and rows must be nonempty and equal length");
    require(rows.front() <= N, "rows must satisfy N >= N_1");
    for (std::size_t l = 0; l < rows.size(); ++l) {
        require(rows[l] >= 1, "rows must be >= 1");
        require(powers[l] >= 0, "powers must be >= 0");
        if (l > 0) require(rows[l] <= rows[l - 1], "rows must be nonincreasing");
    }
    require(tau >= 0, "variance must be >= 0");

    int left = std::accumulate(powers.begin(), powers.end(), 0);
    SymPoly f{{Partition{}, Rational(1)}};
    for (std::size_t l = 0; l < powers.size(); ++l) {
        // Monomials in x_j, j > N_l, are frozen from here on and never reach degree 0.
        std::erase_if(f, [&](const auto& kv) { return static_cast<int>(kv.first.size()) > rows[l]; });
        left -= powers[l];
        f = apply_power_sum(f, OperatorSpec{rows[l], tau, beta, powers[l]}, left, lim);
    }
    auto it = f.find(Partition{});
    return it == f.end() ? Rational(0) : it->second;
}

Rational dbm_moment(const std::vector<int>& powers, const std::vector<Rational>& times, int N,
                    const Rational& beta, const EngineLimits& lim) {
    require(!powers.empty() && powers.size() == times.size(), "powers and times must be nonempty and equal length");
    require(N >= 1, "N must be >= 1");
    for (std::size_t l = 0; l < times.size(); ++l) {
        require(times[l] >= 0, "times must be >= 0");
        require(powers[l] >= 0, "powers must be >= 0");
        if (l > 0) require(times[l] >= times[l - 1], "times must be nondecreasing");
    }
    int left = std::accumulate(powers.begin(), powers.end(), 0);
    SymPoly f{{Partition{}, Rational(1)}};
    for (std::size_t l = 0; l < powers.size(); ++l) {
        left -= powers[l];
        // exp((tau_{l+1}-tau_l)|x|^2/2) between stages amounts to using D-hat at tau_l.
        f = apply_power_sum(f, OperatorSpec{N, times[l], beta, powers[l]}, left, lim);
    }
    auto it = f.find(Partition{});
    return it == f.end() ? Rational(0) : it->second;
}

// ---------------------------------------------------------------------------
// Identities

namespace {

std::vector<Exponents> monomials_up_to(int nvars, int cap) {
    std::vector<Exponents> out;
    Exponents e(static_cast<std::size_t>(nvars), 0);
    std::function<void(int, int)> rec = [&](int pos, int left) {
        if (pos == nvars) {
            out.push_back(e);
            return;
        }
        for (int v = 0; v <= left; ++v) {
            e[static_cast<std::size_t>(pos)] = v;
            rec(pos + 1, left - v);
        }
        e[static_cast<std::size_t>(pos)] = 0;
    };
    rec(0, cap);
    return out;
}

}  // namespace

bool check_commutation(const OperatorSpec& a, const OperatorSpec& b, int degree_cap) {
    require(a.N == b.N, "commutation check needs a common N");
    require(degree_cap >= 0, "degree cap must be >= 0");
    for (const auto& e : monomials_up_to(a.N, degree_cap)) {
        RawPoly m = RawPoly::monomial(e);
        RawPoly ab = apply_power_sum(apply_power_sum(m, b), a);
        RawPoly ba = apply_power_sum(apply_power_sum(m, a), b);
        if (!(ab == ba)) return false;
    }
    return true;
}

bool check_commutation(int N, int k1, int k2, const Rational& beta, const Rational& tau,
                       int degree_cap) {
    return check_commutation(OperatorSpec{N, tau, beta, k1}, OperatorSpec{N, tau, beta, k2},
                             degree_cap);
}

namespace {

// [[A, B], B] = ABB - 2BAB + BBA with A = Pbar_k, B = P_k.
RawPoly nested_image(const OperatorSpec& spec, const RawPoly& m) {
    RawPoly b1 = apply_power_sum(m, spec);
    RawPoly bb = apply_power_sum(b1, spec);
    RawPoly abb = apply_tau_derivative_power_sum(bb, spec);
    RawPoly bab = apply_power_sum(apply_tau_derivative_power_sum(b1, spec), spec);
    RawPoly bba = apply_power_sum(apply_power_sum(apply_tau_derivative_power_sum(m, spec), spec), spec);
    RawPoly out = abb;
    out -= bab;
    out -= bab;
    out += bba;
    return out;
}

}  // namespace

bool check_nested_commutator(int N, int k, const Rational& beta, const Rational& tau,
                             int degree_cap) {
    require(k >= 2, "nested commutator identity needs k >= 2");
    OperatorSpec spec{N, tau, beta, k};
    for (const auto& e : monomials_up_to(N, degree_cap))
        if (!nested_image(spec, RawPoly::monomial(e)).is_zero()) return false;
    return true;
}

RawPoly single_commutator_image(int N, int k, const Rational& beta, const Rational& tau,
                                const Exponents& monomial) {
    OperatorSpec spec{N, tau, beta, k};
    RawPoly m = RawPoly::monomial(monomial);
    RawPoly ab = apply_tau_derivative_power_sum(apply_power_sum(m, spec), spec);
    RawPoly ba = apply_power_sum(apply_tau_derivative_power_sum(m, spec), spec);
    return ab - ba;
}

// ---------------------------------------------------------------------------
// beta = 2 Bessel function

double bessel_beta2(const std::vector<double>& lambda, const std::vector<double>& x) {
    const std::size_t n = lambda.size();
    require(n >= 1 && x.size() == n, "lambda and x must be nonempty and equal length");
    for (std::size_t i = 1; i < n; ++i) require(lambda[i] < lambda[i - 1], "lambda must be strictly decreasing");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) require(x[i] != x[j], "x must have distinct entries");

    Eigen::MatrixXd m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::exp(lambda[i] * x[j]);
    double value = m.determinant();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) value /= (x[i] - x[j]) * (lambda[i] - lambda[j]);
    double fact = 1;
    for (std::size_t j = 1; j < n; ++j) {
        fact *= static_cast<double>(j);
        value *= fact;
    }
    return value;
}

EigenResidual eigenrelation_residual_beta2(const std::vector<double>& lambda,
                                           const std::vector<double>& x, int k, double fd_step) {
    const std::size_t n = x.size();
    require(k >= 1, "k must be >= 1");
    require(fd_step > 0, "fd_step must be positive");
    EigenResidual res;
    double min_gap = INFINITY;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) min_gap = std::min(min_gap, std::abs(x[i] - x[j]));
    // The stencil reaches 2 k h away from x; keep it well inside the spacing.
    res.step_warning = n > 1 && 4.0 * k * fd_step > 0.1 * min_gap;

    using Fn = std::function<double(const std::vector<double>&)>;
    Fn bessel = [&](const std::vector<double>& y) { return bessel_beta2(lambda, y); };

    // D_i g at beta = 2: fourth-order central difference plus exact swap terms.
    auto dunkl = [&](const Fn& g, std::size_t i) -> Fn {
        return [=](const std::vector<double>& y) {
            auto shifted = [&](double s) {
                std::vector<double> z = y;
                z[i] += s;
                return g(z);
            };
            double deriv = (8 * (shifted(fd_step) - shifted(-fd_step)) -
                            (shifted(2 * fd_step) - shifted(-2 * fd_step))) / (12 * fd_step);
            const double gy = g(y);
            for (std::size_t j = 0; j < y.size(); ++j) {
                if (j == i) continue;
                std::vector<double> z = y;
                std::swap(z[i], z[j]);
                deriv += (gy - g(z)) / (y[i] - y[j]);
            }
            return deriv;
        };
    };

    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        Fn g = bessel;
        for (int s = 0; s < k; ++s) g = dunkl(g, i);
        total += g(x);
    }
    double pk = 0;
    for (double l : lambda) pk += std::pow(l, k);
    const double b = bessel(x);
    res.operator_value = total;
    res.eigen_value = pk * b;
    res.residual = std::abs(total - pk * b) / std::abs(b);
    return res;
}

// ---------------------------------------------------------------------------
// Edge-scaled moment

double log_abs(const Rational& q) {
    require(q != 0, "log of zero");
    long en = 0, ed = 0;
    double mn = mpz_get_d_2exp(&en, q.get_num_mpz_t());
    double md = mpz_get_d_2exp(&ed, q.get_den_mpz_t());
    return std::log(std::abs(mn)) - std::log(md) + static_cast<double>(en - ed) * std::log(2.0);
}

ScaledEdgeMoment scaled_edge_moment(int N, const std::vector<double>& kappa,
                                    const std::vector<double>& taus, const Rational& beta,
                                    const EngineLimits& lim) {
    require(N >= 1, "N must be >= 1");
    require(!kappa.empty() && kappa.size() == taus.size(), "kappa and taus must be nonempty and equal length");
    const std::size_t m = kappa.size();
    const double n23 = std::pow(static_cast<double>(N), 2.0 / 3.0);
    ScaledEdgeMoment out;
    for (std::size_t l = 0; l < m; ++l) {
        if (l > 0) require(taus[l] >= taus[l - 1], "taus must be nondecreasing");
        const int k = static_cast<int>(std::lround(kappa[l] * n23));
        const int row = static_cast<int>(std::lround(static_cast<double>(N) - taus[l] * n23));
        require(k >= 1, "N too small: round(kappa N^{2/3}) < 1");
        require(row >= 1 && row <= N, "rescaled row N_l outside 1..N");
        out.powers.push_back(k);
        out.rows.push_back(row);
    }
    int total = 0;
    for (int k : out.powers) total += k + 1;
    if (total > lim.max_degree) throw ResourceError("total degree exceeds the engine cap");

    const Rational tau = Rational(2 * N) / beta;
    for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
        std::vector<int> ks = out.powers;
        double log_scale = 0;
        for (std::size_t l = 0; l < m; ++l) {
            if (mask & (std::size_t{1} << l)) ++ks[l];
            log_scale += ks[l] * std::log(2.0 * std::sqrt(static_cast<double>(out.rows[l]) * N));
        }
        Rational v = corners_moment(ks, out.rows, N, beta, tau, lim);
        double scaled = v == 0 ? 0.0 : (v > 0 ? 1.0 : -1.0) * std::exp(log_abs(v) - log_scale);
        out.raw_terms.push_back(v);
        out.scaled_terms.push_back(scaled);
        out.value += scaled;
    }
    out.value *= std::pow(0.5, static_cast<double>(m));
    return out;
}

}  // namespace airy
