#include "airy/ensembles.hpp"

#include "airy/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace airy {

namespace {

struct Welford {
    double mean = 0, m2 = 0;
    long n = 0;
    void add(double v) {
        ++n;
        const double d = v - mean;
        mean += d / n;
        m2 += d * (v - mean);
    }
    double stderr_() const { return n > 1 ? std::sqrt(m2 / (n - 1) / n) : 0.0; }
    FunctionalEstimate estimate() const {
        FunctionalEstimate e;
        e.mean = mean;
        e.stderr_ = stderr_();
        e.n_samples = n;
        return e;
    }
};

double gamma_draw(double shape, Rng& rng) { return std::gamma_distribution<double>(shape, 1.0)(rng); }

double beta_draw(double a, double b, Rng& rng) {
    const double x = gamma_draw(a, rng), y = gamma_draw(b, rng);
    return x / (x + y);
}

bool nonincreasing(const std::vector<double>& v) {
    return std::is_sorted(v.begin(), v.end(), std::greater<double>());
}

bool strictly_decreasing(const std::vector<double>& v) {
    return std::adjacent_find(v.begin(), v.end(), std::less_equal<double>()) == v.end();
}

void check_beta(double beta) { require(std::isfinite(beta) && beta > 0, "beta must be positive"); }

double int_pow(double v, int k) {
    double r = 1;
    for (int i = 0; i < k; ++i) r *= v;
    return r;
}

// Root in gap (lambda[a+1], lambda[a]) of sum_c w_c / (z - lambda_c), bisected
// in the gap coordinate t so that tiny distances to either end stay resolved.
double gap_root(const std::vector<double>& lambda, const std::vector<double>& w, std::size_t a) {
    const double lo = lambda[a + 1], hi = lambda[a], gap = hi - lo;
    if (gap <= 0) return hi;
    auto f = [&](double t) {
        const double z = lo + t * gap;
        double s = w[a + 1] / (t * gap) - w[a] / ((1 - t) * gap);
        for (std::size_t c = 0; c < lambda.size(); ++c)
            if (c != a && c != a + 1) s += w[c] / (z - lambda[c]);
        return s;
    };
    double tl = 0, th = 1;
    for (int it = 0; it < 2200; ++it) {
        const double mid = 0.5 * (tl + th);
        if (mid <= tl || mid >= th) break;
        (f(mid) > 0 ? tl : th) = mid;
    }
    const double t = 0.5 * (tl + th);
    if (!(t > 0 && t < 1) || !std::isfinite(f(t)))
        throw ResourceError("corners level-down: no sign change located in gap " + std::to_string(a));
    return std::clamp(lo + t * gap, lo, hi);
}

std::vector<double> level_down_dirichlet(const std::vector<double>& lambda, double beta, Rng& rng) {
    const std::size_t n = lambda.size();
    std::vector<double> w(n);
    double total = 0;
    for (auto& x : w) total += (x = gamma_draw(beta / 2, rng));
    for (auto& x : w) x /= total;
    for (std::size_t c = 0; c < n; ++c)
        if (!(w[c] > 0)) throw ResourceError("corners level-down: Dirichlet weight underflow");
    std::vector<double> y(n - 1);
    for (std::size_t a = 0; a + 1 < n; ++a) y[a] = gap_root(lambda, w, a);
    return y;
}

std::vector<double> level_down_mcmc(const std::vector<double>& lambda, double beta, Rng& rng,
                                    int sweeps) {
    const std::size_t n = lambda.size();
    const double e = beta / 2 - 1;
    std::vector<double> y(n - 1);
    for (std::size_t a = 0; a + 1 < n; ++a) y[a] = 0.5 * (lambda[a] + lambda[a + 1]);
    // log of target over the Beta(beta/2, beta/2) gap proposal.
    auto log_ratio = [&](std::size_t a, double v) {
        double s = 0;
        for (std::size_t c = 0; c + 1 < n; ++c)
            if (c != a) s += std::log(std::abs(v - y[c]));
        for (std::size_t b = 0; b < n; ++b)
            if (b != a && b != a + 1) s += e * std::log(std::abs(v - lambda[b]));
        return s;
    };
    std::uniform_real_distribution<double> unif(0, 1);
    for (int sw = 0; sw < sweeps; ++sw)
        for (std::size_t a = 0; a + 1 < n; ++a) {
            const double gap = lambda[a] - lambda[a + 1];
            if (gap <= 0) {
                y[a] = lambda[a];
                continue;
            }
            const double prop = lambda[a + 1] + gap * beta_draw(beta / 2, beta / 2, rng);
            if (std::log(unif(rng)) < log_ratio(a, prop) - log_ratio(a, y[a])) y[a] = prop;
        }
    return y;
}

}  // namespace

Spectrum sample_gbe(int N, double beta, double tau, Rng& rng) {
    require(N >= 1, "N must be at least 1");
    check_beta(beta);
    require(std::isfinite(tau) && tau > 0, "variance tau must be positive");
    std::normal_distribution<double> gauss(0, std::sqrt(tau));
    Eigen::VectorXd diag(N), sub(std::max(N - 1, 0));
    for (int i = 0; i < N; ++i) diag[i] = gauss(rng);
    for (int i = 1; i < N; ++i)
        sub[i - 1] = std::sqrt(tau / 2) *
                     std::sqrt(2 * gamma_draw(beta * (N - i) / 2, rng));  // chi^2_k = 2 Gamma(k/2)
    Spectrum s;
    s.beta = beta;
    s.variance = tau;
    if (N == 1) {
        s.values = {diag[0]};
        return s;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw ResourceError("tridiagonal eigensolver did not converge");
    const auto& ev = solver.eigenvalues();
    s.values.assign(ev.data(), ev.data() + N);
    std::reverse(s.values.begin(), s.values.end());
    if (!strictly_decreasing(s.values)) throw ResourceError("tied eigenvalues in GbE sample");
    return s;
}

Spectrum sample_gbe(int N, double beta, double tau, std::uint64_t seed) {
    Rng rng(seed);
    auto s = sample_gbe(N, beta, tau, rng);
    s.seed = seed;
    return s;
}

std::vector<double> corners_level_down(const std::vector<double>& lambda, double beta, Rng& rng,
                                       LevelDown method, int mcmc_sweeps) {
    check_beta(beta);
    require(!lambda.empty(), "level-down needs a nonempty row");
    require(nonincreasing(lambda), "level-down input must be nonincreasing");
    for (double v : lambda) require(std::isfinite(v), "level-down input must be finite");
    if (lambda.size() == 1) return {};
    auto y = method == LevelDown::Dirichlet ? level_down_dirichlet(lambda, beta, rng)
                                            : level_down_mcmc(lambda, beta, rng, mcmc_sweeps);
    for (std::size_t a = 0; a < y.size(); ++a)
        if (!(lambda[a] >= y[a] && y[a] >= lambda[a + 1]))
            throw ResourceError("level-down output does not interlace");
    return y;
}

std::vector<double> corners_level_down(const std::vector<double>& lambda, double beta,
                                       std::uint64_t seed) {
    Rng rng(seed);
    return corners_level_down(lambda, beta, rng);
}

CornersArray sample_gbe_corners(int N, double beta, double tau, Rng& rng, int lowest_row,
                                LevelDown method) {
    require(lowest_row >= 1 && lowest_row <= N, "lowest_row must lie in [1, N]");
    CornersArray c;
    c.beta = beta;
    c.variance = tau;
    c.rows.resize(N);
    c.rows[N - 1] = sample_gbe(N, beta, tau, rng).values;
    for (int n = N - 1; n >= lowest_row; --n) c.rows[n - 1] = corners_level_down(c.rows[n], beta, rng, method);
    return c;
}

CornersArray sample_gbe_corners(int N, double beta, double tau, std::uint64_t seed, int lowest_row) {
    Rng rng(seed);
    auto c = sample_gbe_corners(N, beta, tau, rng, lowest_row);
    c.seed = seed;
    return c;
}

DBMPath simulate_dbm(int N, double beta, double T, double dt, Rng& rng,
                     std::vector<double> output_times) {
    require(N >= 1, "N must be at least 1");
    require(std::isfinite(beta) && beta >= 1,
            "DBM is supported for beta >= 1 only: below 1 the particles collide");
    require(std::isfinite(T) && T > 0, "horizon T must be positive");
    require(std::isfinite(dt) && dt > 0, "dt must be positive");
    if (output_times.empty()) output_times = {T};
    require(std::is_sorted(output_times.begin(), output_times.end()), "output times must be nondecreasing");
    const double t0 = std::min(dt, output_times.front());
    require(output_times.front() > 0 && output_times.back() <= T * (1 + 1e-12),
            "output times must lie in (0, T]");

    DBMPath p;
    p.beta = beta;
    p.dt = dt;
    std::vector<double> y = sample_gbe(N, beta, t0, rng).values, next(N), drift(N);
    double t = t0, excess = 0;
    const double h_min = dt * 1e-40;  // gaps down to ~1e-20 sqrt(dt) still resolve
    std::normal_distribution<double> gauss(0, 1);

    auto compute_drift = [&] {
        double norm2 = 0;
        for (int i = 0; i < N; ++i) {
            double s = 0;
            for (int j = 0; j < N; ++j)
                if (j != i) s += 1 / (y[i] - y[j]);
            drift[i] = beta / 2 * s;
            norm2 += drift[i] * drift[i];
        }
        return norm2;
    };
    auto min_gap = [&] {
        double g = std::numeric_limits<double>::infinity();
        for (int i = 0; i + 1 < N; ++i) g = std::min(g, y[i] - y[i + 1]);
        return g;
    };

    for (double target : output_times) {
        while (target - t > 1e-14 * target) {
            const double full = std::min(dt, target - t);
            double h = full;
            const double g = min_gap();
            while (g * g < h && h > h_min) h /= 4;
            const double d2 = compute_drift();
            for (;;) {
                const double sh = std::sqrt(h);
                for (int i = 0; i < N; ++i) next[i] = y[i] + drift[i] * h + sh * gauss(rng);
                if (strictly_decreasing(next)) break;
                h /= 4;
                if (h < h_min) throw ResourceError("DBM step size underflow: gap collapse at t = " + std::to_string(t));
            }
            if (h < full) ++p.substeps;
            ++p.steps;
            excess += h * h * d2;
            y.swap(next);
            t = (h == target - t) ? target : t + h;
        }
        p.times.push_back(target);
        p.states.push_back(y);
        p.em_excess.push_back(excess);
    }
    return p;
}

DBMPath simulate_dbm(int N, double beta, double T, double dt, std::uint64_t seed,
                     std::vector<double> output_times) {
    Rng rng(seed);
    auto p = simulate_dbm(N, beta, T, dt, rng, std::move(output_times));
    p.seed = seed;
    return p;
}

namespace {

void check_query_shape(const MomentQuery& q) {
    require(!q.powers.empty(), "moment query needs at least one power");
    for (int k : q.powers) require(k >= 0, "powers must be nonnegative");
    if (q.mode == EnsembleMode::Corners) {
        require(q.rows.size() == q.powers.size(), "corners query needs one row per power");
        require(q.times.empty(), "corners query must not set times");
    } else {
        require(q.times.size() == q.powers.size(), "DBM query needs one time per power");
        require(q.rows.empty(), "DBM query must not set rows");
    }
}

double corners_product(const CornersArray& s, const MomentQuery& q) {
    double prod = 1;
    for (std::size_t l = 0; l < q.powers.size(); ++l) {
        const int r = q.rows[l];
        require(r >= 1 && r <= s.N() && static_cast<int>(s.rows[r - 1].size()) == r,
                "corners sample lacks row " + std::to_string(r));
        double sum = 0;
        for (double v : s.rows[r - 1]) sum += int_pow(v, q.powers[l]);
        prod *= sum;
    }
    return prod;
}

std::size_t time_index(const DBMPath& p, double t) {
    for (std::size_t j = 0; j < p.times.size(); ++j)
        if (std::abs(p.times[j] - t) <= 1e-12 * std::max(1.0, t)) return j;
    throw ArgumentError("DBM path has no output at time " + std::to_string(t));
}

double dbm_product(const DBMPath& p, const MomentQuery& q) {
    double prod = 1;
    for (std::size_t l = 0; l < q.powers.size(); ++l) {
        double sum = 0;
        for (double v : p.states[time_index(p, q.times[l])]) sum += int_pow(v, q.powers[l]);
        prod *= sum;
    }
    return prod;
}

}  // namespace

FunctionalEstimate mc_joint_moment(const std::vector<CornersArray>& samples, const MomentQuery& q) {
    require(q.mode == EnsembleMode::Corners, "corners samples need a corners-mode query");
    check_query_shape(q);
    Welford w;
    for (const auto& s : samples) w.add(corners_product(s, q));
    return w.estimate();
}

FunctionalEstimate mc_joint_moment(const std::vector<DBMPath>& samples, const MomentQuery& q) {
    require(q.mode == EnsembleMode::Dbm, "DBM samples need a DBM-mode query");
    check_query_shape(q);
    Welford w;
    for (const auto& s : samples) w.add(dbm_product(s, q));
    return w.estimate();
}

FunctionalEstimate corners_moment_mc(const MomentQuery& q, int N, double beta, double tau, long n,
                                     std::uint64_t seed) {
    require(q.mode == EnsembleMode::Corners, "corners_moment_mc needs a corners-mode query");
    check_query_shape(q);
    require(n >= 2, "need at least two samples");
    for (int r : q.rows) require(r >= 1 && r <= N, "rows must lie in [1, N]");
    const int lowest = *std::min_element(q.rows.begin(), q.rows.end());
    Rng rng(seed);
    Welford w;
    for (long s = 0; s < n; ++s) w.add(corners_product(sample_gbe_corners(N, beta, tau, rng, lowest), q));
    return w.estimate();
}

DbmMomentEstimate dbm_moment_mc(const MomentQuery& q, int N, double beta, double dt, long n,
                                std::uint64_t seed) {
    require(q.mode == EnsembleMode::Dbm, "dbm_moment_mc needs a DBM-mode query");
    check_query_shape(q);
    require(n >= 2, "need at least two samples");
    std::vector<double> times = q.times;
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    Rng rng(seed);
    Welford w, ex;
    for (long s = 0; s < n; ++s) {
        const auto p = simulate_dbm(N, beta, times.back(), dt, rng, times);
        w.add(dbm_product(p, q));
        ex.add(p.em_excess.back());
    }
    return {w.estimate(), ex.mean, ex.stderr_()};
}

int corners_edge_row(int N, double tau) {
    return static_cast<int>(std::lround(N - tau * std::pow(N, 2.0 / 3)));
}

double dbm_edge_time(int N, double beta, double tau) {
    return 2.0 * N / beta + 2 * tau * std::pow(N, 2.0 / 3) / beta;
}

namespace {

void fill_edge(EdgeObservable& o, const std::vector<double>& r, double kappa, int n_top) {
    const double n23 = std::pow(o.N, 2.0 / 3);
    const int k = static_cast<int>(std::lround(kappa * n23));
    require(n_top >= 0 && n_top <= static_cast<int>(r.size()), "n_top exceeds the row length");
    std::vector<double> top(n_top);
    for (int i = 0; i < n_top; ++i) top[i] = 2 * n23 * (r[i] - 1);
    o.top.push_back(std::move(top));
    double a = 0, b = 0;
    for (double v : r) {
        const double pk = int_pow(v, k);
        a += pk;
        b += pk * v;
    }
    o.laplace.push_back(0.5 * (a + b));
}

}  // namespace

EdgeObservable edge_rescale(const CornersArray& s, const std::vector<double>& taus, double kappa,
                            int n_top) {
    require(kappa > 0, "kappa must be positive");
    EdgeObservable o;
    o.mode = EnsembleMode::Corners;
    o.N = s.N();
    o.taus = taus;
    for (double tau : taus) {
        const int row = corners_edge_row(o.N, tau);
        require(row >= 1 && row <= o.N && static_cast<int>(s.rows[row - 1].size()) == row,
                "edge row " + std::to_string(row) + " is not present in the corners sample");
        const double scale = std::sqrt(s.variance) * std::sqrt(2 * s.beta * row);
        std::vector<double> r;
        for (double v : s.rows[row - 1]) r.push_back(v / scale);
        fill_edge(o, r, kappa, n_top);
    }
    return o;
}

EdgeObservable edge_rescale(const DBMPath& p, const std::vector<double>& taus, double kappa,
                            int n_top) {
    require(kappa > 0, "kappa must be positive");
    EdgeObservable o;
    o.mode = EnsembleMode::Dbm;
    o.N = p.N();
    o.taus = taus;
    for (double tau : taus) {
        const auto& state = p.states[time_index(p, dbm_edge_time(o.N, p.beta, tau))];
        const double scale = 2 * std::sqrt((o.N + tau * std::pow(o.N, 2.0 / 3)) * o.N);
        std::vector<double> r;
        for (double v : state) r.push_back(v / scale);
        fill_edge(o, r, kappa, n_top);
    }
    return o;
}

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
    require(samples.size() >= 35, "KS test needs at least 35 samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    const double lam = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
    double q = 0;
    if (lam < 0.2) {
        q = 1;
    } else {
        for (int k = 1; k <= 100; ++k) {
            const double term = std::exp(-2.0 * k * k * lam * lam);
            q += (k % 2 ? 2 : -2) * term;
            if (term < 1e-17) break;
        }
    }
    return {d, std::clamp(q, 0.0, 1.0)};
}

}  // namespace airy
