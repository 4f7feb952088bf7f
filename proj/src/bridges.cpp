#include "airy/bridges.hpp"

#include "airy/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace airy {

namespace {

void check_x(double x) { require(std::isfinite(x) && x > 0, "duration x must be positive"); }

// Standard Brownian bridge a -> b on n uniform intervals of total time x.
std::vector<double> gaussian_bridge(double a, double b, double x, int n, Rng& rng) {
    std::normal_distribution<double> nd;
    const double s = std::sqrt(x / n);
    std::vector<double> w(n + 1, 0.0);
    for (int k = 1; k <= n; ++k) w[k] = w[k - 1] + s * nd(rng);
    for (int k = 0; k <= n; ++k) {
        const double u = static_cast<double>(k) / n;
        w[k] = w[k] - u * w[n] + a + u * (b - a);
    }
    w[0] = a;
    w[n] = b;
    return w;
}

}  // namespace

double F(double x, double h, double g) {
    check_x(x);
    require(h >= 0 && g >= 0, "heights must be nonnegative");
    // e^{-(g-h)^2/2x} (1 - e^{-2gh/x}), written to keep precision for small g h.
    return std::exp(-(g - h) * (g - h) / (2 * x)) * -std::expm1(-2 * g * h / x) /
           std::sqrt(2 * M_PI * x);
}

double F0(double x, double h) {
    check_x(x);
    require(h >= 0, "height must be nonnegative");
    return 2 * h / std::sqrt(2 * M_PI * x * x * x) * std::exp(-h * h / (2 * x));
}

double F00(double x) {
    check_x(x);
    return 2 / std::sqrt(2 * M_PI * x * x * x);
}

int mesh_intervals(const BridgeSpec& spec) {
    check_x(spec.x);
    require(spec.mesh >= 16, "mesh must be at least 16 points per unit time");
    return std::max(16, static_cast<int>(std::ceil(spec.mesh * spec.x)));
}

namespace {

std::vector<double> positive_bridge_sequential(const BridgeSpec& spec, Rng& rng, long* rejected) {
    require(spec.h > 0 && spec.g > 0, "positive bridge needs h, g > 0; use the Bessel-3 kind");
    const int n = mesh_intervals(spec);
    const double dt = spec.x / n;
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    std::vector<double> y(n + 1);
    y[0] = spec.h;
    y[n] = spec.g;
    long attempts = 0, accepted = 0;
    for (int k = 1; k < n; ++k) {
        const double a = y[k - 1];
        const double rest = spec.x - k * dt;
        const double mean = a + (spec.g - a) * dt / (dt + rest);
        const double sd = std::sqrt(dt * rest / (dt + rest));
        for (;;) {
            ++attempts;
            if (attempts > 10000 && accepted < attempts / 1000)
                throw ArgumentError(
                    "positive-bridge acceptance below 1e-3; endpoints too close to zero, use the "
                    "bessel3 or excursion kind");
            const double v = mean + sd * nd(rng);
            if (v <= 0) continue;
            // Killed-transition ratios on both sides of the new point.
            const double acc = -std::expm1(-2 * a * v / dt) * -std::expm1(-2 * v * spec.g / rest);
            if (ud(rng) < acc) {
                y[k] = v;
                ++accepted;
                break;
            }
        }
    }
    if (rejected) *rejected += attempts - accepted;
    return y;
}

std::vector<double> bessel3_bridge(double g, double x, int n, Rng& rng) {
    auto b1 = gaussian_bridge(0, g, x, n, rng);
    auto b2 = gaussian_bridge(0, 0, x, n, rng);
    auto b3 = gaussian_bridge(0, 0, x, n, rng);
    std::vector<double> out(n + 1);
    for (int k = 0; k <= n; ++k) out[k] = std::sqrt(b1[k] * b1[k] + b2[k] * b2[k] + b3[k] * b3[k]);
    out[0] = 0;
    out[n] = g;
    return out;
}

std::vector<double> vervaat_excursion(double x, int n, Rng& rng) {
    auto b = gaussian_bridge(0, 0, x, n, rng);
    const int m = static_cast<int>(std::min_element(b.begin(), b.begin() + n) - b.begin());
    std::vector<double> e(n + 1);
    for (int k = 0; k <= n; ++k) e[k] = b[(m + k) % n] - b[m];
    e[0] = 0;
    e[n] = 0;
    return e;
}

}  // namespace

std::vector<double> sample_path(const BridgeSpec& spec, Rng& rng) {
    const int n = mesh_intervals(spec);
    switch (spec.kind) {
        case BridgeKind::BridgePositive: return positive_bridge_sequential(spec, rng, nullptr);
        case BridgeKind::Bessel3Bridge:
            require(spec.h == 0 && spec.g > 0, "Bessel-3 bridge needs h = 0 and g > 0");
            return bessel3_bridge(spec.g, spec.x, n, rng);
        case BridgeKind::Excursion:
            require(spec.h == 0 && spec.g == 0, "excursion needs h = g = 0");
            return vervaat_excursion(spec.x, n, rng);
    }
    throw ArgumentError("unknown bridge kind");
}

std::vector<double> sample_path(const BridgeSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    return sample_path(spec, rng);
}

std::vector<double> sample_positive_bridge_rejection(const BridgeSpec& spec, Rng& rng,
                                                     long* rejected) {
    require(spec.h > 0 && spec.g > 0, "rejection sampler needs h, g > 0");
    const int n = mesh_intervals(spec);
    const double dt = spec.x / n;
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    for (long tries = 0;; ++tries) {
        if (tries > 1000000) throw ArgumentError("rejection sampler made no progress");
        auto b = gaussian_bridge(spec.h, spec.g, spec.x, n, rng);
        bool ok = true;
        for (int k = 1; k <= n && ok; ++k) {
            if (b[k] <= 0) {
                ok = false;
                break;
            }
            // Bridge between two positive values stays positive w.p. 1 - e^{-2ab/dt}.
            ok = ud(rng) < -std::expm1(-2 * b[k - 1] * b[k] / dt);
        }
        if (ok) return b;
        if (rejected) ++*rejected;
    }
}

std::vector<double> sample_excursion_bessel3(const BridgeSpec& spec, Rng& rng) {
    const int n = mesh_intervals(spec);
    auto b1 = gaussian_bridge(0, 0, spec.x, n, rng);
    auto b2 = gaussian_bridge(0, 0, spec.x, n, rng);
    auto b3 = gaussian_bridge(0, 0, spec.x, n, rng);
    std::vector<double> out(n + 1);
    for (int k = 0; k <= n; ++k) out[k] = std::sqrt(b1[k] * b1[k] + b2[k] * b2[k] + b3[k] * b3[k]);
    return out;
}

std::vector<double> sample_killed_bridge_3d(const BridgeSpec& spec, Rng& rng) {
    require(spec.h >= 0 && spec.g >= 0, "heights must be nonnegative");
    const int n = mesh_intervals(spec);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    // Cosine of the angle between start and end directions.
    const double kappa = spec.h * spec.g / spec.x;
    const double u = ud(rng);
    double w;
    if (kappa == 0)
        w = 2 * u - 1;
    else if (kappa < 1)
        w = -1 + std::log1p(u * std::expm1(2 * kappa)) / kappa;
    else
        w = 1 + std::log(u + (1 - u) * std::exp(-2 * kappa)) / kappa;
    w = std::clamp(w, -1.0, 1.0);
    const double phi = 2 * M_PI * ud(rng);
    const double s = std::sqrt(1 - w * w);
    auto b1 = gaussian_bridge(spec.h, spec.g * w, spec.x, n, rng);
    auto b2 = gaussian_bridge(0, spec.g * s * std::cos(phi), spec.x, n, rng);
    auto b3 = gaussian_bridge(0, spec.g * s * std::sin(phi), spec.x, n, rng);
    std::vector<double> out(n + 1);
    for (int k = 0; k <= n; ++k) out[k] = std::sqrt(b1[k] * b1[k] + b2[k] * b2[k] + b3[k] * b3[k]);
    out[0] = spec.h;
    out[n] = spec.g;
    return out;
}

double trapezoid_area(const std::vector<double>& path, double x) {
    require(path.size() >= 2, "path needs at least two points");
    const std::size_t n = path.size() - 1;
    double s = 0.5 * (path.front() + path.back());
    for (std::size_t k = 1; k < n; ++k) s += path[k];
    return s * x / n;
}

FunctionalEstimate area_exponential_mc(const BridgeSpec& spec, double beta, long budget,
                                       std::uint64_t seed) {
    require(beta > 0, "beta must be positive");
    require(budget >= 1, "budget must be positive");
    Rng rng(seed);
    FunctionalEstimate est;
    est.mesh = spec.mesh;
    double mean = 0, m2 = 0;
    for (long s = 1; s <= budget; ++s) {
        double v = 1;
        if (std::isfinite(beta)) {
            std::vector<double> path;
            if (spec.kind == BridgeKind::BridgePositive)
                path = positive_bridge_sequential(spec, rng, &est.n_rejected);
            else
                path = sample_path(spec, rng);
            v = std::exp(trapezoid_area(path, spec.x) / beta);
        }
        const double d = v - mean;
        mean += d / s;
        m2 += d * (v - mean);
    }
    est.mean = mean;
    est.n_samples = budget;
    est.stderr_ = budget > 1 ? std::sqrt(m2 / (budget - 1) / budget) : 0.0;
    return est;
}

namespace {

FunctionalEstimate scaled(FunctionalEstimate e, double factor) {
    e.mean *= factor;
    e.stderr_ *= std::abs(factor);
    e.refined_mean *= factor;
    e.refined_stderr *= std::abs(factor);
    return e;
}

FunctionalEstimate with_refinement(const BridgeSpec& spec, double beta, long budget,
                                   std::uint64_t seed, bool refine) {
    auto est = area_exponential_mc(spec, beta, budget, seed);
    if (refine) {
        BridgeSpec fine = spec;
        fine.mesh *= 2;
        auto r = area_exponential_mc(fine, beta, budget, seed ^ 0x9e3779b97f4a7c15ULL);
        est.refined = true;
        est.refined_mean = r.mean;
        est.refined_stderr = r.stderr_;
    }
    return est;
}

}  // namespace

FunctionalEstimate I_mc(double x, double h, double g, double beta, long budget,
                        std::uint64_t seed, int mesh, bool refine) {
    require(budget >= 1000, "budget must be at least 1000");
    const double f = F(x, h, g);
    if (h == 0 || g == 0) {
        FunctionalEstimate zero;
        zero.n_samples = budget;
        zero.mesh = mesh;
        return zero;  // F vanishes when either endpoint is zero
    }
    BridgeSpec spec{x, h, g, BridgeKind::BridgePositive, mesh};
    return scaled(with_refinement(spec, beta, budget, seed, refine), f);
}

FunctionalEstimate I0_mc(double x, double h, double beta, long budget, std::uint64_t seed,
                         int mesh, bool refine) {
    require(budget >= 1000, "budget must be at least 1000");
    const double f = F0(x, h);
    if (h == 0) {
        FunctionalEstimate zero;
        zero.n_samples = budget;
        zero.mesh = mesh;
        return zero;
    }
    BridgeSpec spec{x, 0, h, BridgeKind::Bessel3Bridge, mesh};
    return scaled(with_refinement(spec, beta, budget, seed, refine), f);
}

FunctionalEstimate I00_mc(double x, double beta, long budget, std::uint64_t seed, int mesh,
                          bool refine) {
    require(budget >= 1000, "budget must be at least 1000");
    BridgeSpec spec{x, 0, 0, BridgeKind::Excursion, mesh};
    return scaled(with_refinement(spec, beta, budget, seed, refine), F00(x));
}

}  // namespace airy
