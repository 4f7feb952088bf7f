#pragma once

// Closed-form F kernels and Monte Carlo estimates of the kernels
//   I(x;h,g)  = F(x;h,g)  E exp(beta^{-1} int B),   B a bridge h -> g conditioned B >= 0,
//   I0(x;h)   = F0(x;h)   E exp(beta^{-1} int B3),  B3 a Bessel-3 bridge 0 -> h,
//   I00(x)    = F00(x)    E exp(beta^{-1} int Be),  Be a Brownian excursion.
// The area functional is invariant under time reversal, so bridges run from
// the first height argument to the second.

#include <cstdint>
#include <random>
#include <vector>

namespace airy {

double F(double x, double h, double g);
double F0(double x, double h);
double F00(double x);

enum class BridgeKind { BridgePositive, Bessel3Bridge, Excursion };

struct BridgeSpec {
    double x = 1;
    double h = 0;
    double g = 0;
    BridgeKind kind = BridgeKind::Excursion;
    int mesh = 256;  // points per unit time
};

// Number of mesh intervals used for a spec: max(16, ceil(mesh * x)).
int mesh_intervals(const BridgeSpec& spec);

using Rng = std::mt19937_64;

// Values at the n + 1 mesh points, endpoints exact.
//  BridgePositive: h, g > 0; mesh values drawn one at a time from the exact
//    transition of Brownian motion killed at zero, by per-point rejection from
//    the Gaussian bridge proposal. Throws ArgumentError when the acceptance
//    rate collapses below 1e-3 (use the Bessel-3 kind for a zero endpoint).
//  Bessel3Bridge: h = 0, g > 0; norm of a 3-d Brownian bridge 0 -> (g,0,0).
//  Excursion: h = g = 0; Vervaat rotation of a standard bridge at its minimum.
std::vector<double> sample_path(const BridgeSpec& spec, Rng& rng);
std::vector<double> sample_path(const BridgeSpec& spec, std::uint64_t seed);

// Alternative samplers used as independent routes in tests.
// Whole-path rejection of a Gaussian bridge with the exact crossing
// probability between mesh points.
std::vector<double> sample_positive_bridge_rejection(const BridgeSpec& spec, Rng& rng,
                                                     long* rejected = nullptr);
// Norm of a 3-d Brownian bridge from the origin back to the origin.
std::vector<double> sample_excursion_bessel3(const BridgeSpec& spec, Rng& rng);
// Brownian motion on [0, x] from h to g conditioned to stay positive, for any
// h, g >= 0 (kind is ignored). Realised as the norm of a 3-d Brownian bridge
// from (h,0,0) to a point of norm g whose direction is von Mises-Fisher with
// concentration h g / x; exact in law at mesh points and rejection-free.
std::vector<double> sample_killed_bridge_3d(const BridgeSpec& spec, Rng& rng);

// Trapezoid rule over a uniform mesh of total duration x.
double trapezoid_area(const std::vector<double>& path, double x);

struct FunctionalEstimate {
    double mean = 0;
    double stderr_ = 0;
    long n_samples = 0;
    long n_rejected = 0;
    int mesh = 0;
    // Same estimator at twice the mesh on an independent stream (when requested).
    double refined_mean = 0;
    double refined_stderr = 0;
    bool refined = false;
};

// beta = +infinity gives the F factor exactly (area term 1).
FunctionalEstimate I_mc(double x, double h, double g, double beta, long budget,
                        std::uint64_t seed, int mesh = 256, bool refine = false);
FunctionalEstimate I0_mc(double x, double h, double beta, long budget, std::uint64_t seed,
                         int mesh = 256, bool refine = false);
FunctionalEstimate I00_mc(double x, double beta, long budget, std::uint64_t seed,
                          int mesh = 256, bool refine = false);

// E exp(beta^{-1} int B) alone, for a given spec.
FunctionalEstimate area_exponential_mc(const BridgeSpec& spec, double beta, long budget,
                                       std::uint64_t seed);

}  // namespace airy
