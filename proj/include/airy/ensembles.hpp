#pragma once

// Samplers for the Gaussian beta ensemble, beta-corners arrays and Dyson
// Brownian motion, Monte Carlo moment estimators, and edge-rescaled
// observables. Variance convention: GbE(tau) has density proportional to
// prod |l_i - l_j|^beta exp(-sum l^2 / (2 tau)); DBM from zero has law GbE(t)
// at time t.

#include "airy/bridges.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace airy {

// Strictly decreasing eigenvalues.
struct Spectrum {
    std::vector<double> values;
    double beta = 2;
    double variance = 1;
    std::uint64_t seed = 0;
    int N() const { return static_cast<int>(values.size()); }
};

// rows[n-1] is row n (length n, decreasing); rows below lowest_row are empty.
// Interlacing rows[n][i] >= rows[n-1][i] >= rows[n][i+1].
struct CornersArray {
    std::vector<std::vector<double>> rows;
    double beta = 2;
    double variance = 1;
    std::uint64_t seed = 0;
    int N() const { return static_cast<int>(rows.size()); }
};

struct DBMPath {
    std::vector<double> times;               // requested output times, increasing, positive
    std::vector<std::vector<double>> states; // decreasing at each output time
    // Per output time: accumulated sum over steps of h^2 |drift|^2. This is the
    // exact conditional excess of Euler-Maruyama over the SDE for E sum Y^2.
    std::vector<double> em_excess;
    double beta = 2;
    double dt = 0;
    long steps = 0;
    long substeps = 0;  // steps taken below dt because of a small gap or a retry
    std::uint64_t seed = 0;
    int N() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }
};

// Dumitriu-Edelman tridiagonal model: diagonal N(0, tau), off-diagonal i
// distributed as sqrt(tau/2) chi_{beta (N - i)}, i = 1..N-1.
Spectrum sample_gbe(int N, double beta, double tau, Rng& rng);
Spectrum sample_gbe(int N, double beta, double tau, std::uint64_t seed);

enum class LevelDown { Dirichlet, Mcmc };

// One row down. Dirichlet: roots of sum_b w_b / (z - lambda_b) with
// w ~ Dirichlet(beta/2, ..., beta/2), one per gap by bisection. Mcmc:
// Metropolis within gaps targeting prod_{i<j} |y_i - y_j| prod |y_a - lambda_b|^{beta/2 - 1},
// which is the conditional law of the row below once the rest of the array
// is integrated out. Input must be nonincreasing; a zero gap pins its root.
std::vector<double> corners_level_down(const std::vector<double>& lambda, double beta, Rng& rng,
                                       LevelDown method = LevelDown::Dirichlet,
                                       int mcmc_sweeps = 200);
std::vector<double> corners_level_down(const std::vector<double>& lambda, double beta,
                                       std::uint64_t seed);

// Top row from sample_gbe, then level-downs to lowest_row.
CornersArray sample_gbe_corners(int N, double beta, double tau, Rng& rng, int lowest_row = 1,
                                LevelDown method = LevelDown::Dirichlet);
CornersArray sample_gbe_corners(int N, double beta, double tau, std::uint64_t seed,
                                int lowest_row = 1);

// Euler-Maruyama for dY_i = (beta/2) sum_{j != i} dt / (Y_i - Y_j) + dW_i from
// Y(0) = 0. The first dt is drawn from its exact GbE(dt) law. Steps shrink
// by 4 while the smallest gap is below sqrt(step), and an update that breaks
// the ordering is redrawn at a quarter of the step. output_times defaults to {T}.
DBMPath simulate_dbm(int N, double beta, double T, double dt, Rng& rng,
                     std::vector<double> output_times = {});
DBMPath simulate_dbm(int N, double beta, double T, double dt, std::uint64_t seed,
                     std::vector<double> output_times = {});

enum class EnsembleMode { Corners, Dbm };

// Corners mode reads row rows[l]; DBM mode reads the state at times[l].
struct MomentQuery {
    EnsembleMode mode = EnsembleMode::Corners;
    std::vector<int> powers;
    std::vector<int> rows;
    std::vector<double> times;
};

// Mean and stderr of prod_l sum_i value^{k_l} over stored samples.
FunctionalEstimate mc_joint_moment(const std::vector<CornersArray>& samples, const MomentQuery& q);
FunctionalEstimate mc_joint_moment(const std::vector<DBMPath>& samples, const MomentQuery& q);

// Streaming versions that draw n samples without storing them.
FunctionalEstimate corners_moment_mc(const MomentQuery& q, int N, double beta, double tau,
                                     long n, std::uint64_t seed);
struct DbmMomentEstimate {
    FunctionalEstimate estimate;
    // Mean accumulated Euler-Maruyama excess at the last query time.
    double em_excess = 0;
    double em_excess_stderr = 0;
};
DbmMomentEstimate dbm_moment_mc(const MomentQuery& q, int N, double beta, double dt, long n,
                                std::uint64_t seed);

// Edge observables at macroscopic shifts taus. For corners, row
// N_l = round(N - tau N^{2/3}) at unit variance is scaled by sqrt(2 beta N_l);
// for DBM, the state at time dbm_edge_time(N, beta, tau) is scaled by
// 2 sqrt((N + tau N^{2/3}) N). With r the scaled value, the rescaled particle
// is 2 N^{2/3} (r - 1), and the Laplace proxy with k = round(kappa N^{2/3}) is
// (sum r^k + sum r^{k+1}) / 2, the same parity average as scaled_edge_moment.
struct EdgeObservable {
    EnsembleMode mode = EnsembleMode::Corners;
    int N = 0;
    std::vector<double> taus;
    std::vector<std::vector<double>> top;  // per tau, rescaled top particles
    std::vector<double> laplace;           // per tau
};

int corners_edge_row(int N, double tau);
double dbm_edge_time(int N, double beta, double tau);

EdgeObservable edge_rescale(const CornersArray& s, const std::vector<double>& taus, double kappa,
                            int n_top = 1);
EdgeObservable edge_rescale(const DBMPath& p, const std::vector<double>& taus, double kappa,
                            int n_top = 1);

// One-sample Kolmogorov-Smirnov test. The p-value uses the Kolmogorov limit
// law at sqrt(n) + 0.12 + 0.11 / sqrt(n), accurate for n >= 35.
struct KsResult {
    double statistic = 0;
    double p_value = 0;
};
KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);

}  // namespace airy
