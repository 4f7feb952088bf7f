#pragma once

// Exact Dunkl-operator engine.
//
//   D_i = d/dx_i + tau x_i + (beta/2) sum_{j<=n, j!=i} (1 - s_ij)/(x_i - x_j)
//   P_k = sum_{i<=n} D_i^k
//
// Two representations are provided. RawPoly stores every monomial and is the
// reference implementation for small n. The symmetric engine stores one
// coefficient per orbit of monomials under permutations of x_1..x_n and is
// what the moment formulas run on.

#include "airy/rational.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

namespace airy {

struct OperatorSpec {
    int N = 1;          // active variables x_1..x_N
    Rational tau = 0;   // Gaussian variance / DBM time
    Rational beta = 2;
    int k = 1;
};

// Guards against runaway expansions; exceeding them raises ResourceError.
struct EngineLimits {
    int max_degree = 512;
    std::size_t max_terms = 20'000'000;
};

// ---------------------------------------------------------------------------
// Raw polynomials in a fixed number of variables.

using Exponents = std::vector<int>;

class RawPoly {
public:
    explicit RawPoly(int nvars = 0) : nvars_(nvars) {}
    static RawPoly constant(int nvars, const Rational& c);
    static RawPoly monomial(const Exponents& e, const Rational& c = 1);

    int nvars() const { return nvars_; }
    const std::map<Exponents, Rational>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    Rational coefficient(const Exponents& e) const;
    Rational constant_term() const;
    int max_degree() const;

    void add(const Exponents& e, const Rational& c);
    RawPoly& operator+=(const RawPoly& other);
    RawPoly& operator-=(const RawPoly& other);
    RawPoly operator-(const RawPoly& other) const;
    bool operator==(const RawPoly& other) const { return terms_ == other.terms_; }

private:
    int nvars_;
    std::map<Exponents, Rational> terms_;  // zero coefficients never stored
};

// D_i with i 1-based; j ranges over 1..spec.N (spec.N <= nvars).
RawPoly apply_dunkl(const RawPoly& p, int i, const OperatorSpec& spec,
                    const EngineLimits& lim = {});
RawPoly apply_dunkl_power(const RawPoly& p, int i, int times, const OperatorSpec& spec,
                          const EngineLimits& lim = {});
RawPoly apply_power_sum(const RawPoly& p, const OperatorSpec& spec, const EngineLimits& lim = {});
RawPoly multiply_x(const RawPoly& p, int i);

// Pbar_k = sum_w sum_i D_i^w x_i D_i^{k-1-w}.
RawPoly apply_tau_derivative_power_sum(const RawPoly& p, const OperatorSpec& spec,
                                       const EngineLimits& lim = {});

// Counts root-to-constant paths in the term tree of D_{i_m}^{k_m}...D_{i_1}^{k_1}[1]
// without merging equal monomials. rows[l] is the active N of stage l.
std::size_t count_expansion_terms(const std::vector<int>& marked, const std::vector<int>& powers,
                                  const std::vector<int>& rows, int nvars, const Rational& beta,
                                  const Rational& tau);

// ---------------------------------------------------------------------------
// Degree profiles: one marked variable plus an anonymous multiset of the
// others. A ProfileSum over n variables represents
//     sum c(a, mu) * x_i^a * m_mu(x_j : j != i),
// with m_mu the sum of distinct monomials whose sorted exponents are mu. The
// coefficient is that of each individual monomial in the orbit.

struct DegreeProfile {
    int marked = 0;
    std::vector<int> rest;  // nonincreasing, strictly positive entries
    auto operator<=>(const DegreeProfile&) const = default;
};

using ProfileSum = std::map<DegreeProfile, Rational>;

// D_i on the marked variable, spec.N = n variables in total.
ProfileSum apply_dunkl(const ProfileSum& state, const OperatorSpec& spec,
                       const EngineLimits& lim = {});

// Symmetric polynomials: partition -> coefficient of each monomial in its orbit.
using Partition = std::vector<int>;
using SymPoly = std::map<Partition, Rational>;

// P_k on a symmetric polynomial in spec.N variables. When prune_above is set,
// terms whose total degree exceeds it are discarded after every step; this is
// only sound when the caller reads a term of degree <= prune_above - (steps left).
SymPoly apply_power_sum(const SymPoly& f, const OperatorSpec& spec,
                        std::optional<int> prune_above = std::nullopt,
                        const EngineLimits& lim = {});

// Expand a symmetric polynomial into raw monomials (small n only).
RawPoly expand(const SymPoly& f, int nvars);

// ---------------------------------------------------------------------------
// Moment formulas.

// E[prod_l sum_{i<=N_l} (y_i^{N_l})^{k_l}] for GbE corners of variance tau.
Rational corners_moment(const std::vector<int>& powers, const std::vector<int>& rows, int N,
                        const Rational& beta, const Rational& tau, const EngineLimits& lim = {});

// E[prod_l sum_i Y_i(tau_l)^{k_l}] for DBM from zero.
Rational dbm_moment(const std::vector<int>& powers, const std::vector<Rational>& times, int N,
                    const Rational& beta, const EngineLimits& lim = {});

// ---------------------------------------------------------------------------
// Algebraic identities, checked on every monomial of degree <= degree_cap.

bool check_commutation(int N, int k1, int k2, const Rational& beta, const Rational& tau,
                       int degree_cap);
// [P_{k1}(spec_a), P_{k2}(spec_b)] annihilates the test set. Lets a caller
// compare operators built with different parameters.
bool check_commutation(const OperatorSpec& a, const OperatorSpec& b, int degree_cap);

bool check_nested_commutator(int N, int k, const Rational& beta, const Rational& tau,
                             int degree_cap);
// The single commutator [Pbar_k, P_k] applied to one monomial.
RawPoly single_commutator_image(int N, int k, const Rational& beta, const Rational& tau,
                                const Exponents& monomial);

// ---------------------------------------------------------------------------
// beta = 2 multivariate Bessel function and the eigenrelation P_k B = p_k(lambda) B.

double bessel_beta2(const std::vector<double>& lambda, const std::vector<double>& x);

struct EigenResidual {
    double residual = 0;      // |P_k B - p_k(lambda) B| / |B|
    double operator_value = 0;
    double eigen_value = 0;
    bool step_warning = false;  // fd_step not small against the x spacing
};

EigenResidual eigenrelation_residual_beta2(const std::vector<double>& lambda,
                                           const std::vector<double>& x, int k,
                                           double fd_step = 1e-4);

// ---------------------------------------------------------------------------
// Edge-scaled moment
//   2^{-m} prod_l (P_{k_l}/(2 sqrt(N_l N))^{k_l} + P_{k_l+1}/(2 sqrt(N_l N))^{k_l+1})[1]
// at variance 2N/beta, k_l = round(kappa_l N^{2/3}), N_l = round(N - tau_l N^{2/3}).

struct ScaledEdgeMoment {
    std::vector<int> powers;
    std::vector<int> rows;
    // One exact corners moment per parity choice b in {0,1}^m (bit l set = k_l + 1).
    std::vector<Rational> raw_terms;
    std::vector<double> scaled_terms;
    double value = 0;
};

ScaledEdgeMoment scaled_edge_moment(int N, const std::vector<double>& kappa,
                                    const std::vector<double>& taus, const Rational& beta,
                                    const EngineLimits& lim = {});

// log|q| without overflow, for rationals with huge numerators.
double log_abs(const Rational& q);

}  // namespace airy
