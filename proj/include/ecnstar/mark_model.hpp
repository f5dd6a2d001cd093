#pragma once

#include <cstdint>
#include <vector>

namespace ecnstar {

/// Largest path depth for which binomial coefficients are kept in exact
/// integer arithmetic. Deeper systems are rejected rather than silently
/// losing precision.
inline constexpr int kMaxPathDepth = 20;

/// C(n, k) in exact integer arithmetic, n <= kMaxPathDepth.
std::uint64_t binomial(int n, int k);

/// Per-router marking rates along a path, in path order.
struct MarkingRates {
    std::vector<double> values;

    MarkingRates() = default;
    explicit MarkingRates(std::vector<double> v);

    int depth() const { return static_cast<int>(values.size()); }
};

/// Histogram of observed mark counts: counts[k] packets were marked k times.
struct MarkDistribution {
    std::vector<std::uint64_t> counts;
    std::uint64_t total = 0;

    static MarkDistribution from_counts(std::vector<std::uint64_t> counts);

    /// Largest k with a nonzero bucket; 0 when no packet was marked.
    int inferred_depth() const;
};

/// p[k-1] = probability of being marked exactly k times over a depth-n path;
/// p0 is the unmarked fraction.
struct MarkProbabilities {
    int depth = 0;
    double p0 = 1.0;
    std::vector<double> p;
};

/// values[k-1] = k-th elementary symmetric polynomial of the marking rates.
struct SigmaVector {
    int depth = 0;
    std::vector<double> values;
};

struct SigmaBoundViolation {
    int k = 0;
    double value = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

/// Feasibility report: sigma_k derived from valid rates must lie in [0, C(n,k)].
/// Noisy data may leave that range; we report it instead of clamping.
struct SigmaValidity {
    bool ok = true;
    std::vector<SigmaBoundViolation> violations;
};

struct SigmaEstimate {
    SigmaVector sigma;
    SigmaValidity validity;
};

/// Exact mark-count distribution by dynamic programming over routers.
MarkProbabilities forward_recursion(const MarkingRates& rates);

/// Same contract as forward_recursion, by explicit enumeration of all 2^n
/// marked/unmarked subsets. Independent route used as an oracle; n <= 20.
MarkProbabilities forward_bruteforce(const MarkingRates& rates);

/// Elementary symmetric polynomials of the rates via coefficient expansion.
SigmaVector sigmas_from_rates(const MarkingRates& rates);

/// p(M_k^n) = sum_{i=0}^{n-k} (-1)^i C(i+k,i) sigma_{i+k}; p0 = 1 - sum.
MarkProbabilities probabilities_from_sigmas(const SigmaVector& sigmas);

/// Back-substitution of the diagonal system, from k = n down to 1. Exact
/// inverse of probabilities_from_sigmas; out-of-range sigmas are reported in
/// the attached validity, never an error.
SigmaEstimate sigmas_from_probabilities(const MarkProbabilities& probs);

/// Plain ratio estimator: p[k] = counts[k]/total with n = max observed count.
/// Zero buckets below n are kept so the solver still sees an n-dim system.
MarkProbabilities probabilities_from_distribution(const MarkDistribution& dist);

SigmaValidity validate_sigma_bounds(const SigmaVector& sigmas);

} // namespace ecnstar
