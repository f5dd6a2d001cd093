#include "ecnstar/mark_model.hpp"

#include <array>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ecnstar {

namespace {

// Pascal's triangle up to kMaxPathDepth, exact in 64-bit integers.
struct BinomialTable {
    std::array<std::array<std::uint64_t, kMaxPathDepth + 1>, kMaxPathDepth + 1> c{};
    BinomialTable() {
        for (int n = 0; n <= kMaxPathDepth; ++n) {
            c[n][0] = 1;
            for (int k = 1; k <= n; ++k)
                c[n][k] = c[n - 1][k - 1] + (k <= n - 1 ? c[n - 1][k] : 0);
        }
    }
};

const BinomialTable& table() {
    static const BinomialTable t;
    return t;
}

void check_depth(int n) {
    if (n < 1) throw std::invalid_argument("path depth must be at least 1");
    if (n > kMaxPathDepth)
        throw std::invalid_argument("path depth " + std::to_string(n) + " exceeds the exact-arithmetic limit of " +
                                    std::to_string(kMaxPathDepth));
}

void check_rates(const MarkingRates& rates) {
    if (rates.values.empty()) throw std::invalid_argument("marking rates must not be empty");
    for (double r : rates.values)
        if (!(r >= 0.0 && r <= 1.0))
            throw std::invalid_argument("marking rate " + std::to_string(r) + " outside [0, 1]");
}

} // namespace

std::uint64_t binomial(int n, int k) {
    if (n < 0 || n > kMaxPathDepth)
        throw std::invalid_argument("binomial: n out of range [0, " + std::to_string(kMaxPathDepth) + "]");
    if (k < 0 || k > n) return 0;
    return table().c[n][k];
}

MarkingRates::MarkingRates(std::vector<double> v) : values(std::move(v)) {
    if (values.empty()) throw std::invalid_argument("marking rates must not be empty");
    for (double r : values)
        if (!(r >= 0.0 && r <= 1.0))
            throw std::invalid_argument("marking rate " + std::to_string(r) + " outside [0, 1]");
}

MarkDistribution MarkDistribution::from_counts(std::vector<std::uint64_t> counts) {
    MarkDistribution d;
    d.counts = std::move(counts);
    d.total = std::accumulate(d.counts.begin(), d.counts.end(), std::uint64_t{0});
    return d;
}

int MarkDistribution::inferred_depth() const {
    for (int k = static_cast<int>(counts.size()) - 1; k >= 0; --k)
        if (counts[k] > 0) return k;
    return 0;
}

MarkProbabilities forward_recursion(const MarkingRates& rates) {
    check_rates(rates);
    const int n = rates.depth();
    // p[k] over the first m routers; extend one router at a time:
    // p(M_k^{m+1}) = p(M_k^m)(1-r) + p(M_{k-1}^m) r
    std::vector<double> p{1.0};
    for (double r : rates.values) {
        std::vector<double> next(p.size() + 1, 0.0);
        for (std::size_t k = 0; k < p.size(); ++k) {
            next[k] += p[k] * (1.0 - r);
            next[k + 1] += p[k] * r;
        }
        p = std::move(next);
    }
    MarkProbabilities out;
    out.depth = n;
    out.p0 = p[0];
    out.p.assign(p.begin() + 1, p.end());
    return out;
}

MarkProbabilities forward_bruteforce(const MarkingRates& rates) {
    check_rates(rates);
    const int n = rates.depth();
    check_depth(n);
    std::vector<double> p(static_cast<std::size_t>(n) + 1, 0.0);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        double prod = 1.0;
        int marks = 0;
        for (int i = 0; i < n; ++i) {
            if (mask >> i & 1) {
                prod *= rates.values[i];
                ++marks;
            } else {
                prod *= 1.0 - rates.values[i];
            }
        }
        p[marks] += prod;
    }
    MarkProbabilities out;
    out.depth = n;
    out.p0 = p[0];
    out.p.assign(p.begin() + 1, p.end());
    return out;
}

SigmaVector sigmas_from_rates(const MarkingRates& rates) {
    check_rates(rates);
    // expand prod (1 + r_i x); coefficient of x^k is sigma_k
    std::vector<double> c{1.0};
    for (double r : rates.values) {
        std::vector<double> next(c.size() + 1, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i] += c[i];
            next[i + 1] += c[i] * r;
        }
        c = std::move(next);
    }
    SigmaVector out;
    out.depth = rates.depth();
    out.values.assign(c.begin() + 1, c.end());
    return out;
}

MarkProbabilities probabilities_from_sigmas(const SigmaVector& sigmas) {
    const int n = sigmas.depth;
    check_depth(n);
    if (static_cast<int>(sigmas.values.size()) != n)
        throw std::invalid_argument("sigma vector length does not match its depth");
    MarkProbabilities out;
    out.depth = n;
    out.p.assign(static_cast<std::size_t>(n), 0.0);
    for (int k = 1; k <= n; ++k) {
        double s = 0.0;
        for (int i = 0; i <= n - k; ++i) {
            const double term = static_cast<double>(binomial(i + k, i)) * sigmas.values[i + k - 1];
            s += (i % 2 == 0) ? term : -term;
        }
        out.p[k - 1] = s;
    }
    double sum = 0.0;
    for (double v : out.p) sum += v;
    out.p0 = 1.0 - sum;
    return out;
}

SigmaEstimate sigmas_from_probabilities(const MarkProbabilities& probs) {
    const int n = probs.depth;
    check_depth(n);
    if (static_cast<int>(probs.p.size()) != n)
        throw std::invalid_argument("probability vector length does not match its depth");
    SigmaVector sig;
    sig.depth = n;
    sig.values.assign(static_cast<std::size_t>(n), 0.0);
    // diagonal system: sigma_n = p_n, then walk upward
    sig.values[n - 1] = probs.p[n - 1];
    for (int k = n - 1; k >= 1; --k) {
        double s = probs.p[k - 1];
        for (int i = 1; i <= n - k; ++i) {
            const double term = static_cast<double>(binomial(i + k, i)) * sig.values[i + k - 1];
            s -= (i % 2 == 0) ? term : -term;
        }
        sig.values[k - 1] = s;
    }
    return SigmaEstimate{sig, validate_sigma_bounds(sig)};
}

MarkProbabilities probabilities_from_distribution(const MarkDistribution& dist) {
    if (dist.total == 0) throw std::invalid_argument("empty distribution: total is 0");
    std::uint64_t sum = std::accumulate(dist.counts.begin(), dist.counts.end(), std::uint64_t{0});
    if (sum != dist.total)
        throw std::invalid_argument("distribution counts sum to " + std::to_string(sum) +
                                    " but total is " + std::to_string(dist.total));
    const int n = dist.inferred_depth();
    MarkProbabilities out;
    out.depth = n;
    out.p0 = static_cast<double>(dist.counts.empty() ? 0 : dist.counts[0]) / static_cast<double>(dist.total);
    out.p.assign(static_cast<std::size_t>(n), 0.0);
    for (int k = 1; k <= n; ++k)
        out.p[k - 1] = static_cast<double>(dist.counts[k]) / static_cast<double>(dist.total);
    return out;
}

SigmaValidity validate_sigma_bounds(const SigmaVector& sigmas) {
    SigmaValidity v;
    for (int k = 1; k <= sigmas.depth; ++k) {
        const double upper = static_cast<double>(binomial(sigmas.depth, k));
        const double value = sigmas.values[k - 1];
        if (value < 0.0 || value > upper) {
            v.ok = false;
            v.violations.push_back({k, value, 0.0, upper});
        }
    }
    return v;
}

} // namespace ecnstar
