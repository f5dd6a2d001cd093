#include "ecnstar/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ecnstar/errors.hpp"

namespace ecnstar {

ConvergenceTrace stream_estimate(std::span<const std::uint32_t> counts, std::uint64_t stride,
                                 double epsilon_limit, const SweepOptions& opts) {
    if (stride < 1) throw std::invalid_argument("stride must be at least 1");

    ConvergenceTrace trace;
    trace.stride = stride;
    for (std::uint32_t c : counts) trace.final_depth = std::max<int>(trace.final_depth, static_cast<int>(c));

    std::vector<std::uint64_t> cum(static_cast<std::size_t>(trace.final_depth) + 1, 0);
    int depth_seen = 0;
    for (std::uint64_t m = 0; m < counts.size(); ++m) {
        const std::uint32_t c = counts[m];
        ++cum[c];
        depth_seen = std::max<int>(depth_seen, static_cast<int>(c));
        if ((m + 1) % stride != 0) continue;

        Checkpoint cp;
        cp.packets_seen = m + 1;
        cp.inferred_depth = depth_seen;
        if (depth_seen > 0) {
            MarkDistribution dist =
                MarkDistribution::from_counts({cum.begin(), cum.begin() + depth_seen + 1});
            const MarkProbabilities probs = probabilities_from_distribution(dist);
            SigmaEstimate sig = sigmas_from_probabilities(probs);
            cp.sigma = sig.sigma;
            cp.sigma_validity = sig.validity;
            // full rate extraction only once the stream's final depth is visible;
            // a shorter prefix estimates a truncated path, not this one
            if (depth_seen == trace.final_depth) {
                try {
                    RateEstimate est = estimate_rates(dist, epsilon_limit, opts);
                    cp.solvable = true;
                    cp.rates = std::move(est.rates);
                    cp.areas = std::move(est.areas);
                } catch (const NoFullSolutionBand&) {
                    cp.solvable = false;
                }
            }
        }
        trace.checkpoints.push_back(std::move(cp));
    }
    return trace;
}

ThresholdReport detect_thresholds(const ConvergenceTrace& trace, std::uint64_t stability_window,
                                  double stability_tol) {
    if (trace.checkpoints.empty()) throw std::invalid_argument("trace has no checkpoints");
    ThresholdReport report;
    report.stability_window = stability_window;
    report.stability_tol = stability_tol;

    for (const auto& cp : trace.checkpoints) {
        if (cp.solvable) {
            report.solvable_at = cp.packets_seen;
            break;
        }
    }

    const auto& cps = trace.checkpoints;
    for (std::size_t i = 0; i + stability_window < cps.size(); ++i) {
        const auto& base = cps[i];
        if (base.inferred_depth == 0) continue;
        bool stable = true;
        for (std::size_t j = i + 1; j <= i + stability_window && stable; ++j) {
            const auto& next = cps[j];
            if (next.inferred_depth != base.inferred_depth) {
                stable = false;
                break;
            }
            for (int k = 0; k < base.inferred_depth; ++k) {
                const double a = base.sigma.values[static_cast<std::size_t>(k)];
                const double b = next.sigma.values[static_cast<std::size_t>(k)];
                if (std::abs(b - a) > stability_tol * std::max(std::abs(a), 1e-9)) {
                    stable = false;
                    break;
                }
            }
        }
        if (stable) {
            report.sigma_stable_at = base.packets_seen;
            break;
        }
    }
    return report;
}

void write_trace_csv(const ConvergenceTrace& trace, std::ostream& out) {
    const int n = trace.final_depth;
    out << "packets";
    for (int k = 1; k <= n; ++k) out << ",sigma_" << k;
    out << ",solvable";
    for (int k = 1; k <= n; ++k) out << ",rate_" << k;
    out << '\n';
    out.precision(17);
    for (const auto& cp : trace.checkpoints) {
        out << cp.packets_seen;
        for (int k = 0; k < n; ++k) {
            out << ',';
            if (k < cp.inferred_depth) out << cp.sigma.values[static_cast<std::size_t>(k)];
        }
        out << ',' << (cp.solvable ? 1 : 0);
        for (int k = 0; k < n; ++k) {
            out << ',';
            if (cp.rates && k < static_cast<int>(cp.rates->values.size()))
                out << cp.rates->values[static_cast<std::size_t>(k)];
        }
        out << '\n';
    }
}

std::vector<std::uint32_t> deterministic_stream_from_distribution(const MarkDistribution& dist,
                                                                  std::uint64_t packets) {
    if (dist.total == 0) throw std::invalid_argument("empty distribution");
    const std::size_t bins = dist.counts.size();
    std::vector<double> target(bins);
    for (std::size_t k = 0; k < bins; ++k)
        target[k] = static_cast<double>(dist.counts[k]) / static_cast<double>(dist.total);

    std::vector<std::uint64_t> emitted(bins, 0);
    std::vector<std::uint32_t> out;
    out.reserve(packets);
    for (std::uint64_t m = 1; m <= packets; ++m) {
        std::size_t best = 0;
        double best_deficit = -1e300;
        for (std::size_t k = 0; k < bins; ++k) {
            const double deficit =
                static_cast<double>(m) * target[k] - static_cast<double>(emitted[k]);
            if (deficit > best_deficit) {
                best_deficit = deficit;
                best = k;
            }
        }
        ++emitted[best];
        out.push_back(static_cast<std::uint32_t>(best));
    }
    return out;
}

} // namespace ecnstar
