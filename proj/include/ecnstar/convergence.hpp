#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "ecnstar/mark_model.hpp"
#include "ecnstar/poly_solver.hpp"

namespace ecnstar {

struct Checkpoint {
    std::uint64_t packets_seen = 0;
    int inferred_depth = 0; // what the observer knew at the time
    SigmaVector sigma;      // length = inferred_depth
    SigmaValidity sigma_validity;
    bool solvable = false;              // full-depth extraction succeeded here
    std::optional<MarkingRates> rates;  // present iff solvable
    std::optional<RootAreas> areas;     // present iff solvable
};

struct ConvergenceTrace {
    std::uint64_t stride = 50;
    int final_depth = 0; // largest mark count seen over the whole stream
    std::vector<Checkpoint> checkpoints;
};

/// Re-estimates sigmas every `stride` packets over a stream of mark counts and
/// attempts the full rate extraction at each checkpoint. A checkpoint is
/// solvable only when extraction succeeds at the path depth the whole stream
/// eventually reveals; sigma values always reflect the depth known at the time.
ConvergenceTrace stream_estimate(std::span<const std::uint32_t> counts, std::uint64_t stride,
                                 double epsilon_limit = 1e-3, const SweepOptions& opts = {});

struct ThresholdReport {
    std::optional<std::uint64_t> sigma_stable_at;
    std::optional<std::uint64_t> solvable_at;
    std::uint64_t stability_window = 20;
    double stability_tol = 0.05;
};

/// sigma_stable_at: first checkpoint from which every sigma component stays
/// within stability_tol (relative) over the next stability_window checkpoints,
/// with the inferred depth unchanged. solvable_at: first solvable checkpoint.
ThresholdReport detect_thresholds(const ConvergenceTrace& trace,
                                  std::uint64_t stability_window = 20,
                                  double stability_tol = 0.05);

/// CSV: packets,sigma_1..sigma_n,solvable,rate_1..rate_n (empty cells where absent).
void write_trace_csv(const ConvergenceTrace& trace, std::ostream& out);

/// Deterministic stream whose prefix frequencies track the distribution's
/// ratios as closely as integer counts allow (largest-deficit scheduling).
std::vector<std::uint32_t> deterministic_stream_from_distribution(const MarkDistribution& dist,
                                                                  std::uint64_t packets);

} // namespace ecnstar
