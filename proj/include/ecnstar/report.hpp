#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ecnstar/path_sim.hpp"
#include "ecnstar/poly_solver.hpp"

namespace ecnstar {

/// Estimation result of one measured flow, or the failure that stopped it.
struct FlowReport {
    std::string name;
    std::uint64_t packets = 0;
    std::optional<RateEstimate> estimate;
    std::string failure; // non-empty when estimate is absent
};

/// Per-router comparison row: measured average queue, the marking rate the RED
/// curve implies for it, and the realized fraction.
struct RouterReport {
    std::string name;
    bool is_red = false;
    double mean_avg_queue = 0.0;
    double theoretical_rate = 0.0;
    double realized_fraction = 0.0;
    bool stable = true;
};

struct RunReport {
    std::string scenario_name;
    std::uint64_t seed = 0;
    std::uint64_t ticks = 0;
    std::vector<RouterReport> routers;
    std::vector<FlowReport> flows;
    // flow index -> (router name -> estimate mapped by rank of theoretical rate)
    struct MappedRate {
        std::string router;
        double theoretical = 0.0;
        std::optional<double> estimated; // absent when the flow does not cross it
    };
    std::vector<std::vector<MappedRate>> rate_table;
};

RunReport build_run_report(const PathScenario& scenario, const SimOutput& output,
                           double epsilon_limit, const SweepOptions& opts = {});

/// Plain-text rendering, one section per flow plus the comparison table.
std::string render_report(const RunReport& report);

} // namespace ecnstar
