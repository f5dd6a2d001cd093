#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ecnstar/exec.hpp"
#include "ecnstar/mark_model.hpp"

namespace ecnstar {

/// Memoryless marker: increments the packet counter with a fixed probability,
/// no queue, no delay.
struct BernoulliMarkerModel {
    double rate = 0.0;
};

/// RED queue: marks with probability linear in the EWMA average queue size
/// between min_th and max_th (scaled by max_p, 1 above max_th); drops only
/// when the queue is full.
struct RedQueueModel {
    double min_th = 50.0;
    double max_th = 100.0;
    double max_p = 1.0;
    std::uint32_t capacity = 100;
    double ewma_weight = 0.002;
    std::uint32_t service_rate = 1; // packets per tick
};

struct RouterModel {
    std::string name;
    std::variant<BernoulliMarkerModel, RedQueueModel> model;
};

/// A flow either injects a Poisson number of packets per tick (offered_load)
/// or keeps a fixed number outstanding, ack-clocked (window). Exactly one of
/// the two must be set.
struct FlowSpec {
    std::string name;
    std::vector<std::string> route; // router names, in order
    std::optional<double> offered_load;
    std::optional<std::uint32_t> window;
    bool measured = false;
};

struct PathScenario {
    std::vector<RouterModel> routers;
    std::vector<FlowSpec> flows;
    std::uint64_t packet_budget = 0; // measured packets collected per measured flow
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> warmup; // delivered packets excluded, per measured flow

    std::uint64_t warmup_packets() const { return warmup ? *warmup : packet_budget / 10; }

    /// Throws ScenarioError on any inconsistency.
    void validate() const;
};

/// Strict JSON loader: unknown keys are rejected by name.
PathScenario parse_scenario(const std::string& json_text);
PathScenario load_scenario(const std::filesystem::path& file);

struct RouterSeriesPoint {
    std::uint64_t tick = 0;
    double avg_queue = 0.0;      // EWMA value at this tick
    double mark_fraction = 0.0;  // cumulative post-warmup marks/arrivals
    std::uint64_t drops = 0;     // cumulative
};

struct RouterStats {
    std::string name;
    double mean_avg_queue = 0.0;         // post-warmup mean of the EWMA
    double realized_mark_fraction = 0.0; // post-warmup marks/arrivals
    std::uint64_t arrivals = 0;          // post-warmup
    std::uint64_t marks = 0;
    std::uint64_t drops = 0; // whole run
    bool stable = true;      // windowed-mean drift below 5% over the last quarter
    std::vector<RouterSeriesPoint> series;
};

struct FlowStats {
    std::string name;
    bool measured = false;
    MarkDistribution distribution;              // post-warmup deliveries
    std::vector<std::uint32_t> delivery_counts; // per-delivery counter values, in order
    std::uint64_t injected = 0;
    std::uint64_t delivered = 0; // whole run
    std::uint64_t dropped = 0;
    std::uint64_t in_flight_end = 0;
};

struct SimOutput {
    std::vector<RouterStats> routers;
    std::vector<FlowStats> flows;
    std::uint64_t ticks_run = 0;

    const FlowStats& flow(const std::string& name) const;
    const RouterStats& router(const std::string& name) const;
};

/// Stationary path model: every packet independently crosses the routers,
/// router i incrementing its counter with probability rates[i]. Deterministic
/// for a fixed seed and identical for both execution policies.
MarkDistribution simulate_bernoulli(const MarkingRates& rates, std::uint64_t packets,
                                    std::uint64_t seed, Exec exec = Exec::Parallel);

/// Same per-packet draws as simulate_bernoulli, returned in packet order
/// (for streaming consumers).
std::vector<std::uint32_t> bernoulli_count_stream(const MarkingRates& rates,
                                                  std::uint64_t packets, std::uint64_t seed);

/// Piecewise-linear RED marking probability for a given average queue size.
double red_mark_probability(double avg_queue, const RedQueueModel& model);

/// Discrete-time store-and-forward simulation of the scenario. Runs until
/// every measured flow has delivered warmup + packet_budget packets.
SimOutput simulate_red_path(const PathScenario& scenario);

/// Binary search on a window flow's window size until the named router's
/// post-warmup mean average queue falls inside [target_lo, target_hi].
/// Probes run the scenario for a fixed number of ticks.
std::uint32_t calibrate_window(const PathScenario& scenario, const std::string& flow_name,
                               const std::string& router_name, double target_lo,
                               double target_hi, std::uint64_t probe_ticks = 30000);

/// Writes <flow>_histogram.csv for measured flows and <router>_series.csv for
/// every router under dir. I/O failures carry the file path.
void export_distribution(const SimOutput& output, const std::filesystem::path& dir);

} // namespace ecnstar
