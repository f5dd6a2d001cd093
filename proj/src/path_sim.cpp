#include "ecnstar/path_sim.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ecnstar/errors.hpp"
#include "ecnstar/rng.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace ecnstar {

namespace {

constexpr std::uint64_t kSeriesSampleStride = 16; // ticks between series points
constexpr std::uint64_t kStallLimitTicks = 2'000'000;
constexpr std::uint64_t kAbsoluteTickCap = 600'000'000;

std::uint32_t count_marks_for_packet(const MarkingRates& rates, std::uint64_t seed,
                                     std::uint64_t packet) {
    SplitMix64 rng(SplitMix64::substream(seed, packet));
    std::uint32_t c = 0;
    for (double r : rates.values)
        if (rng.next_bool(r)) ++c;
    return c;
}

MarkDistribution trim_histogram(std::vector<std::uint64_t> bins) {
    while (bins.size() > 1 && bins.back() == 0) bins.pop_back();
    return MarkDistribution::from_counts(std::move(bins));
}

} // namespace

MarkDistribution simulate_bernoulli(const MarkingRates& rates, std::uint64_t packets,
                                    std::uint64_t seed, Exec exec) {
    MarkingRates checked(rates.values);
    if (packets < 1) throw std::invalid_argument("packet count must be at least 1");
    const std::size_t bins = static_cast<std::size_t>(checked.depth()) + 1;
    std::vector<std::uint64_t> hist(bins, 0);

#if defined(_OPENMP)
    if (exec == Exec::Parallel) {
#pragma omp parallel
        {
            std::vector<std::uint64_t> local(bins, 0);
#pragma omp for schedule(static)
            for (std::int64_t i = 0; i < static_cast<std::int64_t>(packets); ++i)
                ++local[count_marks_for_packet(checked, seed, static_cast<std::uint64_t>(i))];
#pragma omp critical
            for (std::size_t k = 0; k < bins; ++k) hist[k] += local[k];
        }
        return trim_histogram(std::move(hist));
    }
#else
    (void)exec;
#endif
    for (std::uint64_t i = 0; i < packets; ++i) ++hist[count_marks_for_packet(checked, seed, i)];
    return trim_histogram(std::move(hist));
}

std::vector<std::uint32_t> bernoulli_count_stream(const MarkingRates& rates,
                                                  std::uint64_t packets, std::uint64_t seed) {
    MarkingRates checked(rates.values);
    if (packets < 1) throw std::invalid_argument("packet count must be at least 1");
    std::vector<std::uint32_t> out(packets);
    for (std::uint64_t i = 0; i < packets; ++i) out[i] = count_marks_for_packet(checked, seed, i);
    return out;
}

double red_mark_probability(double avg_queue, const RedQueueModel& model) {
    if (avg_queue < 0.0) throw std::invalid_argument("average queue size must be non-negative");
    if (avg_queue < model.min_th) return 0.0;
    if (avg_queue > model.max_th) return 1.0;
    return model.max_p * (avg_queue - model.min_th) / (model.max_th - model.min_th);
}

// ---------------------------------------------------------------------------
// scenario validation / parsing
// ---------------------------------------------------------------------------

void PathScenario::validate() const {
    if (routers.empty()) throw ScenarioError("scenario has no routers");
    std::set<std::string> names;
    for (const auto& r : routers) {
        if (r.name.empty()) throw ScenarioError("router with empty name");
        if (!names.insert(r.name).second) throw ScenarioError("duplicate router name \"" + r.name + "\"");
        if (const auto* b = std::get_if<BernoulliMarkerModel>(&r.model)) {
            if (!(b->rate >= 0.0 && b->rate <= 1.0))
                throw ScenarioError("router \"" + r.name + "\": rate outside [0, 1]");
        } else {
            const auto& q = std::get<RedQueueModel>(r.model);
            if (!(q.min_th >= 0.0 && q.min_th < q.max_th && q.max_th <= static_cast<double>(q.capacity)))
                throw ScenarioError("router \"" + r.name + "\": need 0 <= min_th < max_th <= capacity");
            if (!(q.max_p > 0.0 && q.max_p <= 1.0))
                throw ScenarioError("router \"" + r.name + "\": max_p outside (0, 1]");
            if (!(q.ewma_weight > 0.0 && q.ewma_weight <= 1.0))
                throw ScenarioError("router \"" + r.name + "\": ewma_weight outside (0, 1]");
            if (q.service_rate < 1)
                throw ScenarioError("router \"" + r.name + "\": service_rate must be >= 1");
        }
    }
    if (flows.empty()) throw ScenarioError("scenario has no flows");
    std::set<std::string> flow_names;
    bool any_measured = false;
    for (const auto& f : flows) {
        if (f.name.empty()) throw ScenarioError("flow with empty name");
        if (!flow_names.insert(f.name).second) throw ScenarioError("duplicate flow name \"" + f.name + "\"");
        if (f.route.empty()) throw ScenarioError("flow \"" + f.name + "\": empty route");
        for (const auto& hop : f.route)
            if (!names.count(hop))
                throw ScenarioError("flow \"" + f.name + "\": route references unknown router \"" + hop + "\"");
        if (f.offered_load.has_value() == f.window.has_value())
            throw ScenarioError("flow \"" + f.name + "\": exactly one of offered_load or window is required");
        if (f.offered_load && !(*f.offered_load > 0.0))
            throw ScenarioError("flow \"" + f.name + "\": offered_load must be positive");
        if (f.window && *f.window < 1)
            throw ScenarioError("flow \"" + f.name + "\": window must be >= 1");
        any_measured |= f.measured;
    }
    if (!any_measured) throw ScenarioError("at least one flow must be measured");
    if (packet_budget < 1) throw ScenarioError("packet_budget must be >= 1");
}

// ---------------------------------------------------------------------------
// discrete-time store-and-forward simulation
// ---------------------------------------------------------------------------

namespace {

struct Packet {
    std::uint32_t marks = 0;
    std::uint32_t hop = 0;
    std::uint32_t flow = 0;
};

struct RouterState {
    const RouterModel* model = nullptr;
    const RedQueueModel* red = nullptr; // null for bernoulli markers
    const BernoulliMarkerModel* bern = nullptr;
    std::deque<Packet> queue;
    double avg = 0.0;
    std::uint64_t arrivals = 0; // post-warmup
    std::uint64_t marks = 0;
    std::uint64_t drops = 0; // whole run
    double avg_sum = 0.0;    // post-warmup EWMA samples
    std::uint64_t avg_ticks = 0;
    std::vector<RouterSeriesPoint> series;
};

struct FlowState {
    const FlowSpec* spec = nullptr;
    std::vector<std::uint32_t> route; // resolved router indices
    std::uint64_t outstanding = 0;
    std::uint64_t injected = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
    std::vector<std::uint64_t> hist;
    std::vector<std::uint32_t> stream;
};

struct RunControl {
    std::uint64_t max_ticks = kAbsoluteTickCap;
    bool stop_on_budget = true;
    // when set, statistics start at this tick instead of the packet warmup
    std::optional<std::uint64_t> stats_from_tick;
};

class Simulation {
public:
    Simulation(const PathScenario& sc, const RunControl& ctl)
        : sc_(sc), ctl_(ctl), rng_(sc.seed) {
        sc_.validate();
        for (const auto& r : sc_.routers) {
            RouterState st;
            st.model = &r;
            st.red = std::get_if<RedQueueModel>(&r.model);
            st.bern = std::get_if<BernoulliMarkerModel>(&r.model);
            routers_.push_back(std::move(st));
        }
        transit_.resize(routers_.size());
        for (const auto& f : sc_.flows) {
            FlowState st;
            st.spec = &f;
            for (const auto& hop : f.route) st.route.push_back(router_index(hop));
            flows_.push_back(std::move(st));
        }
    }

    SimOutput run() {
        const std::uint64_t warmup = sc_.warmup_packets();
        std::uint64_t last_delivery_tick = 0;
        std::uint64_t tick = 0;
        bool done = false;
        for (; tick < ctl_.max_ticks; ++tick) {
            stats_active_ = ctl_.stats_from_tick ? tick >= *ctl_.stats_from_tick
                                                 : all_measured_past(warmup);
            if (stats_active_ && stats_start_tick_ == kNoTick) stats_start_tick_ = tick;
            step(tick);
            if (measured_delivered_this_tick_) last_delivery_tick = tick;
            if (tick - last_delivery_tick > kStallLimitTicks)
                throw ScenarioError("simulation stalled: no measured delivery in " +
                                    std::to_string(kStallLimitTicks) + " ticks");
            if (ctl_.stop_on_budget && all_measured_past(warmup + sc_.packet_budget)) {
                ++tick;
                done = true;
                break;
            }
        }
        if (ctl_.stop_on_budget && !done)
            throw ScenarioError("exceeded the tick cap before collecting the packet budget");
        return collect(tick);
    }

private:
    std::uint32_t router_index(const std::string& name) const {
        for (std::size_t i = 0; i < sc_.routers.size(); ++i)
            if (sc_.routers[i].name == name) return static_cast<std::uint32_t>(i);
        throw ScenarioError("unknown router \"" + name + "\"");
    }

    bool all_measured_past(std::uint64_t n) const {
        for (const auto& f : flows_)
            if (f.spec->measured && f.delivered < n) return false;
        return true;
    }

    void deliver(FlowState& f, const Packet& pkt) {
        --f.outstanding;
        ++f.delivered;
        const std::uint64_t warmup = sc_.warmup_packets();
        if (f.spec->measured) measured_delivered_this_tick_ = true;
        if (f.spec->measured && f.delivered > warmup) {
            if (f.hist.size() <= pkt.marks) f.hist.resize(pkt.marks + 1, 0);
            ++f.hist[pkt.marks];
            f.stream.push_back(pkt.marks);
        }
    }

    // Walk the packet from its current hop through zero-delay bernoulli
    // markers until it is queued, dropped, or delivered.
    void arrive(Packet pkt) {
        FlowState& f = flows_[pkt.flow];
        while (true) {
            RouterState& r = routers_[f.route[pkt.hop]];
            if (r.bern) {
                if (stats_active_) ++r.arrivals;
                if (rng_.next_bool(r.bern->rate)) {
                    ++pkt.marks;
                    if (stats_active_) ++r.marks;
                }
                ++pkt.hop;
                if (pkt.hop == f.route.size()) {
                    deliver(f, pkt);
                    return;
                }
                continue;
            }
            // RED queue: EWMA on the pre-enqueue occupancy, mark, then enqueue or drop
            r.avg = (1.0 - r.red->ewma_weight) * r.avg +
                    r.red->ewma_weight * static_cast<double>(r.queue.size());
            if (stats_active_) ++r.arrivals;
            if (rng_.next_bool(red_mark_probability(r.avg, *r.red))) {
                ++pkt.marks;
                if (stats_active_) ++r.marks;
            }
            if (r.queue.size() < r.red->capacity) {
                r.queue.push_back(pkt);
            } else {
                ++r.drops;
                ++f.dropped;
                --f.outstanding; // window credit: the flow may re-inject next tick
            }
            return;
        }
    }

    void step(std::uint64_t tick) {
        measured_delivered_this_tick_ = false;

        // 1. packets forwarded during the previous tick arrive
        for (std::size_t qi = 0; qi < transit_.size(); ++qi) {
            for (const Packet& pkt : transit_[qi]) arrive(pkt);
            transit_[qi].clear();
        }

        // 2. injections
        for (std::size_t fi = 0; fi < flows_.size(); ++fi) {
            FlowState& f = flows_[fi];
            std::uint64_t n = 0;
            if (f.spec->window)
                n = *f.spec->window > f.outstanding ? *f.spec->window - f.outstanding : 0;
            else
                n = rng_.next_poisson(*f.spec->offered_load);
            for (std::uint64_t i = 0; i < n; ++i) {
                ++f.injected;
                ++f.outstanding;
                arrive(Packet{0, 0, static_cast<std::uint32_t>(fi)});
            }
        }

        // 3. service
        for (std::size_t qi = 0; qi < routers_.size(); ++qi) {
            RouterState& r = routers_[qi];
            if (!r.red) continue;
            if (stats_active_) {
                r.avg_sum += r.avg;
                ++r.avg_ticks;
            }
            if (tick % kSeriesSampleStride == 0) {
                const double frac = r.arrivals ? static_cast<double>(r.marks) / r.arrivals : 0.0;
                r.series.push_back({tick, r.avg, frac, r.drops});
            }
            for (std::uint32_t s = 0; s < r.red->service_rate && !r.queue.empty(); ++s) {
                Packet pkt = r.queue.front();
                r.queue.pop_front();
                FlowState& f = flows_[pkt.flow];
                ++pkt.hop;
                if (pkt.hop == f.route.size())
                    deliver(f, pkt);
                else
                    transit_[f.route[pkt.hop]].push_back(pkt);
            }
        }
    }

    SimOutput collect(std::uint64_t ticks) const {
        SimOutput out;
        out.ticks_run = ticks;
        for (const auto& r : routers_) {
            RouterStats st;
            st.name = r.model->name;
            st.mean_avg_queue = r.avg_ticks ? r.avg_sum / static_cast<double>(r.avg_ticks) : 0.0;
            st.realized_mark_fraction =
                r.arrivals ? static_cast<double>(r.marks) / static_cast<double>(r.arrivals) : 0.0;
            st.arrivals = r.arrivals;
            st.marks = r.marks;
            st.drops = r.drops;
            st.series = r.series;
            st.stable = is_stable(r);
            out.routers.push_back(std::move(st));
        }
        for (const auto& f : flows_) {
            FlowStats st;
            st.name = f.spec->name;
            st.measured = f.spec->measured;
            st.injected = f.injected;
            st.delivered = f.delivered;
            st.dropped = f.dropped;
            st.in_flight_end = f.outstanding;
            if (!f.hist.empty()) st.distribution = MarkDistribution::from_counts(f.hist);
            st.delivery_counts = f.stream;
            out.flows.push_back(std::move(st));
        }
        return out;
    }

    // windowed-mean drift check: mean of the 3rd quarter of post-warmup EWMA
    // samples vs the 4th; relative change above 5% flags divergence
    bool is_stable(const RouterState& r) const {
        if (!r.red) return true;
        std::vector<double> post;
        for (const auto& p : r.series)
            if (p.tick >= stats_start_tick_) post.push_back(p.avg_queue);
        if (post.size() < 8) return true;
        const std::size_t q = post.size() / 4;
        const auto mean = [&](std::size_t a, std::size_t b) {
            double s = 0.0;
            for (std::size_t i = a; i < b; ++i) s += post[i];
            return s / static_cast<double>(b - a);
        };
        const double m3 = mean(post.size() - 2 * q, post.size() - q);
        const double m4 = mean(post.size() - q, post.size());
        return std::abs(m4 - m3) <= 0.05 * std::max(std::abs(m3), 1.0);
    }

    static constexpr std::uint64_t kNoTick = ~std::uint64_t{0};

    PathScenario sc_;
    RunControl ctl_;
    SplitMix64 rng_;
    std::vector<RouterState> routers_;
    std::vector<FlowState> flows_;
    std::vector<std::vector<Packet>> transit_;
    bool stats_active_ = false;
    bool measured_delivered_this_tick_ = false;
    std::uint64_t stats_start_tick_ = kNoTick;
};

} // namespace

SimOutput simulate_red_path(const PathScenario& scenario) {
    return Simulation(scenario, RunControl{}).run();
}

const FlowStats& SimOutput::flow(const std::string& name) const {
    for (const auto& f : flows)
        if (f.name == name) return f;
    throw std::out_of_range("no flow named \"" + name + "\"");
}

const RouterStats& SimOutput::router(const std::string& name) const {
    for (const auto& r : routers)
        if (r.name == name) return r;
    throw std::out_of_range("no router named \"" + name + "\"");
}

std::uint32_t calibrate_window(const PathScenario& scenario, const std::string& flow_name,
                               const std::string& router_name, double target_lo, double target_hi,
                               std::uint64_t probe_ticks) {
    if (!(target_lo < target_hi)) throw std::invalid_argument("calibration band is empty");
    PathScenario probe = scenario;
    FlowSpec* flow = nullptr;
    for (auto& f : probe.flows)
        if (f.name == flow_name) flow = &f;
    if (!flow) throw ScenarioError("unknown flow \"" + flow_name + "\"");
    if (!flow->window) throw ScenarioError("flow \"" + flow_name + "\" is not window-controlled");

    const RedQueueModel* red = nullptr;
    for (const auto& r : probe.routers)
        if (r.name == router_name) red = std::get_if<RedQueueModel>(&r.model);
    if (!red) throw ScenarioError("router \"" + router_name + "\" is not a RED queue");

    RunControl ctl;
    ctl.max_ticks = probe_ticks;
    ctl.stop_on_budget = false;
    ctl.stats_from_tick = probe_ticks / 2;

    auto mean_for = [&](std::uint32_t w) {
        *flow->window = w;
        SimOutput out = Simulation(probe, ctl).run();
        return out.router(router_name).mean_avg_queue;
    };

    std::uint32_t lo = 1;
    std::uint32_t hi = red->capacity + 4 * red->service_rate + 16;
    while (lo < hi) {
        const std::uint32_t mid = lo + (hi - lo) / 2;
        if (mean_for(mid) < target_lo)
            lo = mid + 1;
        else
            hi = mid;
    }
    const double achieved = mean_for(lo);
    if (achieved < target_lo || achieved > target_hi)
        throw ScenarioError("calibration failed: window " + std::to_string(lo) + " gives average queue " +
                            std::to_string(achieved) + ", outside [" + std::to_string(target_lo) + ", " +
                            std::to_string(target_hi) + "]");
    return lo;
}

void export_distribution(const SimOutput& output, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());

    auto open = [](const std::filesystem::path& p) {
        std::ofstream f(p);
        if (!f) throw IoError("cannot write " + p.string());
        return f;
    };

    for (const auto& f : output.flows) {
        if (!f.measured) continue;
        auto file = open(dir / (f.name + "_histogram.csv"));
        file << "mark_count,packets\n";
        for (std::size_t k = 0; k < f.distribution.counts.size(); ++k)
            file << k << ',' << f.distribution.counts[k] << '\n';
        if (!file) throw IoError("write failed for " + (dir / (f.name + "_histogram.csv")).string());
    }
    for (const auto& r : output.routers) {
        auto file = open(dir / (r.name + "_series.csv"));
        file << "tick,avg_queue,mark_fraction,drops\n";
        file.precision(17);
        for (const auto& p : r.series)
            file << p.tick << ',' << p.avg_queue << ',' << p.mark_fraction << ',' << p.drops << '\n';
        if (!file) throw IoError("write failed for " + (dir / (r.name + "_series.csv")).string());
    }
}

} // namespace ecnstar
