// Benchmark comparing the serial reference implementations of the two
// data-parallel kernels against their OpenMP versions, with an equality check
// so the comparison is meaningful.
#include <chrono>
#include <cstdio>
#include <vector>

#include "ecnstar/mark_model.hpp"
#include "ecnstar/path_sim.hpp"
#include "ecnstar/poly_solver.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

using namespace ecnstar;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

void report(const char* kernel, double serial_s, double parallel_s, bool identical) {
    std::printf("%-28s serial %8.3f ms   parallel %8.3f ms   speedup %5.2fx   identical %s\n",
                kernel, serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s,
                identical ? "yes" : "NO");
}

void bench_bernoulli() {
    const MarkingRates rates({0.11, 0.21, 0.44, 0.55});
    const std::uint64_t packets = 20'000'000;

    auto t0 = clock_type::now();
    const auto serial = simulate_bernoulli(rates, packets, 1, Exec::Serial);
    const double ts = seconds_since(t0);

    t0 = clock_type::now();
    const auto parallel = simulate_bernoulli(rates, packets, 1, Exec::Parallel);
    const double tp = seconds_since(t0);

    report("bernoulli path simulation", ts, tp, serial.counts == parallel.counts);
}

void bench_sweep() {
    const auto dist = MarkDistribution::from_counts({9046, 21320, 15670, 3690, 274});
    const auto sig = sigmas_from_probabilities(probabilities_from_distribution(dist)).sigma;
    const auto poly = build_polynomial(sig);

    SweepOptions opts;
    opts.epsilon_grid_points = 2001;
    opts.root_search.grid_resolution = 1e-5;
    const int repeats = 5;

    opts.exec = Exec::Serial;
    auto t0 = clock_type::now();
    RootAreas serial;
    for (int i = 0; i < repeats; ++i) serial = extract_root_areas(poly, 1e-3, opts);
    const double ts = seconds_since(t0) / repeats;

    opts.exec = Exec::Parallel;
    t0 = clock_type::now();
    RootAreas parallel;
    for (int i = 0; i < repeats; ++i) parallel = extract_root_areas(poly, 1e-3, opts);
    const double tp = seconds_since(t0) / repeats;

    bool identical = serial.midpoints.size() == parallel.midpoints.size() &&
                     serial.epsilon_min == parallel.epsilon_min &&
                     serial.epsilon_max == parallel.epsilon_max;
    if (identical)
        for (std::size_t i = 0; i < serial.midpoints.size(); ++i)
            identical = identical && serial.midpoints[i] == parallel.midpoints[i] &&
                        serial.areas[i].lo == parallel.areas[i].lo &&
                        serial.areas[i].hi == parallel.areas[i].hi;
    report("epsilon sweep (2001 levels)", ts, tp, identical);
}

} // namespace

int main() {
#if defined(_OPENMP)
    std::printf("OpenMP enabled, max threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP: parallel policy falls back to serial\n");
#endif
    bench_bernoulli();
    bench_sweep();
    return 0;
}
