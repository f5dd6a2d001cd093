#pragma once

#include <cmath>
#include <cstdint>

namespace ecnstar {

/// Counter-friendly 64-bit generator (splitmix64). A packet index can be mixed
/// into the seed so that per-packet streams are independent of iteration order,
/// which keeps parallel and serial simulation bit-identical.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

    std::uint64_t next() {
        state_ += kGolden;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Bernoulli draw.
    bool next_bool(double probability) { return next_double() < probability; }

    /// Poisson draw via Knuth's product method; fine for the small per-tick
    /// means used by the simulator and stable across platforms.
    std::uint64_t next_poisson(double mean) {
        if (mean <= 0.0) return 0;
        const double limit = std::exp(-mean);
        std::uint64_t k = 0;
        double prod = next_double();
        while (prod > limit) {
            ++k;
            prod *= next_double();
        }
        return k;
    }

    /// Seed for an independent per-item stream (item = packet index, etc.).
    static std::uint64_t substream(std::uint64_t seed, std::uint64_t item) {
        return seed + (item + 1) * kGolden;
    }

private:
    std::uint64_t state_;
};

} // namespace ecnstar
