#include "ecnstar/poly_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

#include "ecnstar/errors.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace ecnstar {

namespace {

// P(x) sampled on the uniform grid x_i = i/steps. Shared by every epsilon of a
// sweep: level shifts only move the zero line, not the samples.
std::vector<double> scan_values(const SolvingPolynomial& poly, int steps) {
    std::vector<double> s(static_cast<std::size_t>(steps) + 1);
    for (int i = 0; i <= steps; ++i)
        s[static_cast<std::size_t>(i)] = poly.eval(static_cast<double>(i) / steps);
    return s;
}

double bisect(const SolvingPolynomial& poly, double level, double lo, double hi, double flo,
              double width) {
    while (hi - lo > width) {
        const double mid = 0.5 * (lo + hi);
        const double fm = poly.eval(mid) - level;
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// All solutions of P(x) = level in [0,1] against a precomputed scan: grid
// zeros, sign-change brackets refined by bisection, and even-multiplicity
// roots where the curve touches the level without crossing. Single pass.
std::vector<double> roots_against_scan(const SolvingPolynomial& poly,
                                       const std::vector<double>& scan, double level,
                                       const RootSearchOptions& opts) {
    const int steps = static_cast<int>(scan.size()) - 1;
    std::vector<double> roots;
    auto x_at = [steps](int i) { return static_cast<double>(i) / steps; };

    double prev = 0.0;
    double cur = scan[0] - level;
    if (cur == 0.0) roots.push_back(0.0);
    for (int i = 0; i < steps; ++i) {
        const double next = scan[static_cast<std::size_t>(i) + 1] - level;
        if (next == 0.0)
            roots.push_back(x_at(i + 1));
        else if (cur != 0.0 && (cur < 0.0) != (next < 0.0))
            roots.push_back(bisect(poly, level, x_at(i), x_at(i + 1), cur, opts.bisection_width));
        if (i >= 1 && cur != 0.0 && std::abs(cur) < opts.even_root_tol &&
            std::abs(cur) <= std::abs(prev) && std::abs(cur) <= std::abs(next) &&
            (prev < 0.0) == (cur < 0.0) && (cur < 0.0) == (next < 0.0))
            roots.push_back(x_at(i));
        prev = cur;
        cur = next;
    }

    std::sort(roots.begin(), roots.end());
    return roots;
}

int scan_steps(const RootSearchOptions& opts) {
    if (!(opts.grid_resolution > 0.0) || opts.grid_resolution > 0.5)
        throw std::invalid_argument("grid resolution must be in (0, 0.5]");
    return static_cast<int>(std::lround(1.0 / opts.grid_resolution));
}

} // namespace

SolvingPolynomial build_polynomial(const SigmaVector& sigmas) {
    const int n = sigmas.depth;
    if (n < 1) throw std::invalid_argument("sigma vector must have depth >= 1");
    if (static_cast<int>(sigmas.values.size()) != n)
        throw std::invalid_argument("sigma vector length does not match its depth");
    SolvingPolynomial poly;
    poly.coeffs.assign(static_cast<std::size_t>(n) + 1, 0.0);
    poly.coeffs[static_cast<std::size_t>(n)] = 1.0;
    for (int k = 1; k <= n; ++k) {
        const double v = sigmas.values[k - 1];
        poly.coeffs[static_cast<std::size_t>(n - k)] = (k % 2 == 0) ? v : -v;
    }
    return poly;
}

std::vector<double> real_roots_in_unit_interval(const SolvingPolynomial& poly, double level,
                                                const RootSearchOptions& opts) {
    if (!(std::abs(level) <= 0.1))
        throw std::invalid_argument("level magnitude above 0.1 is outside the supported range");
    if (poly.degree() < 1) throw std::invalid_argument("polynomial degree must be >= 1");
    const auto scan = scan_values(poly, scan_steps(opts));
    return roots_against_scan(poly, scan, level, opts);
}

RootAreas extract_root_areas(const SolvingPolynomial& poly, double epsilon_limit,
                             const SweepOptions& opts) {
    if (!(epsilon_limit > 0.0)) throw std::invalid_argument("epsilon limit must be positive");
    const int points = opts.epsilon_grid_points;
    if (points < 3 || points % 2 == 0)
        throw std::invalid_argument("epsilon grid needs an odd number of points >= 3");
    const int n = poly.degree();
    if (n < 1) throw std::invalid_argument("polynomial degree must be >= 1");

    const int center = points / 2;
    // eps_j = (j - center) * (limit / center): symmetric, exact zero at center
    const double step = epsilon_limit / center;
    auto eps_at = [&](int j) { return static_cast<double>(j - center) * step; };

    const auto scan = scan_values(poly, scan_steps(opts.root_search));
    std::vector<std::vector<double>> slots(static_cast<std::size_t>(points));

#if defined(_OPENMP)
    if (opts.exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int j = 0; j < points; ++j)
            slots[static_cast<std::size_t>(j)] =
                roots_against_scan(poly, scan, eps_at(j), opts.root_search);
    } else
#endif
    {
        for (int j = 0; j < points; ++j)
            slots[static_cast<std::size_t>(j)] =
                roots_against_scan(poly, scan, eps_at(j), opts.root_search);
    }

    std::vector<int> full;
    for (int j = 0; j < points; ++j)
        if (static_cast<int>(slots[static_cast<std::size_t>(j)].size()) == n) full.push_back(j);
    if (full.empty()) throw NoFullSolutionBand(n);

    std::vector<double> sols;
    for (int j : full)
        sols.insert(sols.end(), slots[static_cast<std::size_t>(j)].begin(),
                    slots[static_cast<std::size_t>(j)].end());
    std::sort(sols.begin(), sols.end());

    // split the accumulated solutions at the n-1 largest gaps
    std::vector<std::size_t> order(sols.size() > 1 ? sols.size() - 1 : 0);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ga = sols[a + 1] - sols[a];
        const double gb = sols[b + 1] - sols[b];
        if (ga != gb) return ga > gb;
        return a < b; // deterministic tie-break
    });
    std::vector<std::size_t> cuts(order.begin(),
                                  order.begin() + std::min<std::size_t>(order.size(), n - 1));
    std::sort(cuts.begin(), cuts.end());

    RootAreas out;
    std::size_t start = 0;
    for (std::size_t c : cuts) {
        out.areas.push_back({sols[start], sols[c]});
        start = c + 1;
    }
    out.areas.push_back({sols[start], sols.back()});
    for (const auto& a : out.areas) out.midpoints.push_back(a.midpoint());

    // realized band: the maximal contiguous run of full-solution grid points
    // nearest to (ideally containing) epsilon = 0
    struct Run {
        int lo, hi;
    };
    std::vector<Run> runs;
    for (std::size_t i = 0; i < full.size();) {
        std::size_t j = i;
        while (j + 1 < full.size() && full[j + 1] == full[j] + 1) ++j;
        runs.push_back({full[i], full[j]});
        i = j + 1;
    }
    auto dist = [&](const Run& r) {
        if (r.lo <= center && center <= r.hi) return 0;
        return std::min(std::abs(r.lo - center), std::abs(r.hi - center));
    };
    const Run best = *std::min_element(runs.begin(), runs.end(), [&](const Run& a, const Run& b) {
        if (dist(a) != dist(b)) return dist(a) < dist(b);
        return a.lo < b.lo;
    });
    out.epsilon_min = eps_at(best.lo);
    out.epsilon_max = eps_at(best.hi);
    out.band_contiguous = runs.size() == 1;
    out.band_contains_zero = best.lo <= center && center <= best.hi;
    return out;
}

RateEstimate estimate_rates(const MarkDistribution& dist, double epsilon_limit,
                            const SweepOptions& opts) {
    const MarkProbabilities probs = probabilities_from_distribution(dist);
    if (probs.depth == 0) throw NoCongestionObserved();
    SigmaEstimate sig = sigmas_from_probabilities(probs);
    const SolvingPolynomial poly = build_polynomial(sig.sigma);

    RateEstimate out;
    out.areas = extract_root_areas(poly, epsilon_limit, opts);
    out.rates = MarkingRates(out.areas.midpoints); // midpoints are ascending by construction
    out.diagnostics.sigma = std::move(sig);
    out.diagnostics.roots_at_zero = roots_against_scan(
        poly, scan_values(poly, scan_steps(opts.root_search)), 0.0, opts.root_search);
    return out;
}

} // namespace ecnstar
