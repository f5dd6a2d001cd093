#pragma once

#include <vector>

#include "ecnstar/exec.hpp"
#include "ecnstar/mark_model.hpp"

namespace ecnstar {

/// Monic polynomial whose roots are the marking rates:
/// coeffs[m] = a_m (ascending powers), a_{n-k} = (-1)^k sigma_k, a_n = 1.
struct SolvingPolynomial {
    std::vector<double> coeffs;

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }

    double eval(double x) const {
        double v = 0.0;
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * x + *it;
        return v;
    }
};

SolvingPolynomial build_polynomial(const SigmaVector& sigmas);

struct RootSearchOptions {
    double grid_resolution = 1e-4; // x-scan step over [0,1]
    double even_root_tol = 1e-12;  // |P - level| threshold for tangent (even) roots
    double bisection_width = 1e-10;
};

/// All real solutions of P(x) = level in [0,1], located by sign-change
/// bracketing on a uniform grid plus bisection; tangent roots are caught by a
/// local-minimum check. May return fewer than degree() solutions. |level| <= 0.1.
std::vector<double> real_roots_in_unit_interval(const SolvingPolynomial& poly, double level,
                                                const RootSearchOptions& opts = {});

struct RootInterval {
    double lo = 0.0;
    double hi = 0.0;
    double midpoint() const { return 0.5 * (lo + hi); }
};

/// Solution intervals accumulated over the epsilon sweep, one per root.
struct RootAreas {
    std::vector<RootInterval> areas; // ascending, interiors disjoint
    std::vector<double> midpoints;   // midpoint of each area
    double epsilon_min = 0.0;        // realized band (grid values, run nearest 0)
    double epsilon_max = 0.0;
    bool band_contiguous = true;     // full-solution grid points form a single run
    bool band_contains_zero = false; // the run includes epsilon = 0
};

struct SweepOptions {
    int epsilon_grid_points = 201; // odd, so epsilon = 0 is always attempted
    RootSearchOptions root_search{};
    Exec exec = Exec::Parallel;
};

/// Solves P(x) = eps for every eps on a symmetric grid over
/// [-epsilon_limit, +epsilon_limit]; accumulates the solutions of every eps
/// that yields exactly degree() of them and clusters the accumulated set into
/// degree() intervals by splitting at the largest gaps.
/// Throws NoFullSolutionBand when no grid point yields a full solution set.
RootAreas extract_root_areas(const SolvingPolynomial& poly, double epsilon_limit,
                             const SweepOptions& opts = {});

struct EstimationDiagnostics {
    SigmaEstimate sigma;               // sigma values + feasibility report
    std::vector<double> roots_at_zero; // unperturbed roots, for comparison
};

struct RateEstimate {
    MarkingRates rates; // area midpoints, ascending
    RootAreas areas;
    EstimationDiagnostics diagnostics;
};

/// Full pipeline: distribution -> probabilities -> sigmas -> polynomial ->
/// root areas. Rates are the area midpoints (the method recovers the sorted
/// multiset of rates; it cannot attribute a rate to a specific router).
RateEstimate estimate_rates(const MarkDistribution& dist, double epsilon_limit = 1e-3,
                            const SweepOptions& opts = {});

} // namespace ecnstar
