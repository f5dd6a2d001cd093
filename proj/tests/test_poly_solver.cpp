#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ecnstar/errors.hpp"
#include "ecnstar/poly_solver.hpp"
#include "test_util.hpp"

using namespace ecnstar;

namespace {

const MarkDistribution kFlow1 = MarkDistribution::from_counts({9046, 21320, 15670, 3690, 274});
const MarkDistribution kFlow2 = MarkDistribution::from_counts({3988, 17369, 19774, 7895, 974});

SolvingPolynomial flow1_polynomial() {
    return build_polynomial(sigmas_from_probabilities(probabilities_from_distribution(kFlow1)).sigma);
}

bool overlaps(const RootInterval& a, double lo, double hi) { return a.lo <= hi && lo <= a.hi; }

} // namespace

TEST_CASE("build_polynomial: published coefficients") {
    const auto est = sigmas_from_probabilities(probabilities_from_distribution(kFlow1));
    const auto poly = build_polynomial(est.sigma);
    REQUIRE(poly.degree() == 4);
    CHECK(poly.coeffs[4] == 1.0);
    CHECK(poly.coeffs[3] == doctest::Approx(-1.29652).epsilon(1e-12));
    CHECK(poly.coeffs[2] == doctest::Approx(0.56768).epsilon(1e-12));
    CHECK(poly.coeffs[1] == doctest::Approx(-0.09572).epsilon(1e-12));
    CHECK(poly.coeffs[0] == doctest::Approx(0.00548).epsilon(1e-12));
}

TEST_CASE("build_polynomial: degree one and exact quadratic") {
    const auto line = build_polynomial(SigmaVector{1, {0.3}});
    CHECK(line.coeffs == std::vector<double>{-0.3, 1.0});

    // sigma of rates (0.2, 0.5): expand (x - 0.2)(x - 0.5) = x^2 - 0.7x + 0.1
    const auto quad = build_polynomial(sigmas_from_rates(MarkingRates({0.2, 0.5})));
    REQUIRE(quad.degree() == 2);
    CHECK(quad.coeffs[2] == 1.0);
    CHECK(quad.coeffs[1] == doctest::Approx(-0.7).epsilon(1e-15));
    CHECK(quad.coeffs[0] == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(quad.eval(0.2) == doctest::Approx(0.0).scale(1).epsilon(1e-15));
    CHECK(quad.eval(0.5) == doctest::Approx(0.0).scale(1).epsilon(1e-15));
}

TEST_CASE("real_roots_in_unit_interval: factored quadratic at level 0") {
    const auto quad = build_polynomial(sigmas_from_rates(MarkingRates({0.2, 0.5})));
    const auto roots = real_roots_in_unit_interval(quad, 0.0);
    REQUIRE(roots.size() == 2);
    CHECK(roots[0] == doctest::Approx(0.2).epsilon(1e-9));
    CHECK(roots[1] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("real_roots_in_unit_interval: linear polynomial at a shifted level") {
    const auto line = build_polynomial(SigmaVector{1, {0.3}});
    const auto roots = real_roots_in_unit_interval(line, 0.01);
    REQUIRE(roots.size() == 1);
    CHECK(roots[0] == doctest::Approx(0.31).epsilon(1e-9));
}

TEST_CASE("real_roots_in_unit_interval: published flow polynomial at level 0") {
    // The fixture ratios produce a quartic whose two inner roots are complex:
    // only the near-degenerate outer pair is real. Frozen from exact-arithmetic
    // analysis (inner local minimum +2.46e-5 at x = 0.1477).
    const auto roots = real_roots_in_unit_interval(flow1_polynomial(), 0.0);
    REQUIRE(roots.size() == 2);
    CHECK(roots[0] == doctest::Approx(0.4869522).epsilon(1e-6));
    CHECK(roots[1] == doctest::Approx(0.5153611).epsilon(1e-6));
}

TEST_CASE("real_roots_in_unit_interval: level bound and endpoint roots") {
    const auto line = build_polynomial(SigmaVector{1, {0.3}});
    CHECK_THROWS_AS(real_roots_in_unit_interval(line, 0.2), std::invalid_argument);

    // roots exactly on the grid endpoints
    const auto edge = build_polynomial(sigmas_from_rates(MarkingRates({0.0, 1.0})));
    const auto roots = real_roots_in_unit_interval(edge, 0.0);
    REQUIRE(roots.size() == 2);
    CHECK(roots[0] == 0.0);
    CHECK(roots[1] == 1.0);
}

TEST_CASE("extract_root_areas: noise-free round trip at tight epsilon") {
    const auto poly = build_polynomial(sigmas_from_rates(MarkingRates({0.2, 0.5})));
    const auto areas = extract_root_areas(poly, 1e-6);
    REQUIRE(areas.midpoints.size() == 2);
    CHECK(areas.midpoints[0] == doctest::Approx(0.2).epsilon(1e-4));
    CHECK(areas.midpoints[1] == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(areas.band_contains_zero);
    CHECK(areas.band_contiguous);
    CHECK(areas.epsilon_min == doctest::Approx(-1e-6));
    CHECK(areas.epsilon_max == doctest::Approx(1e-6));
}

TEST_CASE("extract_root_areas: flow #1 fixture") {
    const auto areas = extract_root_areas(flow1_polynomial(), 1e-3);
    REQUIRE(areas.areas.size() == 4);
    // every area overlaps the published interval
    CHECK(overlaps(areas.areas[0], 0.075, 0.14));
    CHECK(overlaps(areas.areas[1], 0.14, 0.28));
    CHECK(overlaps(areas.areas[2], 0.34, 0.50));
    CHECK(overlaps(areas.areas[3], 0.52, 0.57));
    // frozen midpoints (cross-checked against an independent implementation)
    CHECK(areas.midpoints[0] == doctest::Approx(0.108083).epsilon(1e-4));
    CHECK(areas.midpoints[1] == doctest::Approx(0.235868).epsilon(1e-4));
    CHECK(areas.midpoints[2] == doctest::Approx(0.404024).epsilon(1e-4));
    CHECK(areas.midpoints[3] == doctest::Approx(0.548545).epsilon(1e-4));
    // the rounded ratios leave no real inner pair at eps = 0, so the realized
    // band sits strictly on the positive side
    CHECK_FALSE(areas.band_contains_zero);
    CHECK(areas.band_contiguous);
    CHECK(areas.epsilon_min == doctest::Approx(3e-5));
    CHECK(areas.epsilon_max == doctest::Approx(9.8e-4));
}

TEST_CASE("extract_root_areas: flow #2 fixture reproduces the published rates") {
    const auto est = estimate_rates(kFlow2, 1e-3);
    REQUIRE(est.rates.values.size() == 4);
    CHECK(std::abs(est.rates.values[0] - 0.20) < 0.01);
    CHECK(std::abs(est.rates.values[1] - 0.31) < 0.01);
    CHECK(std::abs(est.rates.values[2] - 0.44) < 0.01);
    CHECK(std::abs(est.rates.values[3] - 0.74) < 0.01);
    // published flow #2 areas are overlapped as well
    CHECK(overlaps(est.areas.areas[0], 0.17, 0.23));
    CHECK(overlaps(est.areas.areas[1], 0.24, 0.38));
    CHECK(overlaps(est.areas.areas[2], 0.40, 0.49));
    CHECK(overlaps(est.areas.areas[3], 0.73, 0.74));
    CHECK(est.areas.band_contains_zero);
}

TEST_CASE("extract_root_areas: intervals are sorted and interior-disjoint") {
    const auto areas = extract_root_areas(flow1_polynomial(), 1e-3);
    for (std::size_t i = 0; i + 1 < areas.areas.size(); ++i) {
        CHECK(areas.areas[i].lo <= areas.areas[i].hi);
        CHECK(areas.areas[i].hi <= areas.areas[i + 1].lo);
    }
}

TEST_CASE("extract_root_areas: no band when the polynomial never yields n solutions") {
    // p = (0, 0.9): sigma = (1.8, 0.9), discriminant negative, min |P| = 0.09
    MarkProbabilities probs;
    probs.depth = 2;
    probs.p = {0.0, 0.9};
    probs.p0 = 0.1;
    const auto poly = build_polynomial(sigmas_from_probabilities(probs).sigma);
    CHECK_THROWS_AS(extract_root_areas(poly, 1e-3), NoFullSolutionBand);
}

TEST_CASE("extract_root_areas: repeated rate produces twin areas around the double root") {
    const auto poly = build_polynomial(sigmas_from_rates(MarkingRates({0.3, 0.3})));
    const auto areas = extract_root_areas(poly, 1e-3);
    REQUIRE(areas.midpoints.size() == 2);
    // only positive eps separates the double root into two solutions
    CHECK_FALSE(areas.band_contains_zero);
    CHECK(areas.epsilon_min > 0.0);
    CHECK(std::abs(areas.midpoints[0] - 0.3) < 0.02);
    CHECK(std::abs(areas.midpoints[1] - 0.3) < 0.02);
    CHECK(areas.midpoints[0] < 0.3);
    CHECK(areas.midpoints[1] > 0.3);
    // frozen values: 0.3 -+ (2/3) * sqrt(1e-3)
    CHECK(areas.midpoints[0] == doctest::Approx(0.28261).epsilon(1e-3));
    CHECK(areas.midpoints[1] == doctest::Approx(0.31739).epsilon(1e-3));
}

TEST_CASE("extract_root_areas is deterministic and policy-independent") {
    const auto poly = flow1_polynomial();
    const auto a = extract_root_areas(poly, 1e-3, {201, {}, Exec::Parallel});
    const auto b = extract_root_areas(poly, 1e-3, {201, {}, Exec::Parallel});
    const auto c = extract_root_areas(poly, 1e-3, {201, {}, Exec::Serial});
    REQUIRE(a.midpoints.size() == b.midpoints.size());
    REQUIRE(a.midpoints.size() == c.midpoints.size());
    for (std::size_t i = 0; i < a.midpoints.size(); ++i) {
        CHECK(a.midpoints[i] == b.midpoints[i]); // bitwise
        CHECK(a.midpoints[i] == c.midpoints[i]); // serial reference identical
        CHECK(a.areas[i].lo == c.areas[i].lo);
        CHECK(a.areas[i].hi == c.areas[i].hi);
    }
    CHECK(a.epsilon_min == c.epsilon_min);
    CHECK(a.epsilon_max == c.epsilon_max);
}

TEST_CASE("vieta round trip: exact sigmas recover well-separated rates") {
    testutil::RateGen gen(31337);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 1 + static_cast<int>(gen.rng.next() % 6);
        const auto rates = gen.separated(n, 0.05);
        const auto probs = forward_bruteforce(MarkingRates(rates));
        const auto sig = sigmas_from_probabilities(probs);
        const auto poly = build_polynomial(sig.sigma);
        const auto areas = extract_root_areas(poly, 1e-9);
        REQUIRE(static_cast<int>(areas.midpoints.size()) == n);
        for (int i = 0; i < n; ++i)
            REQUIRE(std::abs(areas.midpoints[static_cast<std::size_t>(i)] -
                             rates[static_cast<std::size_t>(i)]) < 1e-6);
    }
}

TEST_CASE("root count: polynomials from exact sigmas of distinct rates have n roots") {
    testutil::RateGen gen(4242);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 1 + static_cast<int>(gen.rng.next() % 6);
        const auto rates = gen.separated(n, 0.05);
        const auto poly = build_polynomial(sigmas_from_rates(MarkingRates(rates)));
        const auto roots = real_roots_in_unit_interval(poly, 0.0);
        REQUIRE(static_cast<int>(roots.size()) == n);
    }
}

TEST_CASE("estimate_rates: flow #1 fixture pipeline") {
    const auto est = estimate_rates(kFlow1, 1e-3);
    REQUIRE(est.rates.values.size() == 4);
    CHECK(est.rates.values == est.areas.midpoints);
    CHECK(est.diagnostics.sigma.sigma.values[0] == doctest::Approx(1.29652).epsilon(1e-12));
    CHECK(est.diagnostics.sigma.validity.ok);
    REQUIRE(est.diagnostics.roots_at_zero.size() == 2);
    CHECK(std::is_sorted(est.rates.values.begin(), est.rates.values.end()));
}

TEST_CASE("estimate_rates: single-router histogram is the plain ratio") {
    const auto est = estimate_rates(MarkDistribution::from_counts({70, 30}), 1e-3);
    REQUIRE(est.rates.values.size() == 1);
    CHECK(est.rates.values[0] == doctest::Approx(0.30).epsilon(1e-9));
}

TEST_CASE("estimate_rates: error paths") {
    CHECK_THROWS_AS(estimate_rates(MarkDistribution::from_counts({100}), 1e-3),
                    NoCongestionObserved);
    CHECK_THROWS_AS(estimate_rates(MarkDistribution{}, 1e-3), std::invalid_argument);
    MarkProbabilities probs;
    probs.depth = 2;
    probs.p = {0.0, 0.9};
    probs.p0 = 0.1;
    const auto dist = MarkDistribution::from_counts({10, 0, 90});
    CHECK_THROWS_AS(estimate_rates(dist, 1e-3), NoFullSolutionBand);
}

