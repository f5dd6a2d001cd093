// Command-line front end: run scenarios, estimate rates from histograms,
// emit convergence traces.
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ecnstar/convergence.hpp"
#include "ecnstar/csv.hpp"
#include "ecnstar/errors.hpp"
#include "ecnstar/path_sim.hpp"
#include "ecnstar/poly_solver.hpp"
#include "ecnstar/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitIo = 3;
constexpr int kExitEstimation = 4;

using namespace ecnstar;

void print_estimate_text(std::ostream& out, const RateEstimate& est) {
    out << std::setprecision(10);
    const auto& sig = est.diagnostics.sigma.sigma;
    out << "sigma:";
    for (double v : sig.values) out << ' ' << v;
    out << '\n';
    const SolvingPolynomial poly = build_polynomial(sig);
    out << "polynomial coefficients (ascending powers):";
    for (double c : poly.coeffs) out << ' ' << c;
    out << '\n';
    out << "epsilon band: [" << est.areas.epsilon_min << ", " << est.areas.epsilon_max << "]";
    if (!est.areas.band_contains_zero) out << " (does not contain 0)";
    if (!est.areas.band_contiguous) out << " (non-contiguous full-solution set)";
    out << '\n';
    if (!est.diagnostics.sigma.validity.ok) {
        out << "sigma bounds violated:";
        for (const auto& v : est.diagnostics.sigma.validity.violations)
            out << " sigma_" << v.k << "=" << v.value;
        out << '\n';
    }
    out << "root areas and midpoint rates:\n";
    for (std::size_t i = 0; i < est.areas.areas.size(); ++i)
        out << "  [" << est.areas.areas[i].lo << ", " << est.areas.areas[i].hi
            << "]  midpoint " << est.areas.midpoints[i] << '\n';
    out << "rates:";
    for (double r : est.rates.values) out << ' ' << r;
    out << '\n';
    if (!est.diagnostics.roots_at_zero.empty()) {
        out << "unperturbed roots (epsilon = 0):";
        for (double r : est.diagnostics.roots_at_zero) out << ' ' << r;
        out << '\n';
    }
}

void print_estimate_csv(std::ostream& out, const RateEstimate& est) {
    out << std::setprecision(17);
    out << "quantity,index,value\n";
    const auto& sig = est.diagnostics.sigma.sigma;
    for (std::size_t i = 0; i < sig.values.size(); ++i)
        out << "sigma," << i + 1 << ',' << sig.values[i] << '\n';
    const SolvingPolynomial poly = build_polynomial(sig);
    for (std::size_t i = 0; i < poly.coeffs.size(); ++i)
        out << "coeff," << i << ',' << poly.coeffs[i] << '\n';
    for (std::size_t i = 0; i < est.areas.areas.size(); ++i) {
        out << "area_lo," << i + 1 << ',' << est.areas.areas[i].lo << '\n';
        out << "area_hi," << i + 1 << ',' << est.areas.areas[i].hi << '\n';
    }
    for (std::size_t i = 0; i < est.rates.values.size(); ++i)
        out << "rate," << i + 1 << ',' << est.rates.values[i] << '\n';
    out << "epsilon_min,," << est.areas.epsilon_min << '\n';
    out << "epsilon_max,," << est.areas.epsilon_max << '\n';
    out << "band_contains_zero,," << (est.areas.band_contains_zero ? 1 : 0) << '\n';
}

int cmd_simulate(const std::string& scenario_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed, double epsilon_limit) {
    PathScenario scenario = load_scenario(scenario_path);
    if (seed) scenario.seed = *seed;
    const SimOutput output = simulate_red_path(scenario);
    export_distribution(output, out_dir);

    RunReport report = build_run_report(scenario, output, epsilon_limit);
    report.scenario_name = scenario_path;
    const std::string text = render_report(report);

    const std::filesystem::path report_path = std::filesystem::path(out_dir) / "report.txt";
    std::ofstream rf(report_path);
    if (!rf) throw IoError("cannot write " + report_path.string());
    rf << text;
    if (!rf.flush()) throw IoError("write failed for " + report_path.string());
    std::cout << text;
    return kExitOk;
}

int cmd_estimate(const std::string& histogram_path, double epsilon_limit,
                 const std::string& format) {
    const MarkDistribution dist = read_histogram_file(histogram_path);
    if (dist.inferred_depth() == 0) {
        std::cout << "no congestion observed: every packet has a zero mark count\n";
        return kExitOk;
    }
    const RateEstimate est = estimate_rates(dist, epsilon_limit);
    if (format == "csv")
        print_estimate_csv(std::cout, est);
    else
        print_estimate_text(std::cout, est);
    return kExitOk;
}

int cmd_converge(const std::string& input_path, std::uint64_t stride, double epsilon_limit,
                 std::optional<std::uint64_t> seed, const std::string& out_path) {
    std::vector<std::uint32_t> counts;
    if (std::filesystem::path(input_path).extension() == ".json") {
        PathScenario scenario = load_scenario(input_path);
        if (seed) scenario.seed = *seed;
        const FlowSpec* measured = nullptr;
        for (const auto& f : scenario.flows)
            if (f.measured && !measured) measured = &f;
        if (!measured) throw ScenarioError("no measured flow"); // validate() already enforces this
        bool all_bernoulli = true;
        std::vector<double> rates;
        for (const auto& hop : measured->route)
            for (const auto& r : scenario.routers)
                if (r.name == hop) {
                    if (const auto* b = std::get_if<BernoulliMarkerModel>(&r.model))
                        rates.push_back(b->rate);
                    else
                        all_bernoulli = false;
                }
        if (all_bernoulli) {
            counts = bernoulli_count_stream(MarkingRates(rates), scenario.packet_budget,
                                            scenario.seed);
        } else {
            const SimOutput output = simulate_red_path(scenario);
            counts = output.flow(measured->name).delivery_counts;
        }
    } else {
        const MarkDistribution dist = read_histogram_file(input_path);
        counts = deterministic_stream_from_distribution(dist, dist.total);
    }

    const ConvergenceTrace trace = stream_estimate(counts, stride, epsilon_limit);
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot write " + out_path);
    write_trace_csv(trace, out);
    if (!out.flush()) throw IoError("write failed for " + out_path);

    const ThresholdReport report = detect_thresholds(trace);
    std::cout << "packets streamed: " << counts.size() << " (stride " << trace.stride << ")\n";
    std::cout << "path depth: " << trace.final_depth << '\n';
    if (report.sigma_stable_at)
        std::cout << "sigma stable at: " << *report.sigma_stable_at << " packets\n";
    else
        std::cout << "sigma stable at: not reached\n";
    if (report.solvable_at)
        std::cout << "solvable at: " << *report.solvable_at << " packets\n";
    else
        std::cout << "solvable at: not reached\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"congestion estimation from counter-based ECN marking"};
    app.require_subcommand(1);

    std::string scenario_path, histogram_path, converge_input;
    std::string out_dir, out_path = "trace.csv", format = "text";
    std::optional<std::uint64_t> seed;
    double epsilon_limit = 1e-3;
    std::uint64_t stride = 50;

    auto* sim = app.add_subcommand("simulate", "run a scenario and export histograms and series");
    sim->add_option("scenario", scenario_path, "scenario JSON file")->required();
    sim->add_option("--out", out_dir, "output directory")->required();
    sim->add_option("--seed", seed, "override the scenario seed");
    sim->add_option("--epsilon-limit", epsilon_limit, "sweep half-width for the report");

    auto* est = app.add_subcommand("estimate", "estimate per-router rates from a histogram CSV");
    est->add_option("histogram", histogram_path, "histogram CSV file")->required();
    est->add_option("--epsilon-limit", epsilon_limit, "sweep half-width");
    est->add_option("--format", format, "text or csv")->check(CLI::IsMember({"text", "csv"}));

    auto* conv = app.add_subcommand("converge", "stream a scenario or histogram and emit a trace");
    conv->add_option("input", converge_input, "scenario JSON or histogram CSV")->required();
    conv->add_option("--stride", stride, "packets between checkpoints");
    conv->add_option("--epsilon-limit", epsilon_limit, "sweep half-width");
    conv->add_option("--seed", seed, "override the scenario seed");
    conv->add_option("--out", out_path, "trace CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (sim->parsed()) return cmd_simulate(scenario_path, out_dir, seed, epsilon_limit);
        if (est->parsed()) return cmd_estimate(histogram_path, epsilon_limit, format);
        if (conv->parsed()) {
            if (stride < 1) {
                std::cerr << "error: stride must be at least 1\n";
                return kExitInput;
            }
            return cmd_converge(converge_input, stride, epsilon_limit, seed, out_path);
        }
    } catch (const ecnstar::NoCongestionObserved&) {
        std::cout << "no congestion observed: every packet has a zero mark count\n";
        return kExitOk;
    } catch (const ecnstar::NoFullSolutionBand& e) {
        std::cerr << "estimation failed: " << e.what() << '\n';
        return kExitEstimation;
    } catch (const ecnstar::ParseError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const ecnstar::ScenarioError& e) {
        std::cerr << "scenario error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const ecnstar::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kExitIo;
    }
    return kExitOk;
}
