#include "ecnstar/report.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "ecnstar/errors.hpp"

namespace ecnstar {

RunReport build_run_report(const PathScenario& scenario, const SimOutput& output,
                           double epsilon_limit, const SweepOptions& opts) {
    RunReport report;
    report.seed = scenario.seed;
    report.ticks = output.ticks_run;

    for (const auto& r : output.routers) {
        RouterReport rr;
        rr.name = r.name;
        rr.mean_avg_queue = r.mean_avg_queue;
        rr.realized_fraction = r.realized_mark_fraction;
        rr.stable = r.stable;
        for (const auto& rm : scenario.routers) {
            if (rm.name != r.name) continue;
            if (const auto* red = std::get_if<RedQueueModel>(&rm.model)) {
                rr.is_red = true;
                rr.theoretical_rate = red_mark_probability(r.mean_avg_queue, *red);
            } else {
                rr.theoretical_rate = std::get<BernoulliMarkerModel>(rm.model).rate;
            }
        }
        report.routers.push_back(std::move(rr));
    }

    for (const auto& f : output.flows) {
        if (!f.measured) continue;
        FlowReport fr;
        fr.name = f.name;
        fr.packets = f.distribution.total;
        try {
            fr.estimate = estimate_rates(f.distribution, epsilon_limit, opts);
        } catch (const NoCongestionObserved&) {
            fr.failure = "no congestion observed";
        } catch (const NoFullSolutionBand& e) {
            fr.failure = e.what();
        }
        report.flows.push_back(std::move(fr));
    }

    // map each flow's sorted estimates onto its route's routers by the rank of
    // the theoretical rates (the pipeline recovers the sorted multiset only)
    for (const auto& fr : report.flows) {
        std::vector<RunReport::MappedRate> row;
        const FlowSpec* spec = nullptr;
        for (const auto& f : scenario.flows)
            if (f.name == fr.name) spec = &f;
        if (!spec) continue;
        std::vector<std::pair<double, std::string>> theo;
        for (const auto& hop : spec->route) {
            for (const auto& rr : report.routers)
                if (rr.name == hop) theo.emplace_back(rr.theoretical_rate, hop);
        }
        std::vector<std::size_t> rank(theo.size());
        for (std::size_t i = 0; i < rank.size(); ++i) rank[i] = i;
        std::stable_sort(rank.begin(), rank.end(),
                         [&](std::size_t a, std::size_t b) { return theo[a].first < theo[b].first; });
        for (std::size_t pos = 0; pos < rank.size(); ++pos) {
            RunReport::MappedRate m;
            m.router = theo[rank[pos]].second;
            m.theoretical = theo[rank[pos]].first;
            if (fr.estimate && pos < fr.estimate->rates.values.size())
                m.estimated = fr.estimate->rates.values[pos];
            row.push_back(std::move(m));
        }
        report.rate_table.push_back(std::move(row));
    }
    return report;
}

std::string render_report(const RunReport& report) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << "run: seed " << report.seed << ", " << report.ticks << " ticks\n\n";

    out << "routers (post-warmup):\n";
    out << "  name            avg_queue  theoretical  realized   stable\n";
    for (const auto& r : report.routers) {
        out << "  " << std::left << std::setw(14) << r.name << std::right << "  " << std::setw(9)
            << r.mean_avg_queue << "  " << std::setw(11) << r.theoretical_rate << "  " << std::setw(8)
            << r.realized_fraction << "   " << (r.stable ? "yes" : "NO") << '\n';
    }
    out << '\n';

    for (std::size_t fi = 0; fi < report.flows.size(); ++fi) {
        const auto& f = report.flows[fi];
        out << "flow " << f.name << " (" << f.packets << " packets)\n";
        if (!f.estimate) {
            out << "  estimation failed: " << f.failure << "\n\n";
            continue;
        }
        const auto& est = *f.estimate;
        out << "  sigma:";
        for (double s : est.diagnostics.sigma.sigma.values) out << ' ' << s;
        out << '\n';
        if (!est.diagnostics.sigma.validity.ok) {
            out << "  sigma bounds violated:";
            for (const auto& v : est.diagnostics.sigma.validity.violations)
                out << " sigma_" << v.k << "=" << v.value << " outside [" << v.lower << "," << v.upper
                    << "]";
            out << '\n';
        }
        out << "  epsilon band: [" << est.areas.epsilon_min << ", " << est.areas.epsilon_max << "]"
            << (est.areas.band_contains_zero ? "" : " (does not contain 0)")
            << (est.areas.band_contiguous ? "" : " (non-contiguous full-solution set)") << '\n';
        out << "  rates (area midpoints):\n";
        for (std::size_t i = 0; i < est.rates.values.size(); ++i)
            out << "    " << est.rates.values[i] << "  from [" << est.areas.areas[i].lo << ", "
                << est.areas.areas[i].hi << "]\n";
        if (fi < report.rate_table.size()) {
            out << "  route comparison (rate rank -> router):\n";
            for (const auto& m : report.rate_table[fi]) {
                out << "    " << std::left << std::setw(14) << m.router << std::right
                    << " theoretical " << m.theoretical << "  estimated ";
                if (m.estimated)
                    out << *m.estimated;
                else
                    out << "-";
                out << '\n';
            }
        }
        out << '\n';
    }

    // unified table: one row per router, one estimate column per measured flow
    out << "comparison table:\n";
    out << "  router          avg_queue  theoretical";
    for (const auto& f : report.flows) out << "  " << std::setw(10) << f.name;
    out << '\n';
    for (const auto& r : report.routers) {
        out << "  " << std::left << std::setw(14) << r.name << std::right << "  " << std::setw(9)
            << r.mean_avg_queue << "  " << std::setw(11) << r.theoretical_rate;
        for (std::size_t fi = 0; fi < report.flows.size(); ++fi) {
            std::string cell = "-";
            if (fi < report.rate_table.size()) {
                for (const auto& m : report.rate_table[fi]) {
                    if (m.router != r.name) continue;
                    if (m.estimated) {
                        std::ostringstream v;
                        v << std::fixed << std::setprecision(4) << *m.estimated;
                        cell = v.str();
                    }
                }
            }
            out << "  " << std::setw(10) << cell;
        }
        out << '\n';
    }
    return out.str();
}

} // namespace ecnstar
