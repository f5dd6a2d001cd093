#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ecnstar/errors.hpp"
#include "ecnstar/path_sim.hpp"

namespace ecnstar {

namespace {

using nlohmann::json;

void expect_keys(const json& obj, std::initializer_list<const char*> allowed,
                 const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw ScenarioError("unknown key \"" + key + "\" in " + where);
    }
}

template <typename T>
T require(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw ScenarioError("missing key \"" + std::string(key) + "\" in " + where);
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ScenarioError("key \"" + std::string(key) + "\" in " + where + " has the wrong type");
    }
}

template <typename T>
void maybe(const json& obj, const char* key, const std::string& where, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ScenarioError("key \"" + std::string(key) + "\" in " + where + " has the wrong type");
    }
}

std::size_t line_of_offset(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

} // namespace

PathScenario parse_scenario(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scenario JSON: ") + e.what(),
                         line_of_offset(json_text, e.byte));
    }
    if (!root.is_object()) throw ScenarioError("scenario root must be a JSON object");
    expect_keys(root, {"routers", "flows", "packet_budget", "seed", "warmup"}, "scenario");

    PathScenario sc;
    sc.packet_budget = require<std::uint64_t>(root, "packet_budget", "scenario");
    sc.seed = require<std::uint64_t>(root, "seed", "scenario");
    if (root.contains("warmup")) sc.warmup = require<std::uint64_t>(root, "warmup", "scenario");

    if (!root.contains("routers") || !root.at("routers").is_array())
        throw ScenarioError("scenario needs a \"routers\" array");
    for (const auto& rj : root.at("routers")) {
        const std::string where = "router";
        const std::string type = require<std::string>(rj, "type", where);
        RouterModel r;
        r.name = require<std::string>(rj, "name", where);
        if (type == "bernoulli") {
            expect_keys(rj, {"name", "type", "rate"}, "router \"" + r.name + "\"");
            BernoulliMarkerModel b;
            b.rate = require<double>(rj, "rate", where);
            r.model = b;
        } else if (type == "red") {
            expect_keys(rj,
                        {"name", "type", "min_th", "max_th", "max_p", "capacity", "ewma_weight",
                         "service_rate"},
                        "router \"" + r.name + "\"");
            RedQueueModel q;
            maybe(rj, "min_th", where, q.min_th);
            maybe(rj, "max_th", where, q.max_th);
            maybe(rj, "max_p", where, q.max_p);
            maybe(rj, "capacity", where, q.capacity);
            maybe(rj, "ewma_weight", where, q.ewma_weight);
            maybe(rj, "service_rate", where, q.service_rate);
            r.model = q;
        } else {
            throw ScenarioError("router \"" + r.name + "\": unknown type \"" + type + "\"");
        }
        sc.routers.push_back(std::move(r));
    }

    if (!root.contains("flows") || !root.at("flows").is_array())
        throw ScenarioError("scenario needs a \"flows\" array");
    for (const auto& fj : root.at("flows")) {
        FlowSpec f;
        f.name = require<std::string>(fj, "name", "flow");
        expect_keys(fj, {"name", "route", "offered_load", "window", "measured"},
                    "flow \"" + f.name + "\"");
        f.route = require<std::vector<std::string>>(fj, "route", "flow \"" + f.name + "\"");
        if (fj.contains("offered_load"))
            f.offered_load = require<double>(fj, "offered_load", "flow \"" + f.name + "\"");
        if (fj.contains("window"))
            f.window = require<std::uint32_t>(fj, "window", "flow \"" + f.name + "\"");
        maybe(fj, "measured", "flow \"" + f.name + "\"", f.measured);
        sc.flows.push_back(std::move(f));
    }

    sc.validate();
    return sc;
}

PathScenario load_scenario(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open scenario file " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failed for " + file.string());
    return parse_scenario(buf.str());
}

} // namespace ecnstar
