#include "ehsim/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ehsim/timeutil.hpp"

namespace ehsim {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::uint64_t kTagTraceGen = 0x7A;
constexpr std::uint64_t kTagSuiteNode = 0x5E;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

void reject_unknown_keys(const ordered_json& obj, const std::string& path,
                         std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* k) { return key == k; }) == allowed.end()) {
            fail(join(path, key), "unknown field");
        }
    }
}

double get_number(const ordered_json& obj, const std::string& path, const char* key,
                  double fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) fail(join(path, key), "expected a number");
    return v.get<double>();
}

long get_integer(const ordered_json& obj, const std::string& path, const char* key, long fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) fail(join(path, key), "expected an integer");
    return v.get<long>();
}

std::string get_string(const ordered_json& obj, const std::string& path, const char* key,
                       const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_string()) fail(join(path, key), "expected a string");
    return v.get<std::string>();
}

void require_positive(double v, const std::string& path) {
    if (!(v > 0)) fail(path, "must be positive");
}

HardwareConfig parse_hardware(const ordered_json& obj, const std::string& path,
                              HardwareConfig hw) {
    reject_unknown_keys(obj, path,
                        {"capacitance_f", "v_max", "v_min", "v_restart", "v_initial", "divider_ohm",
                         "sleep_power_w", "event_energy_j", "harvest_w_per_lux"});
    hw.capacitance_f = get_number(obj, path, "capacitance_f", hw.capacitance_f);
    hw.v_max = get_number(obj, path, "v_max", hw.v_max);
    hw.v_min = get_number(obj, path, "v_min", hw.v_min);
    hw.v_restart = get_number(obj, path, "v_restart", hw.v_restart);
    hw.v_initial = get_number(obj, path, "v_initial", hw.v_initial);
    hw.divider_ohm = get_number(obj, path, "divider_ohm", hw.divider_ohm);
    hw.sleep_power_w = get_number(obj, path, "sleep_power_w", hw.sleep_power_w);
    hw.event_energy_j = get_number(obj, path, "event_energy_j", hw.event_energy_j);
    hw.harvest_w_per_lux = get_number(obj, path, "harvest_w_per_lux", hw.harvest_w_per_lux);
    try {
        hw.validate();
    } catch (const std::exception& e) {
        fail(path, e.what());
    }
    return hw;
}

Hyperparameters parse_hyper(const ordered_json& obj, const std::string& path, Hyperparameters hp) {
    reject_unknown_keys(obj, path, {"gamma", "alpha", "epsilon_max", "epsilon_min", "epsilon_decay"});
    hp.gamma = get_number(obj, path, "gamma", hp.gamma);
    hp.alpha = get_number(obj, path, "alpha", hp.alpha);
    hp.epsilon_max = get_number(obj, path, "epsilon_max", hp.epsilon_max);
    hp.epsilon_min = get_number(obj, path, "epsilon_min", hp.epsilon_min);
    hp.epsilon_decay = get_number(obj, path, "epsilon_decay", hp.epsilon_decay);
    if (!(hp.gamma >= 0 && hp.gamma < 1)) fail(join(path, "gamma"), "must be in [0, 1)");
    if (!(hp.alpha > 0 && hp.alpha <= 1)) fail(join(path, "alpha"), "must be in (0, 1]");
    if (!(hp.epsilon_min >= 0 && hp.epsilon_min <= hp.epsilon_max && hp.epsilon_max <= 1)) {
        fail(join(path, "epsilon_min"), "need 0 <= epsilon_min <= epsilon_max <= 1");
    }
    if (!(hp.epsilon_decay >= 0)) fail(join(path, "epsilon_decay"), "must be non-negative");
    return hp;
}

ConvergenceCriterion parse_convergence(const ordered_json& obj, const std::string& path,
                                       ConvergenceCriterion crit) {
    reject_unknown_keys(obj, path, {"window", "tolerance", "max_episodes"});
    crit.window = static_cast<int>(get_integer(obj, path, "window", crit.window));
    crit.tolerance = get_number(obj, path, "tolerance", crit.tolerance);
    crit.max_episodes = get_integer(obj, path, "max_episodes", crit.max_episodes);
    if (crit.window < 2) fail(join(path, "window"), "must be at least 2");
    require_positive(crit.tolerance, join(path, "tolerance"));
    if (crit.max_episodes < crit.window) fail(join(path, "max_episodes"), "must cover the window");
    return crit;
}

TraceSpec parse_trace(const ordered_json& obj, const std::string& path) {
    reject_unknown_keys(obj, path,
                        {"id", "csv", "archetype", "peak_lux", "sunrise_hour", "sunset_hour",
                         "work_start_hour", "work_end_hour", "occupancy", "base_lux", "band_lux"});
    TraceSpec spec;
    spec.id = get_string(obj, path, "id", "");
    spec.csv = get_string(obj, path, "csv", "");
    const std::string kind = get_string(obj, path, "archetype", "");
    if (spec.csv.empty() == kind.empty()) {
        fail(path, "need exactly one of \"csv\" or \"archetype\"");
    }
    if (!kind.empty()) {
        try {
            spec.archetype.kind = archetype_from_name(kind);
        } catch (const std::exception& e) {
            fail(join(path, "archetype"), e.what());
        }
        auto& a = spec.archetype;
        a.peak_lux = get_number(obj, path, "peak_lux", a.peak_lux);
        a.sunrise_hour = get_number(obj, path, "sunrise_hour", a.sunrise_hour);
        a.sunset_hour = get_number(obj, path, "sunset_hour", a.sunset_hour);
        a.work_start_hour = get_number(obj, path, "work_start_hour", a.work_start_hour);
        a.work_end_hour = get_number(obj, path, "work_end_hour", a.work_end_hour);
        a.occupancy = get_number(obj, path, "occupancy", a.occupancy);
        a.base_lux = get_number(obj, path, "base_lux", a.base_lux);
        a.band_lux = get_number(obj, path, "band_lux", a.band_lux);
        if (a.peak_lux < 0) fail(join(path, "peak_lux"), "must be non-negative");
        if (!(a.sunrise_hour >= 0 && a.sunrise_hour < a.sunset_hour && a.sunset_hour <= 24)) {
            fail(join(path, "sunrise_hour"), "need 0 <= sunrise < sunset <= 24");
        }
        if (!(a.work_start_hour >= 0 && a.work_start_hour < a.work_end_hour && a.work_end_hour <= 24)) {
            fail(join(path, "work_start_hour"), "need 0 <= start < end <= 24");
        }
        if (!(a.occupancy >= 0 && a.occupancy <= 1)) fail(join(path, "occupancy"), "must be in [0, 1]");
        if (a.base_lux < 0 && a.base_lux != -1) fail(join(path, "base_lux"), "must be non-negative (-1 = default)");
        if (a.band_lux < 0 && a.band_lux != -1) fail(join(path, "band_lux"), "must be non-negative (-1 = default)");
        if (spec.id.empty()) spec.id = archetype_name(a.kind);
    } else if (spec.id.empty()) {
        spec.id = std::filesystem::path(spec.csv).stem().string();
    }
    return spec;
}

DynamicIntervalOptions parse_dynamic(const ordered_json& obj, const std::string& path,
                                     DynamicIntervalOptions opts) {
    reject_unknown_keys(obj, path, {"floor_hours", "cap_hours"});
    const double floor_h = get_number(obj, path, "floor_hours", opts.floor_slots / 4.0);
    const double cap_h = get_number(obj, path, "cap_hours", opts.cap_slots / 4.0);
    const double floor_slots = floor_h * 4;
    const double cap_slots = cap_h * 4;
    if (floor_slots < 1 || floor_slots != std::floor(floor_slots)) {
        fail(join(path, "floor_hours"), "must be a positive multiple of 0.25");
    }
    if (cap_slots < floor_slots || cap_slots != std::floor(cap_slots)) {
        fail(join(path, "cap_hours"), "must be a multiple of 0.25, at least floor_hours");
    }
    opts.floor_slots = static_cast<int>(floor_slots);
    opts.cap_slots = static_cast<int>(cap_slots);
    return opts;
}

}  // namespace

RunConfig default_config() {
    RunConfig config;
    for (ArchetypeKind kind :
         {ArchetypeKind::Window, ArchetypeKind::Door, ArchetypeKind::MiddleOffice,
          ArchetypeKind::ConferenceRoom, ArchetypeKind::StairAccess}) {
        TraceSpec spec;
        spec.id = archetype_name(kind);
        spec.archetype.kind = kind;
        config.traces.push_back(std::move(spec));
    }
    return config;
}

RunConfig config_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown_keys(j, "",
                        {"seed", "days", "experiment", "output_dir", "start_date", "utc_offset_s",
                         "hardware", "hyperparameters", "convergence", "traces", "fleet", "dynamic"});

    RunConfig config = default_config();
    if (!j.contains("seed")) throw ConfigError("seed: required field is missing");
    if (!j.at("seed").is_number_integer() || j.at("seed").get<long long>() < 0) {
        fail("seed", "expected a non-negative integer");
    }
    config.seed = j.at("seed").get<std::uint64_t>();

    config.days = static_cast<int>(get_integer(j, "", "days", config.days));
    if (config.days < 1) fail("days", "must be at least 1");
    config.experiment = get_string(j, "", "experiment", config.experiment);
    static const std::set<std::string> kExperiments{"daybyday", "dynamic", "shared", "transfer",
                                                    "all"};
    if (!kExperiments.count(config.experiment)) {
        fail("experiment", "expected one of daybyday, dynamic, shared, transfer, all");
    }
    config.output_dir = get_string(j, "", "output_dir", config.output_dir);
    config.start_date = get_string(j, "", "start_date", config.start_date);
    try {
        parse_timestamp(config.start_date);
    } catch (const std::exception& e) {
        fail("start_date", e.what());
    }
    config.utc_offset_s = static_cast<int>(get_integer(j, "", "utc_offset_s", config.utc_offset_s));
    if (config.utc_offset_s <= -kDaySeconds || config.utc_offset_s >= kDaySeconds) {
        fail("utc_offset_s", "must be within one day of UTC");
    }

    if (j.contains("hardware")) {
        if (!j.at("hardware").is_object()) fail("hardware", "expected an object");
        config.hardware = parse_hardware(j.at("hardware"), "hardware", config.hardware);
    }
    if (j.contains("hyperparameters")) {
        if (!j.at("hyperparameters").is_object()) fail("hyperparameters", "expected an object");
        config.hyper = parse_hyper(j.at("hyperparameters"), "hyperparameters", config.hyper);
    }
    if (j.contains("convergence")) {
        if (!j.at("convergence").is_object()) fail("convergence", "expected an object");
        config.convergence = parse_convergence(j.at("convergence"), "convergence", config.convergence);
    }
    if (j.contains("traces")) {
        if (!j.at("traces").is_array() || j.at("traces").empty()) {
            fail("traces", "expected a non-empty array");
        }
        config.traces.clear();
        std::size_t i = 0;
        for (const auto& t : j.at("traces")) {
            const std::string path = "traces[" + std::to_string(i++) + "]";
            if (!t.is_object()) fail(path, "expected an object");
            config.traces.push_back(parse_trace(t, path));
        }
        std::set<std::string> ids;
        for (const TraceSpec& spec : config.traces) {
            if (!ids.insert(spec.id).second) fail("traces", "duplicate trace id " + spec.id);
        }
    }
    if (j.contains("fleet")) {
        if (!j.at("fleet").is_object()) fail("fleet", "expected an object");
        reject_unknown_keys(j.at("fleet"), "fleet", {"per_base_count", "clusters"});
        config.per_base_count =
            static_cast<int>(get_integer(j.at("fleet"), "fleet", "per_base_count", config.per_base_count));
        config.clusters = static_cast<int>(get_integer(j.at("fleet"), "fleet", "clusters", config.clusters));
        if (config.per_base_count < 1) fail("fleet.per_base_count", "must be at least 1");
        if (config.clusters < 1) fail("fleet.clusters", "must be at least 1");
    }
    if (j.contains("dynamic")) {
        if (!j.at("dynamic").is_object()) fail("dynamic", "expected an object");
        config.dynamic = parse_dynamic(j.at("dynamic"), "dynamic", config.dynamic);
    }
    return config;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return config_from_json(buf.str());
}

std::string config_to_json(const RunConfig& config) {
    ordered_json j;
    j["seed"] = config.seed;
    j["days"] = config.days;
    j["experiment"] = config.experiment;
    j["output_dir"] = config.output_dir;
    j["start_date"] = config.start_date;
    j["utc_offset_s"] = config.utc_offset_s;
    const HardwareConfig& hw = config.hardware;
    j["hardware"] = {{"capacitance_f", hw.capacitance_f},
                     {"v_max", hw.v_max},
                     {"v_min", hw.v_min},
                     {"v_restart", hw.v_restart},
                     {"v_initial", hw.v_initial},
                     {"divider_ohm", hw.divider_ohm},
                     {"sleep_power_w", hw.sleep_power_w},
                     {"event_energy_j", hw.event_energy_j},
                     {"harvest_w_per_lux", hw.harvest_w_per_lux}};
    const Hyperparameters& hp = config.hyper;
    j["hyperparameters"] = {{"gamma", hp.gamma},
                            {"alpha", hp.alpha},
                            {"epsilon_max", hp.epsilon_max},
                            {"epsilon_min", hp.epsilon_min},
                            {"epsilon_decay", hp.epsilon_decay}};
    j["convergence"] = {{"window", config.convergence.window},
                        {"tolerance", config.convergence.tolerance},
                        {"max_episodes", config.convergence.max_episodes}};
    ordered_json traces = ordered_json::array();
    for (const TraceSpec& spec : config.traces) {
        ordered_json t;
        t["id"] = spec.id;
        if (spec.from_csv()) {
            t["csv"] = spec.csv;
        } else {
            t["archetype"] = archetype_name(spec.archetype.kind);
            t["peak_lux"] = spec.archetype.peak_lux;
            t["sunrise_hour"] = spec.archetype.sunrise_hour;
            t["sunset_hour"] = spec.archetype.sunset_hour;
            t["work_start_hour"] = spec.archetype.work_start_hour;
            t["work_end_hour"] = spec.archetype.work_end_hour;
            t["occupancy"] = spec.archetype.occupancy;
            t["base_lux"] = spec.archetype.base_lux;
            t["band_lux"] = spec.archetype.band_lux;
        }
        traces.push_back(std::move(t));
    }
    j["traces"] = std::move(traces);
    j["fleet"] = {{"per_base_count", config.per_base_count}, {"clusters", config.clusters}};
    j["dynamic"] = {{"floor_hours", config.dynamic.floor_slots / 4.0},
                    {"cap_hours", config.dynamic.cap_slots / 4.0}};
    return j.dump(2) + "\n";
}

std::vector<LightTrace> materialize_traces(const RunConfig& config) {
    std::vector<LightTrace> traces;
    const std::int64_t start_ts = parse_timestamp(config.start_date);
    for (std::size_t i = 0; i < config.traces.size(); ++i) {
        const TraceSpec& spec = config.traces[i];
        if (spec.from_csv()) {
            LightTrace t = load_trace(spec.csv);
            t.node_id = spec.id;
            traces.push_back(std::move(t));
        } else {
            traces.push_back(generate_synthetic(spec.archetype, config.days,
                                                derive_seed(config.seed, kTagTraceGen, i), start_ts,
                                                spec.id));
        }
    }
    return traces;
}

ExperimentOutput run_experiment(const RunConfig& config, const std::vector<LightTrace>& bases) {
    if (bases.empty()) throw ConfigError("no input traces");
    for (const LightTrace& t : bases) {
        if (t.days() != bases.front().days()) {
            throw ConfigError("trace " + t.node_id + " does not match the common horizon");
        }
    }
    const std::size_t days = bases.front().days();

    ExperimentOutput merged;
    merged.report.experiment = config.experiment;
    merged.report.seed = config.seed;
    merged.report.days = static_cast<int>(days);

    auto absorb = [&merged](ExperimentOutput&& out) {
        for (auto& r : out.report.per_day) merged.report.per_day.push_back(std::move(r));
        for (auto& n : out.report.nodes) merged.report.nodes.push_back(std::move(n));
        for (auto& note : out.report.notes) merged.report.notes.push_back(std::move(note));
        for (auto& t : out.tables) merged.tables.push_back(std::move(t));
    };

    if (config.experiment == "daybyday") {
        for (std::size_t i = 0; i < bases.size(); ++i) {
            absorb(run_day_by_day(bases[i], 0, days, QTable{}, config.hardware, config.hyper,
                                  config.convergence, derive_seed(config.seed, kTagSuiteNode, i),
                                  config.utc_offset_s, "daybyday"));
        }
    } else if (config.experiment == "dynamic") {
        for (std::size_t i = 0; i < bases.size(); ++i) {
            absorb(run_dynamic_interval(bases[i], config.hardware, config.hyper, config.convergence,
                                        derive_seed(config.seed, kTagSuiteNode, i),
                                        config.utc_offset_s, config.dynamic));
        }
    } else if (config.experiment == "shared") {
        if (days < 7) throw ConfigError("shared policies need at least 7 days");
        FleetSpec spec;
        spec.per_base_count = config.per_base_count;
        spec.seed = config.seed;
        const std::vector<LightTrace> fleet = build_fleet(bases, spec);
        const ClusterAssignment assignment = cluster_fleet(fleet, config.clusters);
        absorb(run_shared_policy(fleet, assignment, bases, config.hardware, config.hyper,
                                 config.convergence, config.seed, config.utc_offset_s));
    } else if (config.experiment == "transfer") {
        if (days < 8) throw ConfigError("transfer needs at least 8 days");
        absorb(run_transfer(bases, config.hardware, config.hyper, config.convergence, config.seed,
                            config.utc_offset_s));
    } else {
        throw ConfigError("unknown experiment " + config.experiment);
    }
    return merged;
}

}  // namespace ehsim
