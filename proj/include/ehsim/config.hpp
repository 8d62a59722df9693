#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ehsim/experiments.hpp"

namespace ehsim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One input trace: either a CSV file or a synthetic archetype.
struct TraceSpec {
    std::string id;
    std::string csv;  // nonempty = load from file, archetype ignored
    PlacementArchetype archetype;

    bool from_csv() const { return !csv.empty(); }
};

struct RunConfig {
    std::uint64_t seed = 0;
    int days = 90;
    std::string experiment = "daybyday";  // daybyday | dynamic | shared | transfer
    std::string output_dir = "out";
    std::string start_date = "2018-01-07";  // synthetic traces start here, 00:00 UTC (a Sunday)
    int utc_offset_s = 0;
    HardwareConfig hardware;
    Hyperparameters hyper;
    ConvergenceCriterion convergence;
    std::vector<TraceSpec> traces;
    int per_base_count = 200;  // fleet variants per base (shared policy)
    int clusters = 5;
    DynamicIntervalOptions dynamic;
};

// The five stock placements and the tuned restart threshold. A node that
// browned out stays down until storage recovers well past the minimum, so it
// comes back with usable headroom instead of flapping at the cutoff.
RunConfig default_config();

// Strict parse: unknown keys, wrong types, out-of-range values and a missing
// `seed` are all errors naming the offending field.
RunConfig config_from_json(const std::string& text);
RunConfig load_config(const std::string& path);

std::string config_to_json(const RunConfig& config);

// Generates or loads every configured trace, in order.
std::vector<LightTrace> materialize_traces(const RunConfig& config);

// Dispatches to the configured experiment over the given traces.
ExperimentOutput run_experiment(const RunConfig& config, const std::vector<LightTrace>& bases);

}  // namespace ehsim
