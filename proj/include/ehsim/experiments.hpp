#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ehsim/qlearn.hpp"

namespace ehsim {

struct DayRecord {
    int day = 0;  // relative to the start of the run
    std::string node_id;
    std::string arm;
    double reward = 0;
    bool depleted = false;
    long samples_sent = 0;
    int trainings = 0;  // training sessions finished during this day
};

struct NodeSummary {
    std::string node_id;
    std::string arm;
    long trainings_performed = 0;
    int negative_reward_days = 0;
    double total_reward = 0;
    long total_samples = 0;
    int depletion_days = 0;
};

struct ExperimentReport {
    std::string experiment;
    std::uint64_t seed = 0;
    int days = 0;
    std::vector<DayRecord> per_day;
    std::vector<NodeSummary> nodes;
    // free-form extras rendered into the JSON report (cluster sizes, ...)
    std::vector<std::pair<std::string, std::string>> notes;
};

// A report plus any tables worth persisting (name -> table).
struct ExperimentOutput {
    ExperimentReport report;
    std::vector<std::pair<std::string, QTable>> tables;
};

// Nightly-retraining deployment over days [day_begin, day_end) of `trace`.
// Day 0 of the run holds performance state 1; every midnight the table is
// retrained on the finished day, warm-started from the previous table; later
// days run greedy on the latest table.
ExperimentOutput run_day_by_day(const LightTrace& trace, std::size_t day_begin, std::size_t day_end,
                                const QTable& initial, const HardwareConfig& hw,
                                const Hyperparameters& hp, const ConvergenceCriterion& crit,
                                std::uint64_t seed, int utc_offset_s = 0,
                                const std::string& arm = "daybyday");

ExperimentOutput run_day_by_day(const LightTrace& trace, const HardwareConfig& hw,
                                const Hyperparameters& hp, const ConvergenceCriterion& crit,
                                std::uint64_t seed, int utc_offset_s = 0);

struct DynamicIntervalOptions {
    int floor_slots = 4;        // 1 hour
    int cap_slots = 7 * kSlotsPerDay;
};

// Self-scheduled retraining: starts from an empty table with a 1-hour
// training interval; each session retrains on everything seen so far, then
// the interval doubles if the new table scores at least as well as the old
// one on that data (same evaluation stream) and halves otherwise.
ExperimentOutput run_dynamic_interval(const LightTrace& trace, const HardwareConfig& hw,
                                      const Hyperparameters& hp, const ConvergenceCriterion& crit,
                                      std::uint64_t seed, int utc_offset_s = 0,
                                      const DynamicIntervalOptions& opts = {});

struct FleetSpec {
    int per_base_count = 200;
    std::uint64_t seed = 0;
};

// Scaled/shifted variants of each base trace, per_base_count per base,
// deterministic in (bases, spec).
std::vector<LightTrace> build_fleet(const std::vector<LightTrace>& bases, const FleetSpec& spec);

struct ClusterAssignment {
    int k = 1;
    std::vector<int> cluster_of;       // fleet index -> cluster id (0 = dimmest)
    std::vector<double> centroids;     // mean of member first-week mean lux
    std::vector<int> sizes;
};

// Quantile split of the fleet by first-week mean lux into k equal groups
// (ties broken by node id, remainder going to the dimmest clusters).
ClusterAssignment cluster_fleet(const std::vector<LightTrace>& fleet, int k);

// Trains one table per cluster and one global table on the members' first
// week, then greedily evaluates both per base trace over the full horizon.
// The global table is literally the k=1 clustering of the same fleet, so a
// degenerate single-cluster assignment reproduces it exactly.
ExperimentOutput run_shared_policy(const std::vector<LightTrace>& fleet,
                                   const ClusterAssignment& assignment,
                                   const std::vector<LightTrace>& bases, const HardwareConfig& hw,
                                   const Hyperparameters& hp, const ConvergenceCriterion& crit,
                                   std::uint64_t seed, int utc_offset_s = 0);

// Pre-trains a general table on the pooled first week of all bases, then runs
// the nightly-retraining deployment on each base's remaining days twice: warm
// (starting from the general table) and cold (empty prior), same seeds.
ExperimentOutput run_transfer(const std::vector<LightTrace>& bases, const HardwareConfig& hw,
                              const Hyperparameters& hp, const ConvergenceCriterion& crit,
                              std::uint64_t seed, int utc_offset_s = 0);

}  // namespace ehsim
