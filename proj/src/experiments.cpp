#include "ehsim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ehsim {

namespace {

// Stream tags: every rng in an experiment is seeded from the master seed plus
// a tag chain, so arms that must share randomness (paired evaluations, warm
// vs cold runs) do so by construction and everything else stays independent.
constexpr std::uint64_t kTagLiveDay = 0xD0;
constexpr std::uint64_t kTagNightTrain = 0xD7;
constexpr std::uint64_t kTagDynTrain = 0xE7;
constexpr std::uint64_t kTagDynEval = 0xE5;
constexpr std::uint64_t kTagFleetBase = 0xF1;
constexpr std::uint64_t kTagClusterTrain = 0x6C;
constexpr std::uint64_t kTagSharedEval = 0xEB;
constexpr std::uint64_t kTagGeneralTrain = 0x77;
constexpr std::uint64_t kTagTransferRun = 0x78;

ObservedState observe_slot(const NodeEnergyState& node, const SlotSeries& slots, std::size_t k,
                           const HardwareConfig& hw) {
    ObservedState s;
    s.light_level = discretize_light(slots.lux[k]);
    s.storage_level = discretize_voltage(node.voltage, hw);
    s.weekend = slots.weekend[k] != 0;
    return s;
}

struct SlotAgg {
    double reward = 0;
    long samples = 0;
    int depletions = 0;
};

// Live (non-learning) execution of slots [begin, end): greedy on `table`, or
// a fixed action when `table` is null.
SlotAgg run_live_slots(const QTable* table, int fixed_action, NodeEnergyState& node,
                       const SlotSeries& slots, std::size_t begin, std::size_t end,
                       const HardwareConfig& hw, Rng& rng) {
    SlotAgg agg;
    const std::size_t last = slots.lux.size() - 1;
    for (std::size_t k = begin; k < end; ++k) {
        const std::size_t next = std::min(k + 1, last);
        int action = node.performance_state;
        if (node.alive) {
            if (table) {
                const ObservedState s = observe_slot(node, slots, k, hw);
                action = select_action(*table, s, 0.0, rng);
            } else {
                action = fixed_action;
            }
        }
        const SlotOutcome out =
            env_step_core(node, action, slots.lux[k], slots.lux[next], slots.weekend[next] != 0, hw);
        agg.reward += out.reward;
        agg.samples += out.samples_sent;
        if (out.depleted) ++agg.depletions;
    }
    return agg;
}

NodeSummary summarize(const std::string& node_id, const std::string& arm,
                      const std::vector<DayRecord>& records) {
    NodeSummary s;
    s.node_id = node_id;
    s.arm = arm;
    for (const DayRecord& r : records) {
        if (r.node_id != node_id || r.arm != arm) continue;
        s.trainings_performed += r.trainings;
        if (r.reward < 0) ++s.negative_reward_days;
        s.total_reward += r.reward;
        s.total_samples += r.samples_sent;
        if (r.depleted) ++s.depletion_days;
    }
    return s;
}

void append_eval_days(ExperimentReport& report, const EvalResult& ev, const std::string& node_id,
                      const std::string& arm) {
    for (std::size_t d = 0; d < ev.day_rewards.size(); ++d) {
        DayRecord rec;
        rec.day = static_cast<int>(d);
        rec.node_id = node_id;
        rec.arm = arm;
        rec.reward = ev.day_rewards[d];
        rec.samples_sent = ev.day_samples[d];
        rec.depleted = ev.day_depleted[d] != 0;
        report.per_day.push_back(std::move(rec));
    }
}

// Day-episode chunks cycling through `members` before advancing the day, so
// a convergence window near the front still sees many different traces.
std::vector<EpisodeChunk> round_robin_chunks(const std::vector<const SlotSeries*>& series,
                                             const std::vector<const LightTrace*>& members,
                                             std::size_t num_days) {
    std::vector<EpisodeChunk> chunks;
    chunks.reserve(num_days * members.size());
    for (std::size_t d = 0; d < num_days; ++d) {
        for (std::size_t m = 0; m < members.size(); ++m) {
            chunks.push_back(
                {series[m], d * kSlotsPerDay, (d + 1) * kSlotsPerDay, members[m]->node_id});
        }
    }
    return chunks;
}

}  // namespace

ExperimentOutput run_day_by_day(const LightTrace& trace, std::size_t day_begin, std::size_t day_end,
                                const QTable& initial, const HardwareConfig& hw,
                                const Hyperparameters& hp, const ConvergenceCriterion& crit,
                                std::uint64_t seed, int utc_offset_s, const std::string& arm) {
    if (day_begin >= day_end || day_end > trace.days()) throw std::out_of_range("bad day range");
    const SlotSeries slots = SlotSeries::from_trace(trace, utc_offset_s);

    ExperimentOutput out;
    out.report.experiment = "daybyday";
    out.report.seed = seed;
    out.report.days = static_cast<int>(day_end - day_begin);

    QTable table = initial;
    NodeEnergyState node;
    node.voltage = hw.v_initial;

    for (std::size_t d = day_begin; d < day_end; ++d) {
        Rng rng = make_rng(derive_seed(seed, kTagLiveDay, d));
        // Without a starting policy the first day holds performance state 1;
        // a warm-started node runs greedy on its table from the first slot.
        const QTable* live = d == day_begin && initial.entry_count() == 0 ? nullptr : &table;
        const SlotAgg agg =
            run_live_slots(live, 1, node, slots, d * kSlotsPerDay, (d + 1) * kSlotsPerDay, hw, rng);

        DayRecord rec;
        rec.day = static_cast<int>(d - day_begin);
        rec.node_id = trace.node_id;
        rec.arm = arm;
        rec.reward = agg.reward;
        rec.depleted = agg.depletions > 0;
        rec.samples_sent = agg.samples;

        if (d + 1 < day_end) {
            train_on_trace(table, trace, d, d + 1, hw, hp, crit,
                           derive_seed(seed, kTagNightTrain, d), utc_offset_s);
            rec.trainings = 1;
        }
        out.report.per_day.push_back(std::move(rec));
    }

    out.report.nodes.push_back(summarize(trace.node_id, arm, out.report.per_day));
    out.tables.emplace_back(trace.node_id + "-" + arm, std::move(table));
    return out;
}

ExperimentOutput run_day_by_day(const LightTrace& trace, const HardwareConfig& hw,
                                const Hyperparameters& hp, const ConvergenceCriterion& crit,
                                std::uint64_t seed, int utc_offset_s) {
    return run_day_by_day(trace, 0, trace.days(), QTable{}, hw, hp, crit, seed, utc_offset_s);
}

ExperimentOutput run_dynamic_interval(const LightTrace& trace, const HardwareConfig& hw,
                                      const Hyperparameters& hp, const ConvergenceCriterion& crit,
                                      std::uint64_t seed, int utc_offset_s,
                                      const DynamicIntervalOptions& opts) {
    if (trace.days() == 0) throw std::out_of_range("empty trace");
    if (opts.floor_slots < 1 || opts.cap_slots < opts.floor_slots) {
        throw std::invalid_argument("bad training interval bounds");
    }
    const SlotSeries slots = SlotSeries::from_trace(trace, utc_offset_s);
    const std::size_t num_slots = slots.lux.size();
    const std::size_t last = num_slots - 1;

    ExperimentOutput out;
    out.report.experiment = "dynamic";
    out.report.seed = seed;
    out.report.days = static_cast<int>(trace.days());

    QTable table;
    NodeEnergyState node;
    node.voltage = hw.v_initial;
    Rng rng = make_rng(derive_seed(seed, kTagLiveDay, 0));

    int interval = opts.floor_slots;
    int slots_since_train = 0;

    DayRecord rec;
    rec.node_id = trace.node_id;
    rec.arm = "dynamic";

    for (std::size_t k = 0; k < num_slots; ++k) {
        if (k % kSlotsPerDay == 0) {
            rec.day = static_cast<int>(k / kSlotsPerDay);
            rng = make_rng(derive_seed(seed, kTagLiveDay, static_cast<std::uint64_t>(rec.day)));
        }

        const std::size_t next = std::min(k + 1, last);
        int action = node.performance_state;
        if (node.alive) {
            const ObservedState s = observe_slot(node, slots, k, hw);
            action = select_action(table, s, 0.0, rng);
        }
        const SlotOutcome step =
            env_step_core(node, action, slots.lux[k], slots.lux[next], slots.weekend[next] != 0, hw);
        rec.reward += step.reward;
        rec.samples_sent += step.samples_sent;
        rec.depleted = rec.depleted || step.depleted;

        // Training replays whole days only, so a due instant during the first
        // day stays pending until the day-0 episode is complete at midnight.
        const std::size_t train_end = ((k + 1) / kSlotsPerDay) * kSlotsPerDay;
        if (++slots_since_train >= interval && train_end >= kSlotsPerDay) {
            std::vector<EpisodeChunk> chunks;
            for (std::size_t b = 0; b < train_end; b += kSlotsPerDay) {
                chunks.push_back({&slots, b, b + kSlotsPerDay, trace.node_id});
            }
            // Sessions are seeded by window length, so an instant whose window
            // gained no whole day rebuilds the identical table, the replay
            // comparison ties exactly, and the interval keeps doubling; seeding
            // by instant count would rescramble marginal cells every hour and
            // halve the interval on noise.
            const std::uint64_t window_days = train_end / kSlotsPerDay;
            QTable candidate;
            train_on_chunks(candidate, chunks, hw, hp, crit,
                            derive_seed(seed, kTagDynTrain, window_days));

            // Replay everything seen so far under both tables with one shared
            // action-rng; the comparison sets the retraining cadence, while
            // the node always switches to the newest policy.
            const std::uint64_t eval_seed = derive_seed(seed, kTagDynEval, window_days);
            const double fresh = evaluate_on_slots(candidate, slots, 0, train_end, hw, eval_seed).total_reward;
            const double stale = evaluate_on_slots(table, slots, 0, train_end, hw, eval_seed).total_reward;
            interval = fresh >= stale ? std::min(interval * 2, opts.cap_slots)
                                      : std::max(interval / 2, opts.floor_slots);
            table = std::move(candidate);
            ++rec.trainings;
            slots_since_train = 0;
        }

        if ((k + 1) % kSlotsPerDay == 0) {
            out.report.per_day.push_back(rec);
            rec = DayRecord{};
            rec.node_id = trace.node_id;
            rec.arm = "dynamic";
        }
    }

    out.report.nodes.push_back(summarize(trace.node_id, "dynamic", out.report.per_day));
    out.tables.emplace_back(trace.node_id + "-dynamic", std::move(table));
    return out;
}

std::vector<LightTrace> build_fleet(const std::vector<LightTrace>& bases, const FleetSpec& spec) {
    if (bases.empty()) throw std::invalid_argument("no base traces");
    if (spec.per_base_count < 1) throw std::invalid_argument("per_base_count must be positive");
    std::vector<LightTrace> fleet;
    fleet.reserve(bases.size() * static_cast<std::size_t>(spec.per_base_count));
    for (std::size_t b = 0; b < bases.size(); ++b) {
        auto variants = augment_trace(bases[b], spec.per_base_count,
                                      derive_seed(spec.seed, kTagFleetBase, b));
        for (auto& v : variants) fleet.push_back(std::move(v));
    }
    return fleet;
}

ClusterAssignment cluster_fleet(const std::vector<LightTrace>& fleet, int k) {
    if (k < 1 || static_cast<std::size_t>(k) > fleet.size()) {
        throw std::invalid_argument("cluster count must be in [1, fleet size]");
    }
    const std::size_t n = fleet.size();
    std::vector<double> means(n);
    for (std::size_t i = 0; i < n; ++i) means[i] = weekly_mean_lux(fleet[i], 0);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (means[a] != means[b]) return means[a] < means[b];
        return fleet[a].node_id < fleet[b].node_id;
    });

    ClusterAssignment out;
    out.k = k;
    out.cluster_of.assign(n, 0);
    out.centroids.assign(static_cast<std::size_t>(k), 0);
    out.sizes.assign(static_cast<std::size_t>(k), 0);

    // Quantile split over the brightness ordering; the remainder lands on the
    // dimmest clusters so sizes differ by at most one.
    std::size_t pos = 0;
    for (int c = 0; c < k; ++c) {
        const std::size_t size = n / static_cast<std::size_t>(k) +
                                 (static_cast<std::size_t>(c) < n % static_cast<std::size_t>(k) ? 1 : 0);
        double sum = 0;
        for (std::size_t j = 0; j < size; ++j, ++pos) {
            out.cluster_of[order[pos]] = c;
            sum += means[order[pos]];
        }
        out.sizes[static_cast<std::size_t>(c)] = static_cast<int>(size);
        out.centroids[static_cast<std::size_t>(c)] = sum / static_cast<double>(size);
    }
    return out;
}

ExperimentOutput run_shared_policy(const std::vector<LightTrace>& fleet,
                                   const ClusterAssignment& assignment,
                                   const std::vector<LightTrace>& bases, const HardwareConfig& hw,
                                   const Hyperparameters& hp, const ConvergenceCriterion& crit,
                                   std::uint64_t seed, int utc_offset_s) {
    if (assignment.cluster_of.size() != fleet.size()) {
        throw std::invalid_argument("assignment does not match fleet");
    }
    if (bases.empty()) throw std::invalid_argument("no base traces");
    for (const LightTrace& t : fleet) {
        if (t.days() < 7) throw std::invalid_argument("fleet traces must cover a week");
    }

    ExperimentOutput out;
    out.report.experiment = "shared";
    out.report.seed = seed;
    out.report.days = static_cast<int>(bases.front().days());

    // First-week slot series per member; only that week is ever trained on.
    const std::size_t week_samples = 7 * fleet.front().samples_per_day();
    std::vector<SlotSeries> series(fleet.size());
    for (std::size_t i = 0; i < fleet.size(); ++i) {
        LightTrace week = fleet[i];
        week.lux.resize(week_samples);
        series[i] = SlotSeries::from_trace(week, utc_offset_s);
    }

    // Members ordered dimmest-first inside each cluster (and overall), so the
    // k=1 "cluster" trains on exactly the chunk sequence the global table uses.
    std::vector<std::size_t> order(fleet.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> means(fleet.size());
    for (std::size_t i = 0; i < fleet.size(); ++i) means[i] = weekly_mean_lux(fleet[i], 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (means[a] != means[b]) return means[a] < means[b];
        return fleet[a].node_id < fleet[b].node_id;
    });

    auto train_group = [&](const std::vector<std::size_t>& members, std::uint64_t group_seed) {
        std::vector<const SlotSeries*> group_series;
        std::vector<const LightTrace*> group_traces;
        for (std::size_t i : members) {
            group_series.push_back(&series[i]);
            group_traces.push_back(&fleet[i]);
        }
        QTable table;
        train_on_chunks(table, round_robin_chunks(group_series, group_traces, 7), hw, hp, crit,
                        group_seed);
        return table;
    };

    const QTable global = train_group(order, derive_seed(seed, kTagClusterTrain, 1, 0));
    out.report.notes.emplace_back("global_episodes", std::to_string(global.episodes_trained));

    std::vector<QTable> cluster_tables(static_cast<std::size_t>(assignment.k));
    for (int c = 0; c < assignment.k; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i : order) {
            if (assignment.cluster_of[i] == c) members.push_back(i);
        }
        if (members.empty()) throw std::invalid_argument("empty cluster");
        cluster_tables[static_cast<std::size_t>(c)] = train_group(
            members,
            derive_seed(seed, kTagClusterTrain, static_cast<std::uint64_t>(assignment.k),
                        static_cast<std::uint64_t>(c)));
        out.report.notes.emplace_back(
            "cluster" + std::to_string(c) + "_size",
            std::to_string(assignment.sizes[static_cast<std::size_t>(c)]));
        out.report.notes.emplace_back(
            "cluster" + std::to_string(c) + "_centroid",
            std::to_string(assignment.centroids[static_cast<std::size_t>(c)]));
    }

    for (std::size_t b = 0; b < bases.size(); ++b) {
        const LightTrace& base = bases[b];
        const double base_mean = weekly_mean_lux(base, 0);
        int chosen = 0;
        double best = std::abs(assignment.centroids[0] - base_mean);
        for (int c = 1; c < assignment.k; ++c) {
            const double d = std::abs(assignment.centroids[static_cast<std::size_t>(c)] - base_mean);
            if (d < best) {
                best = d;
                chosen = c;
            }
        }
        out.report.notes.emplace_back("base_" + base.node_id + "_cluster", std::to_string(chosen));

        const std::uint64_t eval_seed = derive_seed(seed, kTagSharedEval, b);
        const EvalResult ev_cluster =
            evaluate_policy(cluster_tables[static_cast<std::size_t>(chosen)], base, 0, base.days(),
                            hw, eval_seed, utc_offset_s);
        const EvalResult ev_global =
            evaluate_policy(global, base, 0, base.days(), hw, eval_seed, utc_offset_s);

        append_eval_days(out.report, ev_cluster, base.node_id, "cluster");
        append_eval_days(out.report, ev_global, base.node_id, "global");
        out.report.nodes.push_back(summarize(base.node_id, "cluster", out.report.per_day));
        out.report.nodes.push_back(summarize(base.node_id, "global", out.report.per_day));
    }

    for (int c = 0; c < assignment.k; ++c) {
        out.tables.emplace_back("cluster-" + std::to_string(c),
                                std::move(cluster_tables[static_cast<std::size_t>(c)]));
    }
    out.tables.emplace_back("global", global);
    return out;
}

ExperimentOutput run_transfer(const std::vector<LightTrace>& bases, const HardwareConfig& hw,
                              const Hyperparameters& hp, const ConvergenceCriterion& crit,
                              std::uint64_t seed, int utc_offset_s) {
    if (bases.empty()) throw std::invalid_argument("no base traces");
    for (const LightTrace& t : bases) {
        if (t.days() < 8) throw std::invalid_argument("transfer needs a week of history plus a run");
    }

    ExperimentOutput out;
    out.report.experiment = "transfer";
    out.report.seed = seed;
    out.report.days = static_cast<int>(bases.front().days() - 7);

    std::vector<SlotSeries> series(bases.size());
    std::vector<const SlotSeries*> series_ptrs;
    std::vector<const LightTrace*> trace_ptrs;
    for (std::size_t b = 0; b < bases.size(); ++b) {
        series[b] = SlotSeries::from_trace(bases[b], utc_offset_s);
        series_ptrs.push_back(&series[b]);
        trace_ptrs.push_back(&bases[b]);
    }

    // One general table from the pooled first week of every base.
    QTable general;
    train_on_chunks(general, round_robin_chunks(series_ptrs, trace_ptrs, 7), hw, hp, crit,
                    derive_seed(seed, kTagGeneralTrain));
    out.report.notes.emplace_back("general_episodes", std::to_string(general.episodes_trained));

    for (std::size_t b = 0; b < bases.size(); ++b) {
        const LightTrace& base = bases[b];
        const std::uint64_t run_seed = derive_seed(seed, kTagTransferRun, b);
        // Warm and cold share every seed; only the starting table differs.
        ExperimentOutput warm = run_day_by_day(base, 7, base.days(), general, hw, hp, crit,
                                               run_seed, utc_offset_s, "warm");
        ExperimentOutput cold = run_day_by_day(base, 7, base.days(), QTable{}, hw, hp, crit,
                                               run_seed, utc_offset_s, "cold");
        for (auto& r : warm.report.per_day) out.report.per_day.push_back(std::move(r));
        for (auto& r : cold.report.per_day) out.report.per_day.push_back(std::move(r));
        for (auto& n : warm.report.nodes) out.report.nodes.push_back(std::move(n));
        for (auto& n : cold.report.nodes) out.report.nodes.push_back(std::move(n));
        for (auto& t : warm.tables) out.tables.push_back(std::move(t));
        for (auto& t : cold.tables) out.tables.push_back(std::move(t));
    }
    out.tables.emplace_back("general", std::move(general));
    return out;
}

}  // namespace ehsim
