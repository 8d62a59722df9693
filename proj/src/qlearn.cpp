#include "ehsim/qlearn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace ehsim {

using ordered_json = nlohmann::ordered_json;

std::size_t QTable::entry_count() const {
    std::size_t n = 0;
    for (bool t : touched_) n += t ? 1 : 0;
    return n;
}

double q_lookup(const QTable& table, const ObservedState& s, int action) {
    return table.lookup(s, action);
}

int select_action(const QTable& table, const ObservedState& s, double epsilon, Rng& rng) {
    if (epsilon > 0 && rand_unit(rng) < epsilon) {
        return static_cast<int>(rand_index(rng, kNumActions));
    }
    int best[kNumActions];
    int n_best = 0;
    double best_q = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < kNumActions; ++a) {
        const double q = table.lookup(s, a);
        if (q > best_q) {
            best_q = q;
            best[0] = a;
            n_best = 1;
        } else if (q == best_q) {
            best[n_best++] = a;
        }
    }
    return n_best == 1 ? best[0] : best[rand_index(rng, static_cast<std::uint64_t>(n_best))];
}

double q_update(QTable& table, const ObservedState& s, int action, double reward,
                const ObservedState& next, const Hyperparameters& hp) {
    const double q_predict = table.lookup(s, action);
    const double q_target = reward + hp.gamma * table.max_value(next);
    const double value = q_predict + hp.alpha * (q_target - q_predict);
    table.store(s, action, value);
    return value;
}

double decay_epsilon(double epsilon, const Hyperparameters& hp) {
    return std::max(epsilon - hp.epsilon_decay, hp.epsilon_min);
}

namespace {

constexpr int kStableBatches = 3;

ObservedState observe_slot(const NodeEnergyState& node, const SlotSeries& slots, std::size_t k,
                           const HardwareConfig& hw) {
    ObservedState s;
    s.light_level = discretize_light(slots.lux[k]);
    s.storage_level = discretize_voltage(node.voltage, hw);
    s.weekend = slots.weekend[k] != 0;
    return s;
}

void remember_source(QTable& table, const std::string& id) {
    if (std::find(table.sources.begin(), table.sources.end(), id) == table.sources.end()) {
        table.sources.push_back(id);
    }
}

}  // namespace

TrainStats train_on_chunks(QTable& table, const std::vector<EpisodeChunk>& chunks,
                           const HardwareConfig& hw, const Hyperparameters& hp,
                           const ConvergenceCriterion& crit, std::uint64_t seed) {
    if (chunks.empty()) throw std::invalid_argument("no training data");
    for (const auto& c : chunks) {
        if (!c.slots || c.begin >= c.end || c.end > c.slots->lux.size()) {
            throw std::invalid_argument("bad episode chunk");
        }
        remember_source(table, c.source);
    }

    Rng rng = make_rng(seed);
    double epsilon = hp.epsilon_max;
    TrainStats stats;

    // Exploration keeps injecting depletion penalties, so the per-episode table
    // mean never goes quiet; averages over `window`-episode batches do.  Stop
    // once kStableBatches consecutive batch-to-batch steps stay inside the
    // tolerance — a single quiet step can still be a ramp crossing its peak.
    double batch_sum = 0;
    double prev_batch = 0;
    int batches = 0;
    int stable_steps = 0;

    for (long ep = 0; ep < crit.max_episodes; ++ep) {
        const EpisodeChunk& chunk = chunks[static_cast<std::size_t>(ep) % chunks.size()];
        const SlotSeries& slots = *chunk.slots;
        const std::size_t last = slots.lux.size() - 1;

        NodeEnergyState node;
        node.voltage = hw.v_initial;
        node.alive = true;
        for (std::size_t k = chunk.begin; k < chunk.end; ++k) {
            const std::size_t next = std::min(k + 1, last);
            if (node.alive) {
                const ObservedState s = observe_slot(node, slots, k, hw);
                const int a = select_action(table, s, epsilon, rng);
                const SlotOutcome outcome =
                    env_step_core(node, a, slots.lux[k], slots.lux[next], slots.weekend[next] != 0, hw);
                q_update(table, s, a, outcome.reward, outcome.next_state, hp);
                epsilon = decay_epsilon(epsilon, hp);
            } else {
                env_step_core(node, node.performance_state, slots.lux[k], slots.lux[next],
                              slots.weekend[next] != 0, hw);
            }
        }

        stats.episodes = ep + 1;
        batch_sum += table.mean_value();
        if ((ep + 1) % crit.window == 0) {
            const double batch = batch_sum / crit.window;
            batch_sum = 0;
            if (++batches >= 2) {
                const double ref = std::max(std::abs(prev_batch), 1e-6);
                stable_steps = std::abs(batch - prev_batch) / ref <= crit.tolerance ? stable_steps + 1 : 0;
            }
            prev_batch = batch;
            if (stable_steps >= kStableBatches) {
                stats.converged = true;
                break;
            }
        }
    }

    table.episodes_trained += stats.episodes;
    return stats;
}

TrainStats train_on_trace(QTable& table, const LightTrace& trace, std::size_t day_begin,
                          std::size_t day_end, const HardwareConfig& hw, const Hyperparameters& hp,
                          const ConvergenceCriterion& crit, std::uint64_t seed, int utc_offset_s) {
    if (day_begin >= day_end || day_end > trace.days()) throw std::out_of_range("bad training day range");
    const SlotSeries slots = SlotSeries::from_trace(trace, utc_offset_s);
    std::vector<EpisodeChunk> chunks;
    for (std::size_t d = day_begin; d < day_end; ++d) {
        chunks.push_back({&slots, d * kSlotsPerDay, (d + 1) * kSlotsPerDay, trace.node_id});
    }
    return train_on_chunks(table, chunks, hw, hp, crit, seed);
}

EvalResult evaluate_on_slots(const QTable& table, const SlotSeries& slots, std::size_t begin,
                             std::size_t end, const HardwareConfig& hw, std::uint64_t seed) {
    if (begin >= end || end > slots.lux.size()) throw std::out_of_range("bad evaluation slot range");
    EvalResult r;
    Rng rng = make_rng(seed);
    NodeEnergyState node;
    node.voltage = hw.v_initial;
    const std::size_t last = slots.lux.size() - 1;

    double day_reward = 0;
    long day_samples = 0;
    bool day_depleted = false;
    std::size_t in_day = 0;
    for (std::size_t k = begin; k < end; ++k) {
        const std::size_t next = std::min(k + 1, last);
        SlotOutcome outcome;
        if (node.alive) {
            const ObservedState s = observe_slot(node, slots, k, hw);
            const int a = select_action(table, s, 0.0, rng);
            outcome = env_step_core(node, a, slots.lux[k], slots.lux[next], slots.weekend[next] != 0, hw);
        } else {
            outcome = env_step_core(node, node.performance_state, slots.lux[k], slots.lux[next],
                                    slots.weekend[next] != 0, hw);
        }
        r.total_reward += outcome.reward;
        r.samples_sent += outcome.samples_sent;
        day_reward += outcome.reward;
        day_samples += outcome.samples_sent;
        day_depleted = day_depleted || outcome.depleted;
        if (++in_day == kSlotsPerDay || k + 1 == end) {
            r.day_rewards.push_back(day_reward);
            r.day_samples.push_back(day_samples);
            r.day_depleted.push_back(day_depleted ? 1 : 0);
            r.depletion_days += day_depleted ? 1 : 0;
            day_reward = 0;
            day_samples = 0;
            day_depleted = false;
            in_day = 0;
        }
    }
    return r;
}

EvalResult evaluate_policy(const QTable& table, const LightTrace& trace, std::size_t day_begin,
                           std::size_t day_end, const HardwareConfig& hw, std::uint64_t seed,
                           int utc_offset_s) {
    if (day_begin >= day_end || day_end > trace.days()) throw std::out_of_range("bad evaluation day range");
    const SlotSeries slots = SlotSeries::from_trace(trace, utc_offset_s);
    return evaluate_on_slots(table, slots, day_begin * kSlotsPerDay, day_end * kSlotsPerDay, hw, seed);
}

std::string qtable_to_json(const QTable& table, const Hyperparameters& hp) {
    ordered_json j;
    j["format"] = "qtable-v1";
    j["hyperparameters"] = {{"gamma", hp.gamma},
                            {"alpha", hp.alpha},
                            {"epsilon_max", hp.epsilon_max},
                            {"epsilon_min", hp.epsilon_min},
                            {"epsilon_decay", hp.epsilon_decay}};
    j["episodes_trained"] = table.episodes_trained;
    j["sources"] = table.sources;
    ordered_json entries = ordered_json::object();
    for (int light = 0; light < kNumLightLevels; ++light) {
        for (int storage = 0; storage < kNumStorageLevels; ++storage) {
            for (int weekend = 0; weekend < 2; ++weekend) {
                const ObservedState s{light, storage, weekend != 0};
                for (int a = 0; a < kNumActions; ++a) {
                    if (!table.touched(s, a)) continue;
                    std::ostringstream key;
                    key << light << ',' << storage << ',' << weekend << ',' << a;
                    entries[key.str()] = table.lookup(s, a);
                }
            }
        }
    }
    j["entries"] = std::move(entries);
    return j.dump(2) + "\n";
}

std::pair<QTable, Hyperparameters> qtable_from_json(const std::string& text) {
    const ordered_json j = ordered_json::parse(text);
    if (j.value("format", "") != "qtable-v1") throw std::runtime_error("not a qtable file");
    Hyperparameters hp;
    const auto& h = j.at("hyperparameters");
    hp.gamma = h.at("gamma").get<double>();
    hp.alpha = h.at("alpha").get<double>();
    hp.epsilon_max = h.at("epsilon_max").get<double>();
    hp.epsilon_min = h.at("epsilon_min").get<double>();
    hp.epsilon_decay = h.at("epsilon_decay").get<double>();

    QTable table;
    table.episodes_trained = j.value("episodes_trained", 0L);
    table.sources = j.value("sources", std::vector<std::string>{});
    for (const auto& [key, value] : j.at("entries").items()) {
        int light, storage, weekend, action;
        char c1, c2, c3;
        std::istringstream in(key);
        if (!(in >> light >> c1 >> storage >> c2 >> weekend >> c3 >> action) || c1 != ',' || c2 != ',' ||
            c3 != ',' || light < 0 || light >= kNumLightLevels || storage < 0 ||
            storage >= kNumStorageLevels || weekend < 0 || weekend > 1 || action < 0 ||
            action >= kNumActions) {
            throw std::runtime_error("bad qtable entry key '" + key + "'");
        }
        table.store({light, storage, weekend != 0}, action, value.get<double>());
    }
    return {std::move(table), hp};
}

void save_qtable(const QTable& table, const Hyperparameters& hp, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write qtable file '" + path + "'");
    out << qtable_to_json(table, hp);
    if (!out) throw std::runtime_error("failed writing qtable file '" + path + "'");
}

std::pair<QTable, Hyperparameters> load_qtable(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read qtable file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return qtable_from_json(buf.str());
}

}  // namespace ehsim
