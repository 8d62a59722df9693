#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ehsim/env.hpp"
#include "ehsim/rng.hpp"

namespace ehsim {

struct Hyperparameters {
    double gamma = 0.99;
    double alpha = 0.1;
    double epsilon_max = 1.0;
    double epsilon_min = 0.1;
    double epsilon_decay = 0.0004;
};

// Training stops once the table mean, averaged over batches of `window`
// episodes, agrees across consecutive batches to within relative `tolerance`
// (three stable batch-to-batch steps in a row), or at `max_episodes`.
struct ConvergenceCriterion {
    int window = 50;
    double tolerance = 1e-3;
    long max_episodes = 20000;
};

// Dense action-value table over the 11 x 11 x 2 observed states. Entries
// default to 0; `touched` tracks which were ever written so serialization
// stays diff-friendly.
class QTable {
  public:
    double lookup(const ObservedState& s, int action) const { return q_[at(s, action)]; }
    void store(const ObservedState& s, int action, double value) {
        const std::size_t i = at(s, action);
        q_[i] = value;
        touched_[i] = true;
    }
    bool touched(const ObservedState& s, int action) const { return touched_[at(s, action)]; }

    double max_value(const ObservedState& s) const {
        double best = q_[at(s, 0)];
        for (int a = 1; a < kNumActions; ++a) best = std::max(best, q_[at(s, a)]);
        return best;
    }

    // Mean over the full dense table (zeros included). Used as the
    // convergence statistic; a table of explicit zeros and an untouched table
    // are deliberately indistinguishable here.
    double mean_value() const {
        double sum = 0;
        for (double v : q_) sum += v;
        return sum / static_cast<double>(q_.size());
    }

    std::size_t entry_count() const;  // touched entries

    bool operator==(const QTable&) const = default;

    long episodes_trained = 0;
    std::vector<std::string> sources;  // trace ids seen during training

  private:
    static std::size_t at(const ObservedState& s, int action) {
        return static_cast<std::size_t>(s.index()) * kNumActions + static_cast<std::size_t>(action);
    }
    std::array<double, static_cast<std::size_t>(kNumStates) * kNumActions> q_{};
    std::array<bool, static_cast<std::size_t>(kNumStates) * kNumActions> touched_{};
};

double q_lookup(const QTable& table, const ObservedState& s, int action);

// epsilon-greedy with uniform random tie-breaking among maximal actions.
int select_action(const QTable& table, const ObservedState& s, double epsilon, Rng& rng);

// One Watkins update: q += alpha * (r + gamma * max_a' q(s', a') - q).
// Returns the stored value.
double q_update(QTable& table, const ObservedState& s, int action, double reward,
                const ObservedState& next, const Hyperparameters& hp);

double decay_epsilon(double epsilon, const Hyperparameters& hp);

// A slice of a precomputed trace used as one training episode.
struct EpisodeChunk {
    const SlotSeries* slots = nullptr;
    std::size_t begin = 0;  // slot range [begin, end)
    std::size_t end = 0;
    std::string source;
};

struct TrainStats {
    long episodes = 0;
    bool converged = false;
};

// Replays the chunks round-robin as episodes (node reset to v_initial each
// episode), epsilon starting at epsilon_max and decaying once per decision
// slot across the whole session, updating `table` in place after every slot.
TrainStats train_on_chunks(QTable& table, const std::vector<EpisodeChunk>& chunks,
                           const HardwareConfig& hw, const Hyperparameters& hp,
                           const ConvergenceCriterion& crit, std::uint64_t seed);

// Day-episode training over days [day_begin, day_end) of one trace.
TrainStats train_on_trace(QTable& table, const LightTrace& trace, std::size_t day_begin,
                          std::size_t day_end, const HardwareConfig& hw, const Hyperparameters& hp,
                          const ConvergenceCriterion& crit, std::uint64_t seed, int utc_offset_s = 0);

struct EvalResult {
    double total_reward = 0;
    long samples_sent = 0;
    int depletion_days = 0;            // days with at least one depletion
    std::vector<double> day_rewards;   // one per whole or partial day in the range
    std::vector<long> day_samples;
    std::vector<std::uint8_t> day_depleted;
};

// Greedy (epsilon = 0) continuous run over slots [begin, end), node starting
// fresh at v_initial. Ties are broken by `seed`'s stream, so results are
// reproducible and comparable across tables evaluated with the same seed.
EvalResult evaluate_on_slots(const QTable& table, const SlotSeries& slots, std::size_t begin,
                             std::size_t end, const HardwareConfig& hw, std::uint64_t seed);

EvalResult evaluate_policy(const QTable& table, const LightTrace& trace, std::size_t day_begin,
                           std::size_t day_end, const HardwareConfig& hw, std::uint64_t seed,
                           int utc_offset_s = 0);

// Stable JSON rendering: one "light,storage,weekend,action" key per touched
// entry in index order, full round-trip precision, training metadata included.
std::string qtable_to_json(const QTable& table, const Hyperparameters& hp);
std::pair<QTable, Hyperparameters> qtable_from_json(const std::string& text);
void save_qtable(const QTable& table, const Hyperparameters& hp, const std::string& path);
std::pair<QTable, Hyperparameters> load_qtable(const std::string& path);

}  // namespace ehsim
