#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ehsim/energy.hpp"
#include "ehsim/trace.hpp"

namespace ehsim {

inline constexpr int kNumActions = 4;        // performance states 0..3
inline constexpr int kNumLightLevels = 11;
inline constexpr int kNumStorageLevels = 11;
inline constexpr int kNumStates = kNumLightLevels * kNumStorageLevels * 2;

inline constexpr double kDepletionReward = -300.0;

// What the agent sees at a slot boundary.
struct ObservedState {
    int light_level = 0;    // 0..10
    int storage_level = 0;  // 0..10
    bool weekend = false;

    int index() const { return (light_level * kNumStorageLevels + storage_level) * 2 + (weekend ? 1 : 0); }
    bool operator==(const ObservedState&) const = default;
};

struct SlotOutcome {
    double reward = 0;
    ObservedState next_state;
    bool depleted = false;
    long samples_sent = 0;
};

struct Transition {
    ObservedState state;
    int action = 0;
    double reward = 0;
    ObservedState next_state;
};

struct DayResult {
    double reward = 0;
    long samples_sent = 0;
    int depletions = 0;
    std::vector<Transition> transitions;  // decision slots only (node alive at slot start)
};

ObservedState observe(const NodeEnergyState& node, double lux, std::int64_t timestamp,
                      const HardwareConfig& hw, int utc_offset_s = 0);

// One slot of environment dynamics given current/next slot light. The reward
// is the performance state taken, replaced by kDepletionReward if storage ran
// out during the slot; a dead node earns nothing and sends nothing.
SlotOutcome env_step_core(NodeEnergyState& node, int action, double lux_now, double lux_next,
                          bool weekend_next, const HardwareConfig& hw);

// Trace-indexed wrapper around env_step_core. The next-state observation uses
// the following slot (the slot itself again at the end of the trace).
SlotOutcome env_step(NodeEnergyState& node, int action, const LightTrace& trace,
                     std::size_t slot_index, const HardwareConfig& hw, int utc_offset_s = 0);

using Policy = std::function<int(const ObservedState&)>;

// Runs the 96 slots of one day, mutating `node` across the day boundary.
DayResult run_day(NodeEnergyState& node, const Policy& policy, const LightTrace& trace,
                  std::size_t day_index, const HardwareConfig& hw, int utc_offset_s = 0);

// Per-slot light and weekend flags for a whole trace, precomputed once so the
// training loops avoid re-aggregating samples every episode.
struct SlotSeries {
    std::vector<double> lux;
    std::vector<std::uint8_t> weekend;

    static SlotSeries from_trace(const LightTrace& trace, int utc_offset_s = 0);
};

}  // namespace ehsim
