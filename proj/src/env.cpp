#include "ehsim/env.hpp"

#include <algorithm>
#include <cmath>

namespace ehsim {

ObservedState observe(const NodeEnergyState& node, double lux, std::int64_t timestamp,
                      const HardwareConfig& hw, int utc_offset_s) {
    ObservedState s;
    s.light_level = discretize_light(lux);
    s.storage_level = discretize_voltage(node.voltage, hw);
    s.weekend = is_weekend(timestamp, utc_offset_s);
    return s;
}

SlotOutcome env_step_core(NodeEnergyState& node, int action, double lux_now, double lux_next,
                          bool weekend_next, const HardwareConfig& hw) {
    SlotOutcome out;
    const bool was_alive = node.alive;
    const double e_before = energy_of_voltage(node.voltage, hw);

    const StepResult step = step_energy(node, lux_now, action, kSlotSeconds, hw);
    out.depleted = step.depleted;

    if (was_alive) {
        const long events = kSlotSeconds / sensing_period_s(action);
        if (step.depleted) {
            out.reward = kDepletionReward;
            // Events completed before storage crossed v_min; energy is linear
            // in time within the slot, so the crossing fraction is exact.
            const double e_min = energy_of_voltage(hw.v_min, hw);
            const double e_end = e_before + harvest_power(lux_now, hw) * kSlotSeconds - step.load_energy_j;
            const double drop = e_before - e_end;
            const double fraction = drop > 0 ? std::clamp((e_before - e_min) / drop, 0.0, 1.0) : 0.0;
            out.samples_sent = static_cast<long>(std::floor(static_cast<double>(events) * fraction));
        } else {
            out.reward = static_cast<double>(action);
            out.samples_sent = events;
        }
    }

    node = step.next;
    out.next_state.light_level = discretize_light(lux_next);
    out.next_state.storage_level = discretize_voltage(node.voltage, hw);
    out.next_state.weekend = weekend_next;
    return out;
}

SlotOutcome env_step(NodeEnergyState& node, int action, const LightTrace& trace,
                     std::size_t slot_index, const HardwareConfig& hw, int utc_offset_s) {
    const std::size_t last = trace.slots() - 1;
    const std::size_t next = std::min(slot_index + 1, last);
    return env_step_core(node, action, slot_lux(trace, slot_index), slot_lux(trace, next),
                         is_weekend(trace.slot_timestamp(next), utc_offset_s), hw);
}

DayResult run_day(NodeEnergyState& node, const Policy& policy, const LightTrace& trace,
                  std::size_t day_index, const HardwareConfig& hw, int utc_offset_s) {
    DayResult day;
    const std::size_t begin = day_index * kSlotsPerDay;
    if (begin + kSlotsPerDay > trace.slots()) {
        throw std::out_of_range("day " + std::to_string(day_index) + " not covered by trace '" +
                                trace.node_id + "'");
    }
    for (std::size_t k = begin; k < begin + kSlotsPerDay; ++k) {
        const bool deciding = node.alive;
        ObservedState s;
        int action = node.performance_state;
        if (deciding) {
            s = observe(node, slot_lux(trace, k), trace.slot_timestamp(k), hw, utc_offset_s);
            action = policy(s);
        }
        const SlotOutcome outcome = env_step(node, action, trace, k, hw, utc_offset_s);
        day.reward += outcome.reward;
        day.samples_sent += outcome.samples_sent;
        day.depletions += outcome.depleted ? 1 : 0;
        if (deciding) day.transitions.push_back({s, action, outcome.reward, outcome.next_state});
    }
    return day;
}

SlotSeries SlotSeries::from_trace(const LightTrace& trace, int utc_offset_s) {
    SlotSeries out;
    const std::size_t n = trace.slots();
    out.lux.resize(n);
    out.weekend.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.lux[k] = slot_lux(trace, k);
        out.weekend[k] = is_weekend(trace.slot_timestamp(k), utc_offset_s) ? 1 : 0;
    }
    return out;
}

}  // namespace ehsim
