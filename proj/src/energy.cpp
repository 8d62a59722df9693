#include "ehsim/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ehsim {

int sensing_period_s(int performance_state) {
    switch (performance_state) {
        case 0: return 900;
        case 1: return 300;
        case 2: return 60;
        case 3: return 15;
    }
    throw std::out_of_range("performance state " + std::to_string(performance_state));
}

double energy_of_voltage(double v, const HardwareConfig& hw) {
    return 0.5 * hw.capacitance_f * v * v;
}

double voltage_of_energy(double e, const HardwareConfig& hw) {
    if (e < 0) throw std::out_of_range("negative stored energy");
    return std::sqrt(2.0 * e / hw.capacitance_f);
}

double harvest_power(double lux, const HardwareConfig& hw) {
    if (lux < 0 || !std::isfinite(lux)) throw std::out_of_range("bad lux " + std::to_string(lux));
    return lux * hw.harvest_w_per_lux;
}

double slot_load_energy(int performance_state, int slot_seconds, double voltage, bool alive,
                        const HardwareConfig& hw) {
    const double divider = voltage * voltage / hw.divider_ohm * slot_seconds;
    if (!alive) return divider;
    const double events = static_cast<double>(slot_seconds) / sensing_period_s(performance_state);
    return events * hw.event_energy_j + hw.sleep_power_w * slot_seconds + divider;
}

StepResult step_energy(const NodeEnergyState& state, double lux, int performance_state,
                       int slot_seconds, const HardwareConfig& hw) {
    StepResult r;
    const double e_min = energy_of_voltage(hw.v_min, hw);
    const double e_max = energy_of_voltage(hw.v_max, hw);
    const double harvested = harvest_power(lux, hw) * slot_seconds;
    r.load_energy_j = slot_load_energy(performance_state, slot_seconds, state.voltage, state.alive, hw);

    // Harvest and load are both constant across the slot, so stored energy is
    // linear in time and an end-of-slot check decides whether v_min was hit.
    const double e_end = energy_of_voltage(state.voltage, hw) + harvested - r.load_energy_j;
    r.depleted = state.alive && e_end <= e_min;

    const double e_clamped = std::clamp(e_end, e_min, e_max);
    r.next.voltage = voltage_of_energy(e_clamped, hw);
    r.next.performance_state = state.alive ? performance_state : state.performance_state;
    if (state.alive) {
        r.next.alive = !r.depleted;
    } else {
        r.next.alive = r.next.voltage >= hw.v_restart;
    }
    return r;
}

double lifetime_days(const HardwareConfig& hw, double v_start, double lux, int period_s) {
    if (period_s <= 0) throw std::invalid_argument("period must be positive");
    const double e_min = energy_of_voltage(hw.v_min, hw);
    const double e_max = energy_of_voltage(hw.v_max, hw);
    double e = energy_of_voltage(v_start, hw);
    if (e <= e_min) return 0;
    const double harvested = harvest_power(lux, hw) * period_s;

    double t = 0;
    while (true) {
        const double v = voltage_of_energy(e, hw);
        const double load = hw.event_energy_j + hw.sleep_power_w * period_s +
                            v * v / hw.divider_ohm * period_s;
        if (harvested >= load) return std::numeric_limits<double>::infinity();
        const double e_next = std::min(e + harvested - load, e_max);
        if (e_next <= e_min) {
            // Fractional last period up to the crossing.
            t += period_s * (e - e_min) / (e - e_next);
            return t / 86400.0;
        }
        e = e_next;
        t += period_s;
    }
}

int discretize_voltage(double v, const HardwareConfig& hw) {
    if (v < hw.v_min || v > hw.v_max) throw std::out_of_range("voltage " + std::to_string(v) + " outside storage range");
    const int level = static_cast<int>(std::floor((v - hw.v_min) / (hw.v_max - hw.v_min) * 10.0));
    return std::clamp(level, 0, 10);
}

int discretize_light(double lux) {
    if (lux < 0 || !std::isfinite(lux)) throw std::out_of_range("bad lux " + std::to_string(lux));
    const int level = static_cast<int>(std::floor(lux / 200.0));
    return std::clamp(level, 0, 10);
}

}  // namespace ehsim
