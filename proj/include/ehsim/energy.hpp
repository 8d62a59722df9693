#pragma once

#include <stdexcept>

namespace ehsim {

// Storage, harvesting and load parameters for one node. Energy bookkeeping is
// plain E = 1/2 C V^2 on a supercapacitor; the voltage divider used to read
// the storage level leaks continuously whether or not the node runs.
struct HardwareConfig {
    double capacitance_f = 1.0;
    double v_max = 5.5;
    double v_min = 2.1;          // brown-out: node dies at or below this
    double v_restart = 3.0;      // revive threshold after a brown-out
    double v_initial = 5.5;      // deployment charge
    double divider_ohm = 20e6;   // two 10 Mohm resistors in series
    double sleep_power_w = 5e-6;
    double event_energy_j = 10e-3;      // one sense+transmit burst
    double harvest_w_per_lux = 1e-6;    // linear PV model

    void validate() const {
        if (capacitance_f <= 0 || divider_ohm <= 0) throw std::invalid_argument("bad hardware constants");
        if (!(0 < v_min && v_min < v_restart && v_restart <= v_max)) {
            throw std::invalid_argument("need 0 < v_min < v_restart <= v_max");
        }
        if (v_initial < v_min || v_initial > v_max) throw std::invalid_argument("v_initial out of range");
        if (sleep_power_w < 0 || event_energy_j < 0 || harvest_w_per_lux < 0) {
            throw std::invalid_argument("negative power constants");
        }
    }
};

struct NodeEnergyState {
    double voltage = 5.5;
    bool alive = true;
    int performance_state = 0;  // last commanded sensing level, 0..3
};

struct StepResult {
    NodeEnergyState next;
    bool depleted = false;      // storage hit v_min during this slot
    double load_energy_j = 0;   // energy drawn over the slot
};

// Seconds between sensing events for performance states 0..3.
int sensing_period_s(int performance_state);  // throws std::out_of_range

double energy_of_voltage(double v, const HardwareConfig& hw);
double voltage_of_energy(double e, const HardwareConfig& hw);
double harvest_power(double lux, const HardwareConfig& hw);

// Energy drawn over one slot at the given performance state: sensing events
// plus sleep floor plus divider leakage at the slot-start voltage. A dead
// node only leaks through the divider.
double slot_load_energy(int performance_state, int slot_seconds, double voltage, bool alive,
                        const HardwareConfig& hw);

// Advances storage over one slot under constant harvest and load. Depletion
// is decided by the end-of-slot energy since power is constant within a slot;
// a dead node revives once the end-of-slot voltage reaches v_restart.
StepResult step_energy(const NodeEnergyState& state, double lux, int performance_state,
                       int slot_seconds, const HardwareConfig& hw);

// 11-level discretizers used for the observed state.
int discretize_voltage(double v, const HardwareConfig& hw);  // throws std::out_of_range
int discretize_light(double lux);

// Days until storage decays from v_start to v_min under constant light, with
// one sensing event every period_s seconds (the node samples until brown-out).
// Returns +infinity if storage is not draining.
double lifetime_days(const HardwareConfig& hw, double v_start, double lux, int period_s);

}  // namespace ehsim
