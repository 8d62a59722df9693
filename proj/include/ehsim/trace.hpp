#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ehsim/timeutil.hpp"

namespace ehsim {

inline constexpr int kSlotSeconds = 900;   // one decision slot
inline constexpr int kSlotsPerDay = 96;
inline constexpr int kTraceResolution = 60;  // internal sample spacing, seconds

struct TraceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TraceParseError : TraceError {
    using TraceError::TraceError;
};
struct TraceGapError : TraceError {
    using TraceError::TraceError;
};
struct TraceOrderError : TraceError {
    using TraceError::TraceError;
};

// Uniformly sampled ambient-light series for one node. Timestamps are implied:
// sample i sits at start_ts + i * resolution_s. The vector always covers a
// whole number of days.
struct LightTrace {
    std::string node_id;
    std::int64_t start_ts = 0;   // UTC seconds, first sample
    int resolution_s = kTraceResolution;
    std::vector<double> lux;

    std::size_t samples_per_day() const { return static_cast<std::size_t>(kDaySeconds / resolution_s); }
    std::size_t days() const { return lux.size() / samples_per_day(); }
    std::size_t slots() const { return days() * kSlotsPerDay; }
    std::int64_t slot_timestamp(std::size_t slot_index) const {
        return start_ts + static_cast<std::int64_t>(slot_index) * kSlotSeconds;
    }
};

enum class ArchetypeKind { Window, Door, MiddleOffice, ConferenceRoom, StairAccess };

const char* archetype_name(ArchetypeKind kind);
ArchetypeKind archetype_from_name(const std::string& name);  // throws TraceParseError

// Parameters for the synthetic light generators. Which fields matter depends
// on the kind; defaults give each placement its characteristic energy budget.
struct PlacementArchetype {
    ArchetypeKind kind = ArchetypeKind::Window;
    double peak_lux = 0;          // 0 = use the per-kind default
    double sunrise_hour = 5.5;    // Window daylight span
    double sunset_hour = 22.0;
    double work_start_hour = 8.0;  // working span (room lighting and occupancy)
    double work_end_hour = 20.0;
    double occupancy = 0.2;       // fraction of the working span actually occupied
    double base_lux = -1;         // ambient floor; -1 = per-kind default
    double band_lux = -1;         // weekday room lighting over the working span; off unless set

    double effective_peak() const;
    double effective_base(bool weekend) const;
    double effective_band() const;
};

// Reads `timestamp,lux` CSV (ISO-8601 UTC timestamps, header optional),
// resamples to `resolution` seconds by mean aggregation, linearly interpolates
// gaps shorter than one hour, and truncates to whole days.
// Throws TraceParseError / TraceOrderError / TraceGapError.
LightTrace load_trace(const std::string& path, int resolution = kTraceResolution);

// Writes the matching CSV format.
void save_trace(const LightTrace& trace, const std::string& path);

// Deterministic synthetic trace for one placement archetype.
LightTrace generate_synthetic(const PlacementArchetype& archetype, int days, std::uint64_t seed,
                              std::int64_t start_ts, const std::string& node_id);

// `count` scaled / circularly time-shifted variants of `base`: intensity scale
// uniform in [0.7, 1.3], shift uniform in [-3 h, +3 h] rounded to whole
// resolution steps. Deterministic in (base, count, seed).
std::vector<LightTrace> augment_trace(const LightTrace& base, int count, std::uint64_t seed);

// Mean lux over samples in [slot start, slot start + slot_seconds).
// Throws std::out_of_range if the slot is not fully covered by the trace.
double slot_lux(const LightTrace& trace, std::size_t slot_index, int slot_seconds = kSlotSeconds);

// Mean lux over days [7*week_index, 7*week_index + 7).
double weekly_mean_lux(const LightTrace& trace, std::size_t week_index);

}  // namespace ehsim
