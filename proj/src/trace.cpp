#include "ehsim/trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ehsim/rng.hpp"

namespace ehsim {

const char* archetype_name(ArchetypeKind kind) {
    switch (kind) {
        case ArchetypeKind::Window: return "window";
        case ArchetypeKind::Door: return "door";
        case ArchetypeKind::MiddleOffice: return "middle_office";
        case ArchetypeKind::ConferenceRoom: return "conference_room";
        case ArchetypeKind::StairAccess: return "stair_access";
    }
    return "?";
}

ArchetypeKind archetype_from_name(const std::string& name) {
    for (ArchetypeKind k : {ArchetypeKind::Window, ArchetypeKind::Door, ArchetypeKind::MiddleOffice,
                            ArchetypeKind::ConferenceRoom, ArchetypeKind::StairAccess}) {
        if (name == archetype_name(k)) return k;
    }
    throw TraceParseError("unknown archetype '" + name + "'");
}

double PlacementArchetype::effective_base(bool weekend) const {
    if (base_lux >= 0) return base_lux;
    switch (kind) {
        // The entrance stays lit for security around the clock; interior
        // spots sit under corridor spill that the building dims to emergency
        // level outside working days.
        case ArchetypeKind::Door: return 20;
        case ArchetypeKind::MiddleOffice:
        case ArchetypeKind::ConferenceRoom: return weekend ? 8 : 20;
        default: return 0;
    }
}

double PlacementArchetype::effective_band() const {
    return band_lux >= 0 ? band_lux : 0;
}

double PlacementArchetype::effective_peak() const {
    if (peak_lux > 0) return peak_lux;
    switch (kind) {
        case ArchetypeKind::Window: return 1800;
        case ArchetypeKind::Door: return 700;
        case ArchetypeKind::MiddleOffice: return 700;
        case ArchetypeKind::ConferenceRoom: return 700;
        case ArchetypeKind::StairAccess: return 400;
    }
    return 0;
}

namespace {

struct RawSample {
    std::int64_t ts;
    double lux;
};

std::vector<RawSample> read_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TraceParseError("cannot open trace file '" + path + "'");
    std::vector<RawSample> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty()) continue;
        if (lineno == 1 && line.rfind("timestamp", 0) == 0) continue;  // header
        auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw TraceParseError(path + ":" + std::to_string(lineno) + ": expected 'timestamp,lux'");
        }
        RawSample s{};
        try {
            s.ts = parse_timestamp(line.substr(0, comma));
        } catch (const std::exception& e) {
            throw TraceParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        const std::string lux_text = line.substr(comma + 1);
        char* end = nullptr;
        s.lux = std::strtod(lux_text.c_str(), &end);
        if (end == lux_text.c_str() || !std::isfinite(s.lux) || s.lux < 0) {
            throw TraceParseError(path + ":" + std::to_string(lineno) + ": bad lux value '" + lux_text + "'");
        }
        rows.push_back(s);
    }
    if (rows.empty()) throw TraceParseError(path + ": no samples");
    return rows;
}

}  // namespace

LightTrace load_trace(const std::string& path, int resolution) {
    if (resolution <= 0 || kDaySeconds % resolution != 0) {
        throw std::invalid_argument("resolution must divide a day");
    }
    const auto rows = read_rows(path);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].ts <= rows[i - 1].ts) {
            throw TraceOrderError(path + ": timestamps not strictly increasing near " +
                                  format_timestamp(rows[i].ts));
        }
        const std::int64_t gap = rows[i].ts - rows[i - 1].ts;
        if (gap >= 3600) {
            throw TraceGapError(path + ": gap of " + std::to_string(gap) + " s at " +
                                format_timestamp(rows[i - 1].ts));
        }
    }

    LightTrace out;
    out.start_ts = rows.front().ts;
    out.resolution_s = resolution;
    const std::int64_t span = rows.back().ts - rows.front().ts + 1;
    const std::size_t bins = static_cast<std::size_t>((span + resolution - 1) / resolution);
    out.lux.assign(bins, 0.0);

    // Mean-aggregate samples into resolution bins; empty bins (short gaps)
    // are filled afterwards by linear interpolation between neighbours.
    std::vector<int> counts(bins, 0);
    for (const auto& r : rows) {
        const std::size_t b = static_cast<std::size_t>((r.ts - out.start_ts) / resolution);
        out.lux[b] += r.lux;
        counts[b] += 1;
    }
    std::size_t last_filled = 0;
    for (std::size_t b = 0; b < bins; ++b) {
        if (counts[b] > 0) {
            out.lux[b] /= counts[b];
            if (b > last_filled + 1) {
                const double lo = out.lux[last_filled], hi = out.lux[b];
                const double run = static_cast<double>(b - last_filled);
                for (std::size_t j = last_filled + 1; j < b; ++j) {
                    out.lux[j] = lo + (hi - lo) * (static_cast<double>(j - last_filled) / run);
                }
            }
            last_filled = b;
        }
    }

    const std::size_t per_day = out.samples_per_day();
    const std::size_t whole = (out.lux.size() / per_day) * per_day;
    if (whole == 0) throw TraceParseError(path + ": trace shorter than one day");
    out.lux.resize(whole);

    auto slash = path.find_last_of('/');
    out.node_id = slash == std::string::npos ? path : path.substr(slash + 1);
    auto dot = out.node_id.find_last_of('.');
    if (dot != std::string::npos) out.node_id.resize(dot);
    return out;
}

void save_trace(const LightTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw TraceError("cannot write trace file '" + path + "'");
    out << "timestamp,lux\n";
    char buf[64];
    for (std::size_t i = 0; i < trace.lux.size(); ++i) {
        const std::int64_t ts = trace.start_ts + static_cast<std::int64_t>(i) * trace.resolution_s;
        std::snprintf(buf, sizeof buf, "%.10g", trace.lux[i]);
        out << format_timestamp(ts) << ',' << buf << '\n';
    }
    if (!out) throw TraceError("failed writing trace file '" + path + "'");
}

namespace {

// Occupancy segments for one day, minute resolution: pairs of [begin, end)
// minutes-of-day with a light level.
struct LitSegment {
    int begin_min;
    int end_min;
    double lux;
};

std::vector<LitSegment> office_day_segments(const PlacementArchetype& a, Rng& rng) {
    // Lights toggle in 15-minute blocks across the working span; each block is
    // lit with probability `occupancy`.
    std::vector<LitSegment> segs;
    const int begin = static_cast<int>(a.work_start_hour * 60);
    const int end = static_cast<int>(a.work_end_hour * 60);
    const double level = a.effective_peak();
    for (int b = begin; b < end; b += 15) {
        if (rand_unit(rng) < a.occupancy) {
            segs.push_back({b, std::min(b + 15, end), level * rand_range(rng, 0.9, 1.1)});
        }
    }
    return segs;
}

std::vector<LitSegment> meeting_day_segments(const PlacementArchetype& a, Rng& rng) {
    // Two meetings a day, booked on the quarter hour in the afternoon block;
    // conference room lights are on only while occupied.
    std::vector<LitSegment> segs;
    const int span_begin = static_cast<int>(std::max(a.work_start_hour, 13.0) * 60);
    const int span_end = static_cast<int>(std::min(a.work_end_hour, 18.0) * 60);
    int cursor = span_begin;
    for (int i = 0; i < 2 && cursor < span_end - 30; ++i) {
        const int start = cursor + 15 * static_cast<int>(rand_index(rng, 4));
        const int len = 30 + 15 * static_cast<int>(rand_index(rng, 2));
        const int stop = std::min(start + len, span_end);
        if (stop > start) segs.push_back({start, stop, a.effective_peak() * rand_range(rng, 0.9, 1.1)});
        cursor = stop + 30;
    }
    return segs;
}

std::vector<LitSegment> door_blip_segments(const PlacementArchetype& a, Rng& rng) {
    // Motion-triggered entrance light: each trigger holds the lamp on for a
    // 15-minute timer block during the working day.
    std::vector<LitSegment> segs;
    const int n = 4 + static_cast<int>(rand_index(rng, 3));
    for (int i = 0; i < n; ++i) {
        const int start = 7 * 60 + 15 * static_cast<int>(rand_index(rng, 48));
        segs.push_back({start, start + 15, a.effective_peak()});
    }
    return segs;
}

double bell(double hour, double sunrise, double sunset) {
    if (hour < sunrise || hour >= sunset) return 0.0;
    const double x = (hour - sunrise) / (sunset - sunrise);
    const double s = std::sin(3.14159265358979323846 * x);
    return s * s;
}

}  // namespace

LightTrace generate_synthetic(const PlacementArchetype& archetype, int days, std::uint64_t seed,
                              std::int64_t start_ts, const std::string& node_id) {
    if (days <= 0) throw std::invalid_argument("days must be positive");
    if (start_ts % kDaySeconds != 0) throw std::invalid_argument("trace start must be midnight UTC");

    LightTrace out;
    out.node_id = node_id.empty() ? archetype_name(archetype.kind) : node_id;
    out.start_ts = start_ts;
    out.resolution_s = kTraceResolution;
    const std::size_t per_day = out.samples_per_day();
    out.lux.assign(static_cast<std::size_t>(days) * per_day, 0.0);

    const std::uint64_t kind_tag = static_cast<std::uint64_t>(archetype.kind) + 0x11;
    for (int day = 0; day < days; ++day) {
        Rng day_rng = make_rng(derive_seed(seed, kind_tag, static_cast<std::uint64_t>(day)));
        const std::int64_t day_ts = start_ts + static_cast<std::int64_t>(day) * kDaySeconds;
        const bool weekend = is_weekend(day_ts);
        const double base = archetype.effective_base(weekend);
        const double cloud = rand_range(day_rng, 0.78, 1.0);

        std::vector<LitSegment> segs;
        if (!weekend && archetype.effective_band() > 0) {
            segs.push_back({static_cast<int>(archetype.work_start_hour * 60),
                            static_cast<int>(archetype.work_end_hour * 60),
                            archetype.effective_band() * rand_range(day_rng, 0.9, 1.1)});
        }
        switch (archetype.kind) {
            case ArchetypeKind::MiddleOffice: {
                if (!weekend) {
                    auto blocks = office_day_segments(archetype, day_rng);
                    segs.insert(segs.end(), blocks.begin(), blocks.end());
                }
                break;
            }
            case ArchetypeKind::ConferenceRoom: {
                if (!weekend) {
                    auto meetings = meeting_day_segments(archetype, day_rng);
                    segs.insert(segs.end(), meetings.begin(), meetings.end());
                }
                break;
            }
            case ArchetypeKind::Door: {
                if (!weekend) {
                    auto blips = door_blip_segments(archetype, day_rng);
                    segs.insert(segs.end(), blips.begin(), blips.end());
                }
                break;
            }
            default:
                break;
        }

        for (std::size_t i = 0; i < per_day; ++i) {
            const double hour = static_cast<double>(i) * out.resolution_s / 3600.0;
            const int minute = static_cast<int>(i * static_cast<std::size_t>(out.resolution_s) / 60);
            double lux = 0.0;
            switch (archetype.kind) {
                case ArchetypeKind::StairAccess:
                    lux = archetype.effective_peak();
                    break;
                case ArchetypeKind::Window:
                    lux = archetype.effective_peak() * cloud * bell(hour, archetype.sunrise_hour, archetype.sunset_hour);
                    break;
                case ArchetypeKind::Door:
                case ArchetypeKind::MiddleOffice:
                case ArchetypeKind::ConferenceRoom:
                    break;
            }
            for (const auto& s : segs) {
                if (minute >= s.begin_min && minute < s.end_min) lux = std::max(lux, s.lux);
            }
            out.lux[static_cast<std::size_t>(day) * per_day + i] = std::max(lux, base);
        }
    }
    return out;
}

std::vector<LightTrace> augment_trace(const LightTrace& base, int count, std::uint64_t seed) {
    if (base.lux.empty()) throw std::invalid_argument("cannot augment an empty trace");
    std::vector<LightTrace> out;
    out.reserve(static_cast<std::size_t>(count));
    const std::int64_t n = static_cast<std::int64_t>(base.lux.size());
    for (int i = 0; i < count; ++i) {
        Rng rng = make_rng(derive_seed(seed, 0xA06, static_cast<std::uint64_t>(i)));
        const double scale = rand_range(rng, 0.7, 1.3);
        const double shift_s = rand_range(rng, -3.0 * 3600, 3.0 * 3600);
        const std::int64_t steps = std::llround(shift_s / base.resolution_s);

        LightTrace t;
        t.node_id = base.node_id + "-v" + std::to_string(i);
        t.start_ts = base.start_ts;
        t.resolution_s = base.resolution_s;
        t.lux.resize(base.lux.size());
        for (std::int64_t j = 0; j < n; ++j) {
            std::int64_t src = (j + steps) % n;
            if (src < 0) src += n;
            t.lux[static_cast<std::size_t>(j)] = scale * base.lux[static_cast<std::size_t>(src)];
        }
        out.push_back(std::move(t));
    }
    return out;
}

double slot_lux(const LightTrace& trace, std::size_t slot_index, int slot_seconds) {
    if (slot_seconds <= 0 || slot_seconds % trace.resolution_s != 0) {
        throw std::invalid_argument("slot length must be a multiple of the trace resolution");
    }
    const std::size_t per_slot = static_cast<std::size_t>(slot_seconds / trace.resolution_s);
    const std::size_t first = slot_index * per_slot;
    if (first + per_slot > trace.lux.size()) {
        throw std::out_of_range("slot " + std::to_string(slot_index) + " not covered by trace '" +
                                trace.node_id + "'");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < per_slot; ++i) sum += trace.lux[first + i];
    return sum / static_cast<double>(per_slot);
}

double weekly_mean_lux(const LightTrace& trace, std::size_t week_index) {
    const std::size_t per_day = trace.samples_per_day();
    const std::size_t first = week_index * 7 * per_day;
    const std::size_t after = first + 7 * per_day;
    if (after > trace.lux.size()) {
        throw std::out_of_range("week " + std::to_string(week_index) + " not covered by trace '" +
                                trace.node_id + "'");
    }
    double sum = 0.0;
    for (std::size_t i = first; i < after; ++i) sum += trace.lux[i];
    return sum / static_cast<double>(7 * per_day);
}

}  // namespace ehsim
