#pragma once

#include <cstdint>
#include <string>

namespace ehsim {

inline constexpr std::int64_t kDaySeconds = 86400;

// Days since 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(int y, int m, int d);

// Inverse of days_from_civil.
void civil_from_days(std::int64_t z, int& y, int& m, int& d);

// Parses "YYYY-MM-DDTHH:MM:SSZ" or "YYYY-MM-DD HH:MM:SS" (assumed UTC) or a
// bare "YYYY-MM-DD". Throws std::runtime_error on anything else.
std::int64_t parse_timestamp(const std::string& text);

// ISO-8601 UTC rendering, always with trailing 'Z'.
std::string format_timestamp(std::int64_t ts);

// Day of week with Monday = 0 ... Sunday = 6, after shifting the UTC
// timestamp into local time by utc_offset_s.
int day_of_week(std::int64_t ts, int utc_offset_s = 0);

bool is_weekend(std::int64_t ts, int utc_offset_s = 0);

}  // namespace ehsim
