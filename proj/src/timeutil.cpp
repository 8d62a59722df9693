#include "ehsim/timeutil.hpp"

#include <cstdio>
#include <stdexcept>

namespace ehsim {

std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);               // [0, 399]
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;    // [0, 365]
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;              // [0, 146096]
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yr + (m <= 2));
}

std::int64_t parse_timestamp(const std::string& text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    char sep = 0, tail = 0;
    int n = std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%d%c", &y, &mo, &d, &sep, &h, &mi, &s, &tail);
    bool ok = false;
    if (n == 3) {
        ok = true;  // bare date, midnight UTC
    } else if (n >= 7 && (sep == 'T' || sep == ' ')) {
        ok = (n == 7) || (n == 8 && tail == 'Z');
    }
    if (!ok || mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 60) {
        throw std::runtime_error("bad timestamp: '" + text + "'");
    }
    return days_from_civil(y, mo, d) * kDaySeconds + h * 3600 + mi * 60 + s;
}

std::string format_timestamp(std::int64_t ts) {
    std::int64_t days = ts / kDaySeconds;
    std::int64_t rem = ts % kDaySeconds;
    if (rem < 0) {
        rem += kDaySeconds;
        days -= 1;
    }
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02lld:%02lld:%02lldZ", y, m, d,
                  static_cast<long long>(rem / 3600), static_cast<long long>((rem / 60) % 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

int day_of_week(std::int64_t ts, int utc_offset_s) {
    std::int64_t local = ts + utc_offset_s;
    std::int64_t days = local / kDaySeconds;
    if (local % kDaySeconds < 0) days -= 1;
    // 1970-01-01 was a Thursday; shift so Monday = 0.
    std::int64_t dow = (days + 3) % 7;
    if (dow < 0) dow += 7;
    return static_cast<int>(dow);
}

bool is_weekend(std::int64_t ts, int utc_offset_s) { return day_of_week(ts, utc_offset_s) >= 5; }

}  // namespace ehsim
