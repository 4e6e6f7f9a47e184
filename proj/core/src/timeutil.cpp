#include "iotddos/timeutil.hpp"

#include <cstdio>
#include <stdexcept>

namespace iotddos {

namespace {

// Howard Hinnant's civil-days algorithms.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<int>(yoe) + static_cast<int>(era) * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y += m <= 2;
}

}  // namespace

bool is_grid_aligned(Timestamp t) { return t % kSlotSeconds == 0; }

Timestamp parse_time(const std::string& s) {
    int y, mo, d, h, mi, se;
    char tail;
    if (std::sscanf(s.c_str(), "%d-%d-%d %d:%d:%d%c", &y, &mo, &d, &h, &mi,
                    &se, &tail) != 6) {
        throw std::invalid_argument("bad timestamp (want YYYY-MM-DD HH:MM:SS): '" + s + "'");
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 ||
        mi > 59 || se < 0 || se > 59) {
        throw std::invalid_argument("timestamp field out of range: '" + s + "'");
    }
    return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + se;
}

std::string format_time(Timestamp t) {
    std::int64_t days = t / 86400;
    std::int64_t sod = t % 86400;
    if (sod < 0) {
        sod += 86400;
        days -= 1;
    }
    int y, mo, d;
    civil_from_days(days, y, mo, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02ld:%02ld:%02ld", y, mo,
                  d, sod / 3600, (sod / 60) % 60, sod % 60);
    return buf;
}

std::int64_t parse_time_of_day(const std::string& s) {
    int h, mi;
    char tail;
    if (std::sscanf(s.c_str(), "%d:%d%c", &h, &mi, &tail) != 2 || h < 0 ||
        h > 23 || mi < 0 || mi > 59) {
        throw std::invalid_argument("bad time of day (want HH:MM): '" + s + "'");
    }
    return h * 3600 + mi * 60;
}

}  // namespace iotddos
