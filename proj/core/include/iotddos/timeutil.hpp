#pragma once

#include <cstdint>
#include <string>

namespace iotddos {

// Timestamps are seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

inline constexpr std::int64_t kSlotSeconds = 600;  // 10-minute grid

bool is_grid_aligned(Timestamp t);

// "YYYY-MM-DD HH:MM:SS" <-> seconds since epoch.
Timestamp parse_time(const std::string& s);
std::string format_time(Timestamp t);

// "HH:MM" offset within a day, in seconds.
std::int64_t parse_time_of_day(const std::string& s);

struct TimeRange {
    Timestamp begin = 0;  // inclusive, grid-aligned
    Timestamp end = 0;    // exclusive, grid-aligned

    std::int64_t num_slots() const { return (end - begin) / kSlotSeconds; }
};

}  // namespace iotddos
