#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace aqcast {

/// A point in time: seconds since 1970-01-01T00:00 (no timezone; station
/// exports are local civil time treated as an opaque monotone axis).
using Instant = std::int64_t;

inline constexpr Instant kHour = 3600;
/// Station cadence: one observation every 8 hours.
inline constexpr Instant kCadence = 8 * kHour;

struct CivilTime {
  int year;
  int month;   // 1..12
  int day;     // 1..31
  int hour;    // 0..23
  int minute;  // 0..59
};

/// Parses `YYYY-MM-DDTHH:MM` (an optional trailing `:SS` is accepted and
/// folded in). Throws ParseError on anything else.
Instant parse_instant(std::string_view text);

/// Formats as `YYYY-MM-DDTHH:MM`, the canonical CSV timestamp.
std::string format_instant(Instant t);

Instant make_instant(int year, int month, int day, int hour = 0, int minute = 0);

CivilTime civil_from_instant(Instant t);

}  // namespace aqcast
