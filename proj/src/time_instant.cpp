#include "aqcast/time_instant.hpp"

#include <charconv>
#include <cstdio>

#include "aqcast/errors.hpp"

namespace aqcast {

namespace {

// Days since 1970-01-01 for a civil date (proleptic Gregorian).
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);                 // [0, 399]
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 + static_cast<unsigned>(d) - 1;  // [0, 365]
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;                // [0, 146096]
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);              // [0, 146096]
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;  // [0, 399]
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);              // [0, 365]
  const unsigned mp = (5 * doy + 2) / 153;                                   // [0, 11]
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yy + (m <= 2));
}

int parse_int_field(std::string_view s, std::size_t pos, std::size_t len,
                    std::string_view whole) {
  int value = 0;
  const char* first = s.data() + pos;
  auto [ptr, ec] = std::from_chars(first, first + len, value);
  if (ec != std::errc{} || ptr != first + len)
    throw ParseError("bad timestamp: '" + std::string(whole) + "'");
  return value;
}

int days_in_month(int y, int m) {
  static constexpr int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2) {
    const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    return leap ? 29 : 28;
  }
  return lengths[m - 1];
}

}  // namespace

Instant parse_instant(std::string_view text) {
  // YYYY-MM-DDTHH:MM with optional :SS
  if (text.size() != 16 && text.size() != 19)
    throw ParseError("bad timestamp: '" + std::string(text) + "'");
  if (text[4] != '-' || text[7] != '-' || text[10] != 'T' || text[13] != ':')
    throw ParseError("bad timestamp: '" + std::string(text) + "'");
  if (text.size() == 19 && text[16] != ':')
    throw ParseError("bad timestamp: '" + std::string(text) + "'");

  const int year = parse_int_field(text, 0, 4, text);
  const int month = parse_int_field(text, 5, 2, text);
  const int day = parse_int_field(text, 8, 2, text);
  const int hour = parse_int_field(text, 11, 2, text);
  const int minute = parse_int_field(text, 14, 2, text);
  const int second = text.size() == 19 ? parse_int_field(text, 17, 2, text) : 0;

  if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month) ||
      hour > 23 || minute > 59 || second > 59)
    throw ParseError("bad timestamp: '" + std::string(text) + "'");

  return days_from_civil(year, month, day) * 86400 + hour * 3600 + minute * 60 + second;
}

std::string format_instant(Instant t) {
  const CivilTime c = civil_from_instant(t);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d", c.year, c.month, c.day,
                c.hour, c.minute);
  return std::string(buf);
}

Instant make_instant(int year, int month, int day, int hour, int minute) {
  return days_from_civil(year, month, day) * 86400 + hour * 3600 + minute * 60;
}

CivilTime civil_from_instant(Instant t) {
  std::int64_t days = t / 86400;
  std::int64_t rem = t % 86400;
  if (rem < 0) {
    rem += 86400;
    days -= 1;
  }
  CivilTime c{};
  civil_from_days(days, c.year, c.month, c.day);
  c.hour = static_cast<int>(rem / 3600);
  c.minute = static_cast<int>((rem % 3600) / 60);
  return c;
}

}  // namespace aqcast
