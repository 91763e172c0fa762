#include <doctest.h>

#include "aqcast/errors.hpp"
#include "aqcast/time_instant.hpp"

using namespace aqcast;

TEST_CASE("instant round-trip") {
  for (const char* text : {"2019-01-01T00:00", "2020-02-29T16:00", "2020-12-10T08:00",
                           "1999-06-15T23:59"}) {
    const Instant t = parse_instant(text);
    CHECK(format_instant(t) == text);
  }
}

TEST_CASE("instant arithmetic matches the calendar") {
  CHECK(parse_instant("2020-01-02T00:00") - parse_instant("2020-01-01T00:00") == 86400);
  CHECK(parse_instant("2020-03-01T00:00") - parse_instant("2020-02-28T00:00") == 2 * 86400);
  CHECK(parse_instant("2019-03-01T00:00") - parse_instant("2019-02-28T00:00") == 86400);
  CHECK(make_instant(2020, 6, 1) == parse_instant("2020-06-01T00:00"));
}

TEST_CASE("optional seconds are folded in") {
  CHECK(parse_instant("2020-01-01T00:00:30") == parse_instant("2020-01-01T00:00") + 30);
}

TEST_CASE("civil decomposition") {
  const CivilTime c = civil_from_instant(parse_instant("2020-06-15T08:30"));
  CHECK(c.year == 2020);
  CHECK(c.month == 6);
  CHECK(c.day == 15);
  CHECK(c.hour == 8);
  CHECK(c.minute == 30);
}

TEST_CASE("malformed timestamps throw") {
  CHECK_THROWS_AS(parse_instant("2020-13-01T00:00"), ParseError);
  CHECK_THROWS_AS(parse_instant("2020-02-30T00:00"), ParseError);
  CHECK_THROWS_AS(parse_instant("2020-01-01 00:00"), ParseError);
  CHECK_THROWS_AS(parse_instant("garbage"), ParseError);
  CHECK_THROWS_AS(parse_instant("2020-01-01T24:00"), ParseError);
}
