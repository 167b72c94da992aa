#include <gtest/gtest.h>

#include "potflare/time.hpp"

namespace potflare {
namespace {

TEST(Time, ParsesAndFormatsIsoMinutes) {
  const auto t = parse_utc_minute("2003-10-28T11:01:00Z");
  ASSERT_TRUE(t);
  EXPECT_EQ(*t, make_utc_minute(2003, 10, 28, 11, 1));
  EXPECT_EQ(format_utc_minute(*t), "2003-10-28T11:01:00Z");
  EXPECT_EQ(parse_utc_minute("2003-10-28T11:01Z"), t);
  EXPECT_EQ(parse_utc_minute("2003-10-28T11:01:00.000Z"), t);
}

TEST(Time, RejectsMalformedOrSubMinuteStamps) {
  EXPECT_FALSE(parse_utc_minute("2003-10-28T11:01:30Z"));
  EXPECT_FALSE(parse_utc_minute("2003-10-28T11:01:00"));
  EXPECT_FALSE(parse_utc_minute("2003-02-30T00:00:00Z"));
  EXPECT_FALSE(parse_utc_minute("2003-10-28T24:00:00Z"));
  EXPECT_FALSE(parse_utc_minute("2003-1O-28T00:00:00Z"));
  EXPECT_FALSE(parse_utc_minute(""));
}

TEST(Time, PreEpochRoundTrip) {
  const auto t = make_utc_minute(1969, 12, 31, 23, 59);
  EXPECT_EQ(t.value, -1);
  EXPECT_EQ(format_utc_minute(t), "1969-12-31T23:59:00Z");
  EXPECT_EQ(utc_date(t), std::chrono::year{1969} / 12 / 31);
}

TEST(Time, Dates) {
  const auto d = parse_date("2003-10-28");
  ASSERT_TRUE(d);
  EXPECT_EQ(format_date(*d), "2003-10-28");
  EXPECT_EQ(utc_date(make_utc_minute(2003, 10, 28, 23, 59)), *d);
  EXPECT_FALSE(parse_date("2003-13-01"));
}

}  // namespace
}  // namespace potflare
