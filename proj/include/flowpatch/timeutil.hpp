#pragma once

#include <cstdint>
#include <string>

namespace flowpatch::timeutil {

struct CivilDate {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31
};

// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(int year, int month, int day);

// Inverse of days_from_civil.
CivilDate civil_from_days(std::int64_t days);

// Epoch seconds (UTC, no leap seconds) for date + time of day.
double epoch_seconds(const CivilDate& date, int hour = 0, int minute = 0,
                     double second = 0.0);

// Parse "YYYY-MM-DD".
CivilDate parse_date(const std::string& text);

// Parse "HH:MM" or "HH:MM:SS[.frac]" into seconds past midnight.
double parse_time_of_day(const std::string& text);

// Parse ISO-8601 "YYYY-MM-DD[T ]HH:MM:SS[.frac][Z]" or a bare date.
double parse_iso8601(const std::string& text);

// Format epoch seconds as "YYYY-MM-DDTHH:MM:SS[.ffffff]".
std::string format_iso8601(double epoch);

// Calendar fields of an epoch instant.
CivilDate date_of(double epoch);

inline int year_of(double epoch) { return date_of(epoch).year; }

// Day index (days since epoch) of an instant; groups trades by date.
std::int64_t day_of(double epoch);

// "YYYY-MM" key of an instant; groups windows by calendar month.
std::string month_key(double epoch);

}  // namespace flowpatch::timeutil
