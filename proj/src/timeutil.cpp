#include "flowpatch/timeutil.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "flowpatch/errors.hpp"

namespace flowpatch::timeutil {

// Howard Hinnant's branchless civil date algorithms.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m),
                   static_cast<int>(d)};
}

double epoch_seconds(const CivilDate& date, int hour, int minute, double second) {
  return static_cast<double>(days_from_civil(date.year, date.month, date.day)) *
             86400.0 +
         hour * 3600.0 + minute * 60.0 + second;
}

namespace {

bool all_digits(const std::string& s, std::size_t from, std::size_t to) {
  if (to > s.size()) return false;
  for (std::size_t i = from; i < to; ++i)
    if (s[i] < '0' || s[i] > '9') return false;
  return true;
}

int to_int(const std::string& s, std::size_t from, std::size_t to) {
  int v = 0;
  for (std::size_t i = from; i < to; ++i) v = v * 10 + (s[i] - '0');
  return v;
}

}  // namespace

CivilDate parse_date(const std::string& text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
      !all_digits(text, 0, 4) || !all_digits(text, 5, 7) ||
      !all_digits(text, 8, 10))
    throw DataError("bad date: '" + text + "'");
  CivilDate d{to_int(text, 0, 4), to_int(text, 5, 7), to_int(text, 8, 10)};
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31)
    throw DataError("bad date: '" + text + "'");
  return d;
}

double parse_time_of_day(const std::string& text) {
  if (text.size() < 5 || text[2] != ':' || !all_digits(text, 0, 2) ||
      !all_digits(text, 3, 5))
    throw DataError("bad time: '" + text + "'");
  int hour = to_int(text, 0, 2);
  int minute = to_int(text, 3, 5);
  double second = 0.0;
  if (text.size() > 5) {
    if (text[5] != ':' || text.size() < 8 || !all_digits(text, 6, 8))
      throw DataError("bad time: '" + text + "'");
    second = to_int(text, 6, 8);
    if (text.size() > 8) {
      if (text[8] != '.' || text.size() == 9 ||
          !all_digits(text, 9, text.size()))
        throw DataError("bad time: '" + text + "'");
      double frac = 0.0, scale = 0.1;
      for (std::size_t i = 9; i < text.size(); ++i) {
        frac += (text[i] - '0') * scale;
        scale *= 0.1;
      }
      second += frac;
    }
  }
  if (hour > 23 || minute > 59 || second >= 61.0)
    throw DataError("bad time: '" + text + "'");
  return hour * 3600.0 + minute * 60.0 + second;
}

double parse_iso8601(const std::string& text) {
  std::string s = text;
  if (!s.empty() && (s.back() == 'Z' || s.back() == 'z')) s.pop_back();
  if (s.size() == 10) {
    CivilDate d = parse_date(s);
    return epoch_seconds(d, 0, 0, 0.0);
  }
  if (s.size() < 16 || (s[10] != 'T' && s[10] != ' '))
    throw DataError("bad timestamp: '" + text + "'");
  CivilDate d = parse_date(s.substr(0, 10));
  double tod = parse_time_of_day(s.substr(11));
  return static_cast<double>(days_from_civil(d.year, d.month, d.day)) * 86400.0 +
         tod;
}

std::string format_iso8601(double epoch) {
  double days = std::floor(epoch / 86400.0);
  double rem = epoch - days * 86400.0;
  // Round sub-second part to microseconds and carry.
  std::int64_t micros = static_cast<std::int64_t>(std::llround(rem * 1e6));
  std::int64_t day_index = static_cast<std::int64_t>(days);
  if (micros >= 86400000000LL) {
    micros -= 86400000000LL;
    ++day_index;
  }
  CivilDate d = civil_from_days(day_index);
  std::int64_t whole = micros / 1000000;
  std::int64_t frac = micros % 1000000;
  int hour = static_cast<int>(whole / 3600);
  int minute = static_cast<int>((whole / 60) % 60);
  int second = static_cast<int>(whole % 60);
  char buf[40];
  if (frac != 0) {
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%06lld",
                  d.year, d.month, d.day, hour, minute, second,
                  static_cast<long long>(frac));
  } else {
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d", d.year,
                  d.month, d.day, hour, minute, second);
  }
  return buf;
}

CivilDate date_of(double epoch) { return civil_from_days(day_of(epoch)); }

std::int64_t day_of(double epoch) {
  return static_cast<std::int64_t>(std::floor(epoch / 86400.0));
}

std::string month_key(double epoch) {
  CivilDate d = date_of(epoch);
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", d.year, d.month);
  return buf;
}

}  // namespace flowpatch::timeutil
