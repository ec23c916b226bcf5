#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace monsoon {

struct Date {
  int year = 0;
  int month = 0;
  int day = 0;
  auto operator<=>(const Date&) const = default;
};

// The monsoon season: June 1 through September 30, always 122 days.
inline constexpr int kSeasonDays = 122;

bool is_leap_year(int year);
int days_in_month(int year, int month);
bool is_jjas_month(int month);

// length of a JJAS month: 30/31/31/30 for June/July/August/September
int jjas_month_len(int month);

// day-of-season index 0..121 for a JJAS (month, day)
int jjas_day_index(int month, int day);

// calendar month (6..9) containing day-of-season index 0..121
int jjas_month_of_index(int index);

// strict YYYY-MM-DD parse with a real calendar-day validity check
std::optional<Date> parse_iso_date(std::string_view text);

std::string format_iso_date(const Date& d);
std::string format_year_month(int year, int month);

}  // namespace monsoon
