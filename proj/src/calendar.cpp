#include "monsoon/calendar.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace monsoon {

bool is_leap_year(int year) {
  return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_month(int year, int month) {
  static constexpr std::array<int, 13> lens = {0, 31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2 && is_leap_year(year)) return 29;
  return lens[static_cast<std::size_t>(month)];
}

bool is_jjas_month(int month) { return month >= 6 && month <= 9; }

int jjas_month_len(int month) {
  switch (month) {
    case 6: return 30;
    case 7: return 31;
    case 8: return 31;
    case 9: return 30;
  }
  return 0;
}

int jjas_day_index(int month, int day) {
  int offset = 0;
  for (int m = 6; m < month; ++m) offset += jjas_month_len(m);
  return offset + day - 1;
}

int jjas_month_of_index(int index) {
  for (int m = 6; m <= 9; ++m) {
    const int len = jjas_month_len(m);
    if (index < len) return m;
    index -= len;
  }
  return 0;
}

std::optional<Date> parse_iso_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  auto parse_int = [](std::string_view s, int& out) {
    const auto* begin = s.data();
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
  };
  Date d;
  if (!parse_int(text.substr(0, 4), d.year) || !parse_int(text.substr(5, 2), d.month) ||
      !parse_int(text.substr(8, 2), d.day))
    return std::nullopt;
  if (d.month < 1 || d.month > 12) return std::nullopt;
  if (d.day < 1 || d.day > days_in_month(d.year, d.month)) return std::nullopt;
  return d;
}

std::string format_iso_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
  return buf;
}

std::string format_year_month(int year, int month) {
  char buf[12];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
  return buf;
}

}  // namespace monsoon
