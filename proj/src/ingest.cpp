#include "monsoon/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <sstream>

#include "httplib.h"
#include "monsoon/errors.hpp"
#include "monsoon/util.hpp"

namespace monsoon {

namespace {

std::optional<double> parse_real(std::string_view s) {
  double v = 0.0;
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

std::optional<long> parse_int(std::string_view s) {
  long v = 0;
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

// strips trailing CR so CRLF input parses like LF input
std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

// --- DailyRainfallSeries ---

void DailyRainfallSeries::set_year(int year, std::vector<double> daily) {
  if (static_cast<int>(daily.size()) != kSeasonDays) {
    MonsoonError e(ErrorCode::IncompleteYear,
                   "year " + std::to_string(year) + " has " + std::to_string(daily.size()) +
                       " JJAS entries, expected 122");
    e.year = year;
    throw e;
  }
  for (double v : daily)
    if (v < 0.0) {
      MonsoonError e(ErrorCode::NegativeRainfall,
                     "negative rainfall in year " + std::to_string(year));
      e.year = year;
      throw e;
    }
  by_year_[year] = std::move(daily);
}

const std::vector<double>& DailyRainfallSeries::daily(int year) const {
  auto it = by_year_.find(year);
  if (it == by_year_.end()) {
    MonsoonError e(ErrorCode::CoverageGap, "rain year " + std::to_string(year) + " not present");
    e.year = year;
    throw e;
  }
  return it->second;
}

std::vector<int> DailyRainfallSeries::years() const {
  std::vector<int> out;
  out.reserve(by_year_.size());
  for (const auto& [y, _] : by_year_) out.push_back(y);
  return out;
}

double DailyRainfallSeries::seasonal_total(int year) const {
  const auto& d = daily(year);
  double total = 0.0;
  for (double v : d) total += v;  // fixed day order, no reassociation
  return total;
}

std::vector<DailyRainfallSeries::Entry> DailyRainfallSeries::entries() const {
  std::vector<Entry> out;
  out.reserve(by_year_.size() * kSeasonDays);
  for (const auto& [year, daily] : by_year_) {
    int index = 0;
    for (int m = 6; m <= 9; ++m) {
      for (int d = 1; d <= jjas_month_len(m); ++d, ++index)
        out.push_back(Entry{Date{year, m, d}, daily[static_cast<std::size_t>(index)]});
    }
  }
  return out;
}

// --- rainfall CSV ---

DailyRainfallSeries parse_daily_rainfall_csv(std::istream& in) {
  std::string raw;
  long line_no = 0;
  bool have_prev = false;
  Date prev{};
  std::map<int, std::vector<double>> per_year;
  std::map<int, int> per_year_count;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = strip_cr(raw);
    if (line_no == 1) {
      if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.remove_prefix(3);
      if (line != "date,rain_mm")
        raise_at_line(ErrorCode::MalformedRow, "expected header 'date,rain_mm'", line_no);
      continue;
    }
    if (is_blank(line)) continue;
    const auto fields = split_fields(line, ',');
    if (fields.size() != 2)
      raise_at_line(ErrorCode::MalformedRow,
                    "expected 2 fields, got " + std::to_string(fields.size()), line_no);
    const auto date = parse_iso_date(fields[0]);
    if (!date)
      raise_at_line(ErrorCode::MalformedRow, "bad date '" + std::string(fields[0]) + "'", line_no);
    const auto rain = parse_real(fields[1]);
    if (!rain)
      raise_at_line(ErrorCode::MalformedRow, "bad value '" + std::string(fields[1]) + "'", line_no);
    if (!is_jjas_month(date->month)) {
      MonsoonError e(ErrorCode::NonJjasDate, format_iso_date(*date) + " is outside June-September");
      e.line = line_no;
      e.year = date->year;
      e.month = date->month;
      throw e;
    }
    if (have_prev) {
      if (*date == prev) {
        MonsoonError e(ErrorCode::DuplicateDate, "duplicate date " + format_iso_date(*date));
        e.line = line_no;
        throw e;
      }
      if (*date < prev)
        raise_at_line(ErrorCode::MalformedRow,
                      "dates not strictly increasing at " + format_iso_date(*date), line_no);
    }
    if (*rain < 0.0) {
      MonsoonError e(ErrorCode::NegativeRainfall,
                     "negative rainfall " + format_double(*rain) + " on " + format_iso_date(*date));
      e.line = line_no;
      throw e;
    }
    prev = *date;
    have_prev = true;
    auto& year_vec = per_year[date->year];
    if (year_vec.empty()) year_vec.assign(kSeasonDays, 0.0);
    year_vec[static_cast<std::size_t>(jjas_day_index(date->month, date->day))] = *rain;
    per_year_count[date->year] += 1;
  }

  DailyRainfallSeries series;
  for (auto& [year, daily] : per_year) {
    if (per_year_count[year] != kSeasonDays) {
      MonsoonError e(ErrorCode::IncompleteYear,
                     "year " + std::to_string(year) + " has " +
                         std::to_string(per_year_count[year]) + " JJAS rows, expected 122");
      e.year = year;
      throw e;
    }
    series.set_year(year, std::move(daily));
  }
  return series;
}

std::string serialize_daily_rainfall_csv(const DailyRainfallSeries& series) {
  std::string out = "date,rain_mm\n";
  for (const auto& entry : series.entries()) {
    out += format_iso_date(entry.date);
    out += ',';
    out += format_double(entry.rain_mm);
    out += '\n';
  }
  return out;
}

// --- NOAA monthly index text ---

MonthlyIndexSeries parse_noaa_index_text(std::istream& in, const std::string& name) {
  MonthlyIndexSeries series;
  series.name = name;

  std::string raw;
  long line_no = 0;
  long first_year = 0, last_year = 0;
  bool have_header = false;
  std::optional<double> sentinel;

  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = strip_cr(raw);
    if (is_blank(line)) continue;
    const auto tokens = split_whitespace(line);
    if (!have_header) {
      if (tokens.size() != 2)
        raise_at_line(ErrorCode::MalformedHeader, "expected 'firstYear lastYear'", line_no);
      const auto a = parse_int(tokens[0]);
      const auto b = parse_int(tokens[1]);
      if (!a || !b || *a > *b)
        raise_at_line(ErrorCode::MalformedHeader, "bad year range '" + std::string(line) + "'",
                      line_no);
      first_year = *a;
      last_year = *b;
      have_header = true;
      continue;
    }
    if (tokens.size() == 1) {
      const auto s = parse_real(tokens[0]);
      if (!s) raise_at_line(ErrorCode::WrongFieldCount, "expected missing-value sentinel", line_no);
      sentinel = *s;
      break;  // anything after the sentinel line is footer text
    }
    if (tokens.size() != 13)
      raise_at_line(ErrorCode::WrongFieldCount,
                    "expected year + 12 values, got " + std::to_string(tokens.size()) + " fields",
                    line_no);
    const auto year = parse_int(tokens[0]);
    if (!year) raise_at_line(ErrorCode::WrongFieldCount, "bad year field", line_no);
    if (*year < first_year || *year > last_year) {
      MonsoonError e(ErrorCode::YearOutOfDeclaredRange,
                     "year " + std::to_string(*year) + " outside declared " +
                         std::to_string(first_year) + ".." + std::to_string(last_year));
      e.line = line_no;
      e.year = static_cast<int>(*year);
      throw e;
    }
    for (int m = 1; m <= 12; ++m) {
      const auto v = parse_real(tokens[static_cast<std::size_t>(m)]);
      if (!v) raise_at_line(ErrorCode::WrongFieldCount, "bad value field", line_no);
      const auto key = std::make_pair(static_cast<int>(*year), m);
      if (series.values.count(key)) {
        MonsoonError e(ErrorCode::DuplicateKey, "duplicate year row " + std::to_string(*year));
        e.line = line_no;
        e.year = static_cast<int>(*year);
        throw e;
      }
      series.values[key] = *v;
    }
  }
  if (!have_header) raise(ErrorCode::MalformedHeader, "empty index file");

  if (sentinel) {
    // sentinel-valued months are missing data: drop them so the stored map
    // never contains the sentinel
    for (auto it = series.values.begin(); it != series.values.end();)
      it = it->second == *sentinel ? series.values.erase(it) : std::next(it);
  }
  return series;
}

std::string serialize_noaa_index_text(const MonthlyIndexSeries& series, double sentinel) {
  if (series.values.empty()) raise(ErrorCode::EmptyData, "no index values to serialize");
  const int first = series.values.begin()->first.first;
  const int last = series.values.rbegin()->first.first;
  std::string out = std::to_string(first) + " " + std::to_string(last) + "\n";
  for (int y = first; y <= last; ++y) {
    out += std::to_string(y);
    for (int m = 1; m <= 12; ++m) {
      const auto v = series.value(y, m);
      out += ' ';
      out += format_double(v ? *v : sentinel);
    }
    out += '\n';
  }
  out += format_double(sentinel);
  out += '\n';
  return out;
}

// --- IOD CSV ---

MonthlyIndexSeries parse_iod_csv(std::istream& in) {
  MonthlyIndexSeries series;
  series.name = "iod_dmi";

  std::string raw;
  long line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = strip_cr(raw);
    if (line_no == 1) {
      if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.remove_prefix(3);
      if (line != "year,month,dmi")
        raise_at_line(ErrorCode::MalformedRow, "expected header 'year,month,dmi'", line_no);
      continue;
    }
    if (is_blank(line)) continue;
    const auto fields = split_fields(line, ',');
    if (fields.size() != 3) raise_at_line(ErrorCode::MalformedRow, "expected 3 fields", line_no);
    const auto year = parse_int(fields[0]);
    const auto month = parse_int(fields[1]);
    const auto dmi = parse_real(fields[2]);
    if (!year || !month || !dmi || *month < 1 || *month > 12)
      raise_at_line(ErrorCode::MalformedRow, "bad row '" + std::string(line) + "'", line_no);
    const auto key = std::make_pair(static_cast<int>(*year), static_cast<int>(*month));
    if (series.values.count(key)) {
      MonsoonError e(ErrorCode::DuplicateKey,
                     "duplicate key " + format_year_month(key.first, key.second));
      e.line = line_no;
      e.year = key.first;
      e.month = key.second;
      throw e;
    }
    series.values[key] = *dmi;
  }
  return series;
}

std::string serialize_iod_csv(const MonthlyIndexSeries& series) {
  std::string out = "year,month,dmi\n";
  for (const auto& [key, v] : series.values) {
    out += std::to_string(key.first);
    out += ',';
    out += std::to_string(key.second);
    out += ',';
    out += format_double(v);
    out += '\n';
  }
  return out;
}

std::optional<double> MonthlyIndexSeries::value(int year, int month) const {
  auto it = values.find({year, month});
  if (it == values.end()) return std::nullopt;
  return it->second;
}

std::optional<int> CategoricalIodSeries::value(int year, int month) const {
  auto it = values.find({year, month});
  if (it == values.end()) return std::nullopt;
  return it->second;
}

CategoricalIodSeries categorize_iod(const MonthlyIndexSeries& dmi, double pos_threshold,
                                    double neg_threshold) {
  if (!(pos_threshold > neg_threshold))
    throw std::invalid_argument("categorize_iod: pos_threshold must exceed neg_threshold");
  CategoricalIodSeries out;
  for (const auto& [key, v] : dmi.values) {
    int c = 0;
    if (v > pos_threshold)
      c = 1;
    else if (v < neg_threshold)
      c = -1;
    out.values[key] = c;
  }
  return out;
}

// --- fetch ---

std::string fetch_source(const SourceSpec& spec) {
  if (spec.location.empty()) raise(ErrorCode::IoError, "source location is empty");
  const bool is_url =
      spec.location.rfind("http://", 0) == 0 || spec.location.rfind("https://", 0) == 0;
  if (!is_url) return read_text_file(spec.location);

  if (spec.cache_dir.empty()) raise(ErrorCode::IoError, "cache_dir required for URL sources");
  std::filesystem::create_directories(spec.cache_dir);
  const std::filesystem::path cache_path =
      std::filesystem::path(spec.cache_dir) / sha256_hex(spec.location);
  if (std::filesystem::exists(cache_path)) return read_text_file(cache_path.string());

  const std::size_t host_end = spec.location.find('/', spec.location.find("//") + 2);
  const std::string base =
      host_end == std::string::npos ? spec.location : spec.location.substr(0, host_end);
  const std::string path = host_end == std::string::npos ? "/" : spec.location.substr(host_end);

  httplib::Client client(base);
  client.set_connection_timeout(10);
  client.set_read_timeout(30);
  auto res = client.Get(path);
  if (!res)
    raise(ErrorCode::NetworkUnavailable,
          "fetch failed for " + spec.location + " and no cached copy exists");
  if (res->status != 200) {
    MonsoonError e(ErrorCode::HttpStatus,
                   "HTTP " + std::to_string(res->status) + " from " + spec.location);
    e.http_status = res->status;
    throw e;
  }
  write_file_atomic(cache_path.string(), res->body);
  return res->body;
}

// --- coverage ---

bool CoverageReport::complete_for(int year) const {
  auto it = missing.find(year);
  return it == missing.end() || it->second.empty();
}

std::vector<int> CoverageReport::complete_years(int first, int last) const {
  std::vector<int> out;
  for (int y = first; y <= last; ++y)
    if (complete_for(y)) out.push_back(y);
  return out;
}

std::string CoverageReport::to_text() const {
  std::string out;
  bool any = false;
  for (const auto& [year, items] : missing) {
    if (items.empty()) continue;
    any = true;
    out += std::to_string(year) + ":";
    for (const auto& item : items) {
      out += " [" + item.input + " " +
             (item.month > 0 ? format_year_month(item.year, item.month)
                             : std::to_string(item.year)) +
             " missing; " + item.note + "]";
    }
    out += '\n';
  }
  if (!any) out = "coverage complete for all requested target years\n";
  return out;
}

CoverageReport validate_coverage(const DailyRainfallSeries& rain, const MonthlyIndexSeries& nino,
                                 const CategoricalIodSeries& iod, int first_year, int last_year) {
  if (first_year > last_year) throw std::invalid_argument("validate_coverage: empty year range");
  CoverageReport report;
  for (int y = first_year; y <= last_year; ++y) {
    auto& items = report.missing[y];
    if (!rain.has_year(y)) items.push_back(CoverageItem{"rain", y, 0, "target JJAS season"});
    if (!rain.has_year(y - 1))
      items.push_back(CoverageItem{"rain", y - 1, 0, "prior season needed for lookback/seeding"});
    // 13-month window May(T) .. May(T+1), T = y-1
    for (int k = 0; k < 13; ++k) {
      const int month = (4 + k) % 12 + 1;
      const int yy = k < 8 ? y - 1 : y;
      if (!nino.has(yy, month))
        items.push_back(CoverageItem{"nino34", yy, month, "13-month index window"});
    }
    for (int m = 1; m <= 12; ++m) {
      if (!iod.has(y, m))
        items.push_back(CoverageItem{"iod", y, m, "IOD months of the target year"});
    }
  }
  return report;
}

}  // namespace monsoon
