#pragma once

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "monsoon/calendar.hpp"

namespace monsoon {

// All-India daily rainfall over the JJAS season. Only complete years are
// representable: every stored year carries exactly 122 non-negative values.
class DailyRainfallSeries {
 public:
  void set_year(int year, std::vector<double> daily);  // must be 122 values
  bool has_year(int year) const { return by_year_.count(year) > 0; }
  const std::vector<double>& daily(int year) const;
  std::vector<int> years() const;
  std::size_t year_count() const { return by_year_.size(); }

  // exact left-to-right sum of the 122 stored values
  double seasonal_total(int year) const;

  struct Entry {
    Date date;
    double rain_mm;
  };
  std::vector<Entry> entries() const;

 private:
  std::map<int, std::vector<double>> by_year_;
};

// Monthly climate-index values. Missing months are absent keys, never
// sentinel-valued entries.
struct MonthlyIndexSeries {
  std::string name;
  std::map<std::pair<int, int>, double> values;  // (year, month 1..12) -> value

  std::optional<double> value(int year, int month) const;
  bool has(int year, int month) const { return values.count({year, month}) > 0; }
};

// IOD state per (year, month), one of -1 / 0 / +1.
struct CategoricalIodSeries {
  std::map<std::pair<int, int>, int> values;

  std::optional<int> value(int year, int month) const;
  bool has(int year, int month) const { return values.count({year, month}) > 0; }
};

enum class SourceKind { RainfallCsv, NoaaIndexText, IodCsv };

struct SourceSpec {
  SourceKind kind = SourceKind::RainfallCsv;
  std::string location;   // local path or http(s) URL
  std::string cache_dir;  // used for URL sources
};

// --- parsers (pure functions over character streams) ---

// header `date,rain_mm`, body `YYYY-MM-DD,<real>`; JJAS dates only,
// strictly increasing, 122 rows per year
DailyRainfallSeries parse_daily_rainfall_csv(std::istream& in);
std::string serialize_daily_rainfall_csv(const DailyRainfallSeries& series);

// NOAA PSL monthly-anomaly layout: `firstYear lastYear` header, one row of
// 12 values per year, a single-value missing sentinel line, free-text footer
MonthlyIndexSeries parse_noaa_index_text(std::istream& in, const std::string& name = "nino34");
std::string serialize_noaa_index_text(const MonthlyIndexSeries& series,
                                      double sentinel = -99.99);

// header `year,month,dmi`
MonthlyIndexSeries parse_iod_csv(std::istream& in);
std::string serialize_iod_csv(const MonthlyIndexSeries& series);

// +1 above pos_threshold, -1 below neg_threshold, 0 inside the band
CategoricalIodSeries categorize_iod(const MonthlyIndexSeries& dmi, double pos_threshold,
                                    double neg_threshold);

// Local paths are read directly. URLs hit the cache first
// (<cache_dir>/<sha256(location)>); on a miss the body is fetched over HTTP
// and cached atomically before returning.
std::string fetch_source(const SourceSpec& spec);

// --- coverage ---

struct CoverageItem {
  std::string input;  // "rain", "nino34", "iod"
  int year = 0;       // missing key
  int month = 0;      // 0 when a whole year is missing
  std::string note;
};

struct CoverageReport {
  // target year -> everything missing for forecasting that year
  std::map<int, std::vector<CoverageItem>> missing;

  bool complete_for(int year) const;
  std::vector<int> complete_years(int first, int last) const;
  std::string to_text() const;
};

// Checks, per target year in [first_year, last_year]: the 122-day rain
// season, the prior-year rain season (lookback/seed requirement), the
// 13-month index window May(T)..May(T+1), and the 12 IOD months of the
// target year.
CoverageReport validate_coverage(const DailyRainfallSeries& rain,
                                 const MonthlyIndexSeries& nino,
                                 const CategoricalIodSeries& iod, int first_year,
                                 int last_year);

}  // namespace monsoon
