#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "monsoon/errors.hpp"
#include "monsoon/ingest.hpp"
#include "monsoon/rng.hpp"
#include "monsoon/util.hpp"

using namespace monsoon;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const MonsoonError& e) {
    return e.code();
  }
  FAIL("expected a MonsoonError");
  return ErrorCode::IoError;
}

std::string full_year_csv(int year, double base = 4.0) {
  std::string out = "date,rain_mm\n";
  for (int m = 6; m <= 9; ++m)
    for (int d = 1; d <= jjas_month_len(m); ++d) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d,%g\n", year, m, d, base + d * 0.1);
      out += buf;
    }
  return out;
}

DailyRainfallSeries parse_rain(const std::string& text) {
  std::istringstream in(text);
  return parse_daily_rainfall_csv(in);
}

MonthlyIndexSeries parse_noaa(const std::string& text) {
  std::istringstream in(text);
  return parse_noaa_index_text(in);
}

MonthlyIndexSeries parse_iod(const std::string& text) {
  std::istringstream in(text);
  return parse_iod_csv(in);
}

}  // namespace

TEST_CASE("rainfall csv: a complete year parses to 122 entries") {
  const auto series = parse_rain(full_year_csv(1901));
  CHECK(series.year_count() == 1);
  CHECK(series.daily(1901).size() == 122);
  CHECK(series.daily(1901)[0] == doctest::Approx(4.1));
}

TEST_CASE("rainfall csv: error contracts") {
  CHECK(code_of([] { parse_rain("date,rain_mm\n1901-05-31,3.0\n"); }) == ErrorCode::NonJjasDate);
  CHECK(code_of([] {
          auto text = full_year_csv(1901);
          text = text.substr(0, text.rfind("1901-09-30"));  // drop the last row
          parse_rain(text);
        }) == ErrorCode::IncompleteYear);
  CHECK(code_of([] { parse_rain("date,rain_mm\n1901-06-01,4.0\n1901-06-01,4.0\n"); }) ==
        ErrorCode::DuplicateDate);
  CHECK(code_of([] { parse_rain("date,rain_mm\n1901-06-02,4.0\n1901-06-01,4.0\n"); }) ==
        ErrorCode::MalformedRow);
  CHECK(code_of([] { parse_rain("date,rain_mm\n1901-06-01,-0.5\n"); }) ==
        ErrorCode::NegativeRainfall);
  CHECK(code_of([] { parse_rain("date,rain_mm\n1901-06-31,4.0\n"); }) == ErrorCode::MalformedRow);
  CHECK(code_of([] { parse_rain("bad header\n"); }) == ErrorCode::MalformedRow);

  try {
    parse_rain("date,rain_mm\n1901-06-01,oops\n");
  } catch (const MonsoonError& e) {
    CHECK(e.code() == ErrorCode::MalformedRow);
    CHECK(e.line == 2);
  }
}

TEST_CASE("rainfall csv: IncompleteYear names the offending year") {
  std::string text = full_year_csv(1901) + full_year_csv(1902).substr(13);
  text = text.substr(0, text.rfind("1902-09-30"));
  try {
    parse_rain(text);
    FAIL("expected IncompleteYear");
  } catch (const MonsoonError& e) {
    CHECK(e.code() == ErrorCode::IncompleteYear);
    CHECK(e.year == 1902);
  }
}

TEST_CASE("rainfall csv: CRLF accepted, serialization round-trips") {
  std::string crlf = full_year_csv(1950);
  std::string with_crlf;
  for (char c : crlf) {
    if (c == '\n') with_crlf += "\r\n";
    else with_crlf += c;
  }
  const auto series = parse_rain(with_crlf);
  CHECK(series.year_count() == 1);

  // round trip: serialize then re-parse yields identical values
  Rng rng(5);
  DailyRainfallSeries original;
  for (int year : {1901, 1902, 1907}) {
    std::vector<double> daily(122);
    for (auto& v : daily) v = std::abs(rng.normal()) * 11.7;
    original.set_year(year, daily);
  }
  const auto reparsed = parse_rain(serialize_daily_rainfall_csv(original));
  CHECK(reparsed.years() == original.years());
  for (int year : original.years()) CHECK(reparsed.daily(year) == original.daily(year));
  CHECK(serialize_daily_rainfall_csv(reparsed) == serialize_daily_rainfall_csv(original));
}

TEST_CASE("noaa text: header, values, sentinel and footer") {
  const std::string text =
      "1901 1902\n"
      "1901 0.10 0.20 0.30 0.40 0.50 0.60 0.70 0.80 0.90 1.00 1.10 1.20\n"
      "1902 -99.99 0.2 0.3 0.4 0.5 0.6 0.7 0.8 0.9 1.0 1.1 1.2\n"
      "-99.99\n"
      "NOAA PSL footer text, ignored entirely\n";
  const auto series = parse_noaa(text);
  CHECK(series.value(1901, 3) == doctest::Approx(0.30));
  CHECK(series.values.size() == 23);        // 24 months minus one sentinel
  CHECK(!series.has(1902, 1));              // sentinel months are absent keys
  for (const auto& [k, v] : series.values) CHECK(v != -99.99);
}

TEST_CASE("noaa text: error contracts") {
  CHECK(code_of([] { parse_noaa("not a header\n"); }) == ErrorCode::MalformedHeader);
  CHECK(code_of([] {
          parse_noaa("1901 1902\n1905 0.1 0.2 0.3 0.4 0.5 0.6 0.7 0.8 0.9 1.0 1.1 1.2\n-99.99\n");
        }) == ErrorCode::YearOutOfDeclaredRange);
  CHECK(code_of([] { parse_noaa("1901 1902\n1901 0.1 0.2\n"); }) == ErrorCode::WrongFieldCount);
  try {
    parse_noaa("1901 1902\n1905 0.1 0.2 0.3 0.4 0.5 0.6 0.7 0.8 0.9 1.0 1.1 1.2\n-99.99\n");
  } catch (const MonsoonError& e) {
    CHECK(e.year == 1905);
  }
}

TEST_CASE("noaa text: serialization round-trips through the parser") {
  MonthlyIndexSeries series;
  series.name = "nino34";
  Rng rng(8);
  for (int y = 1990; y <= 1995; ++y)
    for (int m = 1; m <= 12; ++m)
      if (!(y == 1992 && m == 4)) series.values[{y, m}] = rng.normal();
  const auto reparsed = parse_noaa(serialize_noaa_index_text(series));
  CHECK(reparsed.values == series.values);
}

TEST_CASE("iod csv: parse, duplicates, bad month") {
  const auto series = parse_iod("year,month,dmi\n2019,6,0.65\n2019,7,-0.1\n");
  CHECK(series.value(2019, 6) == doctest::Approx(0.65));
  CHECK(code_of([] { parse_iod("year,month,dmi\n2019,6,0.65\n2019,6,0.7\n"); }) ==
        ErrorCode::DuplicateKey);
  CHECK(code_of([] { parse_iod("year,month,dmi\n2019,13,0.1\n"); }) == ErrorCode::MalformedRow);
}

TEST_CASE("categorize_iod: thresholds and scale invariance") {
  MonthlyIndexSeries dmi;
  dmi.values[{2019, 6}] = 0.65;
  dmi.values[{2019, 7}] = 0.0;
  dmi.values[{2019, 8}] = -0.41;
  dmi.values[{2019, 9}] = 0.4;  // boundary: not strictly above
  const auto cats = categorize_iod(dmi, 0.4, -0.4);
  CHECK(*cats.value(2019, 6) == 1);
  CHECK(*cats.value(2019, 7) == 0);
  CHECK(*cats.value(2019, 8) == -1);
  CHECK(*cats.value(2019, 9) == 0);

  // categorize(c*dmi, c*pos, c*neg) == categorize(dmi, pos, neg) for c > 0
  Rng rng(77);
  MonthlyIndexSeries random_dmi;
  for (int m = 1; m <= 12; ++m) random_dmi.values[{2000, m}] = rng.normal();
  for (double c : {0.5, 2.0, 13.7}) {
    MonthlyIndexSeries scaled;
    for (const auto& [k, v] : random_dmi.values) scaled.values[k] = c * v;
    CHECK(categorize_iod(scaled, c * 0.4, c * -0.4).values ==
          categorize_iod(random_dmi, 0.4, -0.4).values);
  }
  CHECK_THROWS_AS(categorize_iod(dmi, -0.4, 0.4), std::invalid_argument);
}

TEST_CASE("fetch_source: local file, warm cache without network, cold cache offline") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "monsoon_fetch_test";
  fs::remove_all(dir);
  fs::create_directories(dir);

  const std::string local = (dir / "local.txt").string();
  write_text_file(local, "local body");
  CHECK(fetch_source({SourceKind::RainfallCsv, local, ""}) == "local body");

  // warm cache is served without touching the network
  const std::string url = "http://192.0.2.1/index.data";  // TEST-NET, never routable
  const std::string cache_dir = (dir / "cache").string();
  fs::create_directories(cache_dir);
  write_text_file(cache_dir + "/" + sha256_hex(url), "cached body");
  CHECK(fetch_source({SourceKind::NoaaIndexText, url, cache_dir}) == "cached body");
  CHECK(fetch_source({SourceKind::NoaaIndexText, url, cache_dir}) == "cached body");

  // cold cache and no reachable host
  const std::string cold = "http://127.0.0.1:1/unreachable";
  CHECK(code_of([&] { fetch_source({SourceKind::NoaaIndexText, cold, cache_dir}); }) ==
        ErrorCode::NetworkUnavailable);
  fs::remove_all(dir);
}

TEST_CASE("fetch_source: http download, caching, and status errors") {
  httplib::Server server;
  server.Get("/data.txt", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("served body", "text/plain");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  if (port <= 0) {
    MESSAGE("cannot bind a localhost port in this environment; skipping");
    return;
  }
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "monsoon_fetch_http";
  fs::remove_all(dir);
  const std::string cache_dir = (dir / "cache").string();
  const std::string base = "http://127.0.0.1:" + std::to_string(port);

  CHECK(fetch_source({SourceKind::NoaaIndexText, base + "/data.txt", cache_dir}) == "served body");
  // second fetch comes from cache: byte-identical
  CHECK(fetch_source({SourceKind::NoaaIndexText, base + "/data.txt", cache_dir}) == "served body");
  CHECK(fs::exists(fs::path(cache_dir) / sha256_hex(base + "/data.txt")));

  try {
    fetch_source({SourceKind::NoaaIndexText, base + "/nope.txt", cache_dir});
    FAIL("expected HttpStatus");
  } catch (const MonsoonError& e) {
    CHECK(e.code() == ErrorCode::HttpStatus);
    CHECK(e.http_status == 404);
  }

  server.stop();
  server_thread.join();
  fs::remove_all(dir);
}

TEST_CASE("validate_coverage: complete years, index gaps, rainfall gaps") {
  DailyRainfallSeries rain;
  std::vector<double> daily(122, 5.0);
  for (int y = 1900; y <= 1903; ++y)
    if (y != 1902) rain.set_year(y, daily);

  MonthlyIndexSeries nino;
  for (int y = 1899; y <= 1903; ++y)
    for (int m = 1; m <= 12; ++m) nino.values[{y, m}] = 0.1;
  nino.values.erase({1900, 5});  // May(T) for target 1901

  CategoricalIodSeries iod;
  for (int y = 1899; y <= 1903; ++y)
    for (int m = 1; m <= 12; ++m) iod.values[{y, m}] = 0;

  const auto report = validate_coverage(rain, nino, iod, 1901, 1903);
  CHECK(!report.complete_for(1901));
  bool found = false;
  for (const auto& item : report.missing.at(1901))
    found |= item.input == "nino34" && item.year == 1900 && item.month == 5;
  CHECK(found);

  // missing rainfall year flags itself and the following year's lookback
  bool self_flag = false, lookback_flag = false;
  for (const auto& item : report.missing.at(1902))
    self_flag |= item.input == "rain" && item.year == 1902;
  for (const auto& item : report.missing.at(1903))
    lookback_flag |= item.input == "rain" && item.year == 1902;
  CHECK(self_flag);
  CHECK(lookback_flag);

  const auto clean = validate_coverage(rain, nino, iod, 1903, 1903);
  CHECK(!clean.complete_for(1903));  // 1902 rain still missing for lookback
}
