#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "monsoon/errors.hpp"
#include "monsoon/features.hpp"
#include "monsoon/rng.hpp"
#include "monsoon/synth.hpp"

using namespace monsoon;

namespace {

// small deterministic inputs spanning [first, last] rain years
struct Fixture {
  DailyRainfallSeries rain;
  MonthlyIndexSeries nino;
  CategoricalIodSeries iod;
};

Fixture make_fixture(int first, int last, std::uint64_t seed = 1) {
  Fixture f;
  Rng rng(seed);
  for (int y = first; y <= last; ++y) {
    std::vector<double> daily(122);
    for (auto& v : daily) v = 5.0 + 2.0 * rng.uniform();
    f.rain.set_year(y, daily);
  }
  for (int y = first - 2; y <= last + 1; ++y)
    for (int m = 1; m <= 12; ++m) {
      f.nino.values[{y, m}] = rng.normal();
      f.iod.values[{y, m}] = static_cast<int>(rng.below(3)) - 1;
    }
  return f;
}

}  // namespace

TEST_CASE("broadcast: constant vector, month boundaries, missing month") {
  std::vector<std::optional<double>> monthly(13, 0.5);
  const auto daily = broadcast_monthly_to_daily(monthly);
  CHECK(daily.size() == 122);
  for (double v : daily) CHECK(v == 0.5);

  // June=1, July=2, Aug=3, Sep=4 -> 30/31/31/30 day runs
  std::vector<std::optional<double>> window(13, 0.0);
  window[1] = 1.0;
  window[2] = 2.0;
  window[3] = 3.0;
  window[4] = 4.0;
  const auto bcast = broadcast_monthly_to_daily(window);
  for (int i = 0; i < 30; ++i) CHECK(bcast[i] == 1.0);
  for (int i = 30; i < 61; ++i) CHECK(bcast[i] == 2.0);
  for (int i = 61; i < 92; ++i) CHECK(bcast[i] == 3.0);
  for (int i = 92; i < 122; ++i) CHECK(bcast[i] == 4.0);

  std::vector<std::optional<double>> missing(12, 1.0);
  missing[8] = std::nullopt;  // September of the calendar window
  try {
    broadcast_monthly_to_daily(missing);
    FAIL("expected MissingMonth");
  } catch (const MonsoonError& e) {
    CHECK(e.code() == ErrorCode::MissingMonth);
    CHECK(e.month == 9);
  }
}

TEST_CASE("build_season_dataset: channels per variant and the 110/13 split") {
  const auto f = make_fixture(1901, 2023);
  std::vector<int> years;
  for (int y = 1901; y <= 2023; ++y) years.push_back(y);

  const auto d1 = build_season_dataset(DatasetVariant::D1, f.rain, f.nino, f.iod, years, 2010);
  CHECK(d1.channels() == std::vector<Channel>{Channel::Rain});
  CHECK(d1.year_list(Split::Train).size() == 110);
  CHECK(d1.year_list(Split::Test).size() == 13);
  CHECK(d1.year_list(Split::Train).back() == 2010);
  CHECK(d1.year_list(Split::Test).front() == 2011);

  const auto d4 = build_season_dataset(DatasetVariant::D4, f.rain, f.nino, f.iod, years, 2010);
  CHECK(d4.channels() == std::vector<Channel>{Channel::Rain, Channel::Nino34, Channel::Iod});
}

TEST_CASE("build_season_dataset: the 13-month window runs May(T)..May(T+1)") {
  const auto f = make_fixture(1901, 1903);
  const auto ds =
      build_season_dataset(DatasetVariant::D2, f.rain, f.nino, f.iod, {1902}, 1902);
  const auto& rec = ds.at(1902);
  REQUIRE(rec.nino_window.size() == 13);
  CHECK(rec.nino_window[0] == f.nino.value(1901, 5));
  CHECK(rec.nino_window[7] == f.nino.value(1901, 12));
  CHECK(rec.nino_window[8] == f.nino.value(1902, 1));
  CHECK(rec.nino_window[12] == f.nino.value(1902, 5));
  // the daily channel carries the window's June..September values
  CHECK(rec.nino_daily[0] == f.nino.value(1901, 6));
  CHECK(rec.nino_daily[121] == f.nino.value(1901, 9));
}

TEST_CASE("build_season_dataset: CoverageGap when a required month is absent") {
  auto f = make_fixture(1901, 1903);
  f.nino.values.erase({1901, 7});
  try {
    build_season_dataset(DatasetVariant::D4, f.rain, f.nino, f.iod, {1902}, 1902);
    FAIL("expected CoverageGap");
  } catch (const MonsoonError& e) {
    CHECK(e.code() == ErrorCode::CoverageGap);
    CHECK(e.year == 1902);
  }
}

TEST_CASE("seasonal_total equals the exact ordered sum of the dailies") {
  const auto f = make_fixture(1950, 1955, 9);
  const auto ds = build_season_dataset(DatasetVariant::D1, f.rain, f.nino, f.iod,
                                       {1950, 1951, 1952, 1953, 1954, 1955}, 1953);
  for (const auto& rec : ds.years) {
    double total = 0.0;
    for (double v : rec.rain_daily) total += v;
    CHECK(rec.seasonal_total == total);  // bitwise: same order, no reassociation
  }
}

TEST_CASE("fit_scaler: worked example, degenerate channel, channel separation") {
  // train rain values {1,2,3}: mean 2, population std sqrt(2/3)
  SeasonDataset ds;
  ds.variant = DatasetVariant::D1;
  ds.split_boundary = 2000;
  YearRecord rec;
  rec.year = 2000;
  rec.split = Split::Train;
  rec.rain_daily.assign(122, 2.0);
  rec.rain_daily[0] = 1.0;
  rec.rain_daily[1] = 3.0;
  // remaining 120 entries equal 2.0: mean 2, var = (1+1)/122
  ds.years.push_back(rec);
  const auto params = fit_scaler(ds);
  CHECK(params.at(Channel::Rain).mean == doctest::Approx(2.0));
  CHECK(params.at(Channel::Rain).stddev == doctest::Approx(std::sqrt(2.0 / 122.0)));

  SeasonDataset flat = ds;
  flat.years[0].rain_daily.assign(122, 7.0);
  try {
    fit_scaler(flat);
    FAIL("expected DegenerateChannel");
  } catch (const MonsoonError& e) {
    CHECK(e.code() == ErrorCode::DegenerateChannel);
  }
}

TEST_CASE("scaler: hand-computed values, round trip, train-split-only fitting") {
  const auto f = make_fixture(1990, 1999, 3);
  std::vector<int> years;
  for (int y = 1990; y <= 1999; ++y) years.push_back(y);
  auto ds = build_season_dataset(DatasetVariant::D2, f.rain, f.nino, f.iod, years, 1996);

  const auto params = fit_scaler(ds);
  const auto scaled = apply_scaler(params, ds);
  CHECK(scaled.scaled);

  // x = mean -> 0
  CHECK(scale_value(params, Channel::Rain, params.at(Channel::Rain).mean) == doctest::Approx(0.0));

  // {1,2,3} with its own fitted stats -> {-1.2247, 0, +1.2247}
  const double m = 2.0, sd = std::sqrt(2.0 / 3.0);
  CHECK((1.0 - m) / sd == doctest::Approx(-1.2247).epsilon(1e-4));
  CHECK((3.0 - m) / sd == doctest::Approx(1.2247).epsilon(1e-4));

  // invert(apply(x)) = x within 1e-12
  const std::vector<double> xs{5.5, 7.25};
  std::vector<double> fwd;
  for (double x : xs) fwd.push_back(scale_value(params, Channel::Rain, x));
  const auto back = invert_scaler(params, Channel::Rain, fwd);
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(back[i] == doctest::Approx(xs[i]).epsilon(1e-12));

  // replacing every test-split value leaves the fitted params unchanged
  auto mutated = ds;
  for (auto& rec : mutated.years)
    if (rec.split == Split::Test) {
      for (auto& v : rec.rain_daily) v = 999.0;
      for (auto& v : rec.nino_daily) v = 999.0;
    }
  const auto params2 = fit_scaler(mutated);
  CHECK(params2.at(Channel::Rain).mean == params.at(Channel::Rain).mean);
  CHECK(params2.at(Channel::Rain).stddev == params.at(Channel::Rain).stddev);
  CHECK(params2.at(Channel::Nino34).mean == params.at(Channel::Nino34).mean);

  // UnknownChannel when inverting a channel that was never fitted
  const auto d1 = build_season_dataset(DatasetVariant::D1, f.rain, f.nino, f.iod, years, 1996);
  const auto d1_params = fit_scaler(d1);
  CHECK_THROWS_AS(invert_scaler(d1_params, Channel::Nino34, xs), MonsoonError);
}

TEST_CASE("make_windows: counts, boundaries, channel layout") {
  const auto f = make_fixture(1990, 1993, 5);
  auto ds = build_season_dataset(DatasetVariant::D2, f.rain, f.nino, f.iod,
                                 {1990, 1991, 1992, 1993}, 1992);

  const auto batch = make_windows(ds, 30, 1, Split::Train);
  CHECK(batch.samples.size() == 3 * 92);  // 122-30-1+1 per year

  const auto single = make_windows(ds, 121, 1, Split::Test);
  CHECK(single.samples.size() == 1);

  CHECK_THROWS_AS(make_windows(ds, 100, 30, Split::Train), MonsoonError);
  try {
    make_windows(ds, 100, 30, Split::Train);
  } catch (const MonsoonError& e) {
    CHECK(e.code() == ErrorCode::WindowTooLong);
  }

  // no window crosses a year boundary, and inputs mirror the source slices
  for (const auto& s : batch.samples) {
    CHECK(s.start + 30 + 1 <= 122);
    const auto& rec = ds.at(s.year);
    for (int t = 0; t < 30; ++t) {
      CHECK(s.input[static_cast<std::size_t>(t) * 2] == rec.rain_daily[static_cast<std::size_t>(s.start + t)]);
      CHECK(s.input[static_cast<std::size_t>(t) * 2 + 1] == rec.nino_daily[static_cast<std::size_t>(s.start + t)]);
    }
    CHECK(s.target[0] == rec.rain_daily[static_cast<std::size_t>(s.start + 30)]);
  }
}

TEST_CASE("make_windows: count formula holds over random W, H") {
  const auto f = make_fixture(1990, 1991, 6);
  auto ds = build_season_dataset(DatasetVariant::D1, f.rain, f.nino, f.iod, {1990, 1991}, 1991);
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const int w = 1 + static_cast<int>(rng.below(100));
    const int h = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(122 - w)));
    const auto batch = make_windows(ds, w, h, Split::Train);
    CHECK(static_cast<int>(batch.samples.size()) == 2 * (122 - w - h + 1));
  }
}

TEST_CASE("make_baseline_table: feature lengths and lookback dropping") {
  const auto f = make_fixture(1990, 1999, 7);
  std::vector<int> years;
  for (int y = 1990; y <= 1999; ++y) years.push_back(y);

  const auto d1 = build_season_dataset(DatasetVariant::D1, f.rain, f.nino, f.iod, years, 1996);
  const auto t1 = make_baseline_table(d1, 2);
  CHECK(t1.feature_len == 244);
  CHECK(t1.rows.front().year == 1992);  // 1990, 1991 lack the 2-year lookback
  for (const auto& row : t1.rows) {
    CHECK(static_cast<int>(row.features.size()) == 244);
    CHECK(row.target == d1.at(row.year).seasonal_total);
  }

  const auto d4 = build_season_dataset(DatasetVariant::D4, f.rain, f.nino, f.iod, years, 1996);
  const auto t4 = make_baseline_table(d4, 1);
  CHECK(t4.feature_len == 122 + 13 + 12);

  // a one-year dataset has no qualifying rows
  const auto tiny = build_season_dataset(DatasetVariant::D1, f.rain, f.nino, f.iod, {1990}, 1996);
  CHECK_THROWS_AS(make_baseline_table(tiny, 2), MonsoonError);
}

TEST_CASE("enumerate_baseline_datasets: exactly 20 uniquely tagged tables") {
  const auto f = make_fixture(1980, 1999, 8);
  std::vector<int> years;
  for (int y = 1980; y <= 1999; ++y) years.push_back(y);
  const auto tables = enumerate_baseline_datasets(f.rain, f.nino, f.iod, years, 1995);
  CHECK(tables.size() == 20);
  std::set<std::pair<int, int>> tags;
  for (const auto& t : tables) {
    tags.insert({static_cast<int>(t.variant), t.lookback});
    CHECK(t.feature_len == t.lookback * 122 + exo_feature_len(t.variant));
    if (t.variant == DatasetVariant::D1) CHECK(t.feature_len % 122 == 0);
  }
  CHECK(tags.size() == 20);
}

TEST_CASE("season dataset bundle round-trips through the CSV files") {
  const auto f = make_fixture(1990, 1995, 10);
  std::vector<int> years{1990, 1991, 1992, 1993, 1994, 1995};
  const auto ds = build_season_dataset(DatasetVariant::D4, f.rain, f.nino, f.iod, years, 1993);

  namespace fs = std::filesystem;
  const std::string dir = (fs::temp_directory_path() / "monsoon_bundle_test").string();
  fs::remove_all(dir);
  DatasetBundleMeta meta;
  meta.window = 30;
  meta.horizon = 1;
  save_season_dataset(ds, dir, meta);
  const auto loaded = load_season_dataset(dir);

  CHECK(loaded.variant == ds.variant);
  CHECK(loaded.split_boundary == ds.split_boundary);
  REQUIRE(loaded.years.size() == ds.years.size());
  for (std::size_t i = 0; i < ds.years.size(); ++i) {
    CHECK(loaded.years[i].year == ds.years[i].year);
    CHECK(loaded.years[i].split == ds.years[i].split);
    CHECK(loaded.years[i].rain_daily == ds.years[i].rain_daily);
    CHECK(loaded.years[i].nino_daily == ds.years[i].nino_daily);
    CHECK(loaded.years[i].iod_daily == ds.years[i].iod_daily);
    CHECK(loaded.years[i].nino_window == ds.years[i].nino_window);
    CHECK(loaded.years[i].iod_window == ds.years[i].iod_window);
    CHECK(loaded.years[i].seasonal_total == ds.years[i].seasonal_total);
  }
  fs::remove_all(dir);
}
