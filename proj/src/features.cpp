#include "monsoon/features.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "monsoon/errors.hpp"
#include "monsoon/util.hpp"

namespace monsoon {

using nlohmann::json;

const char* variant_name(DatasetVariant v) {
  switch (v) {
    case DatasetVariant::D1: return "D1";
    case DatasetVariant::D2: return "D2";
    case DatasetVariant::D3: return "D3";
    case DatasetVariant::D4: return "D4";
  }
  return "?";
}

const char* variant_long_name(DatasetVariant v) {
  switch (v) {
    case DatasetVariant::D1: return "AISMR";
    case DatasetVariant::D2: return "AISMR+NINO3.4";
    case DatasetVariant::D3: return "AISMR+IOD";
    case DatasetVariant::D4: return "AISMR+NINO3.4+IOD";
  }
  return "?";
}

std::optional<DatasetVariant> variant_from_string(const std::string& s) {
  if (s == "D1" || s == "d1") return DatasetVariant::D1;
  if (s == "D2" || s == "d2") return DatasetVariant::D2;
  if (s == "D3" || s == "d3") return DatasetVariant::D3;
  if (s == "D4" || s == "d4") return DatasetVariant::D4;
  return std::nullopt;
}

bool variant_uses_nino(DatasetVariant v) {
  return v == DatasetVariant::D2 || v == DatasetVariant::D4;
}

bool variant_uses_iod(DatasetVariant v) {
  return v == DatasetVariant::D3 || v == DatasetVariant::D4;
}

int exo_feature_len(DatasetVariant v) {
  return (variant_uses_nino(v) ? 13 : 0) + (variant_uses_iod(v) ? 12 : 0);
}

std::vector<DatasetVariant> all_variants() {
  return {DatasetVariant::D1, DatasetVariant::D2, DatasetVariant::D3, DatasetVariant::D4};
}

const char* channel_name(Channel c) {
  switch (c) {
    case Channel::Rain: return "rain";
    case Channel::Nino34: return "nino34";
    case Channel::Iod: return "iod";
  }
  return "?";
}

std::vector<Channel> SeasonDataset::channels() const {
  std::vector<Channel> out{Channel::Rain};
  if (variant_uses_nino(variant)) out.push_back(Channel::Nino34);
  if (variant_uses_iod(variant)) out.push_back(Channel::Iod);
  return out;
}

const YearRecord* SeasonDataset::find(int year) const {
  auto it = std::lower_bound(years.begin(), years.end(), year,
                             [](const YearRecord& r, int y) { return r.year < y; });
  if (it == years.end() || it->year != year) return nullptr;
  return &*it;
}

const YearRecord& SeasonDataset::at(int year) const {
  const YearRecord* r = find(year);
  if (!r) {
    MonsoonError e(ErrorCode::CoverageGap, "year " + std::to_string(year) + " not in dataset");
    e.year = year;
    throw e;
  }
  return *r;
}

std::vector<int> SeasonDataset::year_list() const {
  std::vector<int> out;
  out.reserve(years.size());
  for (const auto& r : years) out.push_back(r.year);
  return out;
}

std::vector<int> SeasonDataset::year_list(Split split) const {
  std::vector<int> out;
  for (const auto& r : years)
    if (r.split == split) out.push_back(r.year);
  return out;
}

const std::vector<double>& SeasonDataset::daily(int year, Channel c) const {
  const YearRecord& r = at(year);
  switch (c) {
    case Channel::Rain: return r.rain_daily;
    case Channel::Nino34:
      if (r.nino_daily.empty()) raise(ErrorCode::UnknownChannel, "nino34 channel not populated");
      return r.nino_daily;
    case Channel::Iod:
      if (r.iod_daily.empty()) raise(ErrorCode::UnknownChannel, "iod channel not populated");
      return r.iod_daily;
  }
  raise(ErrorCode::UnknownChannel, "bad channel");
}

// --- broadcast ---

std::vector<double> broadcast_monthly_to_daily(const std::vector<std::optional<double>>& monthly) {
  const auto n = monthly.size();
  if (n != 13 && n != 12)
    throw std::invalid_argument("broadcast: expected a 13-month window or a 12-month calendar");
  for (std::size_t i = 0; i < n; ++i)
    if (!monthly[i]) {
      // position i of a 13-vector is month May+i; of a 12-vector, Jan+i
      const int month = n == 13 ? (4 + static_cast<int>(i)) % 12 + 1 : static_cast<int>(i) + 1;
      MonsoonError e(ErrorCode::MissingMonth,
                     "month " + std::to_string(month) + " absent from monthly vector");
      e.month = month;
      throw e;
    }
  // June..September entries: offsets 1..4 in the May-anchored 13-vector,
  // 5..8 in the January-anchored 12-vector
  const std::size_t june = n == 13 ? 1 : 5;
  std::vector<double> daily;
  daily.reserve(kSeasonDays);
  for (int m = 6; m <= 9; ++m) {
    const double v = *monthly[june + static_cast<std::size_t>(m - 6)];
    for (int d = 0; d < jjas_month_len(m); ++d) daily.push_back(v);
  }
  return daily;
}

std::vector<double> broadcast_monthly_to_daily(const std::vector<double>& monthly) {
  std::vector<std::optional<double>> opt(monthly.begin(), monthly.end());
  return broadcast_monthly_to_daily(opt);
}

// --- dataset assembly ---

namespace {

[[noreturn]] void coverage_gap(int year, const std::string& input, const std::string& detail) {
  MonsoonError e(ErrorCode::CoverageGap,
                 "target year " + std::to_string(year) + ": " + input + " " + detail);
  e.year = year;
  throw e;
}

}  // namespace

SeasonDataset build_season_dataset(DatasetVariant variant, const DailyRainfallSeries& rain,
                                   const MonthlyIndexSeries& nino, const CategoricalIodSeries& iod,
                                   const std::vector<int>& years, int split_boundary) {
  std::vector<int> sorted = years;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  SeasonDataset ds;
  ds.variant = variant;
  ds.split_boundary = split_boundary;
  for (int y : sorted) {
    YearRecord rec;
    rec.year = y;
    rec.split = y <= split_boundary ? Split::Train : Split::Test;
    if (!rain.has_year(y)) coverage_gap(y, "rain", "season missing");
    rec.rain_daily = rain.daily(y);
    double total = 0.0;
    for (double v : rec.rain_daily) total += v;
    rec.seasonal_total = total;

    if (variant_uses_nino(variant)) {
      rec.nino_window.reserve(13);
      for (int k = 0; k < 13; ++k) {
        const int month = (4 + k) % 12 + 1;
        const int yy = k < 8 ? y - 1 : y;
        const auto v = nino.value(yy, month);
        if (!v) coverage_gap(y, "nino34", "missing " + format_year_month(yy, month));
        rec.nino_window.push_back(*v);
      }
      rec.nino_daily = broadcast_monthly_to_daily(rec.nino_window);
    }
    if (variant_uses_iod(variant)) {
      rec.iod_window.reserve(12);
      for (int m = 1; m <= 12; ++m) {
        const auto v = iod.value(y, m);
        if (!v) coverage_gap(y, "iod", "missing " + format_year_month(y, m));
        rec.iod_window.push_back(static_cast<double>(*v));
      }
      rec.iod_daily = broadcast_monthly_to_daily(rec.iod_window);
    }
    ds.years.push_back(std::move(rec));
  }
  return ds;
}

// --- scaling ---

const ChannelScaler& ScalerParams::at(Channel c) const {
  auto it = by_channel.find(c);
  if (it == by_channel.end())
    raise(ErrorCode::UnknownChannel, std::string("no scaler fitted for channel ") + channel_name(c));
  return it->second;
}

ScalerParams fit_scaler(const SeasonDataset& dataset) {
  std::vector<Channel> to_fit{Channel::Rain};
  if (variant_uses_nino(dataset.variant)) to_fit.push_back(Channel::Nino34);
  // the categorical IOD channel passes through unscaled

  bool any_train = false;
  for (const auto& r : dataset.years) any_train |= r.split == Split::Train;
  if (!any_train) raise(ErrorCode::EmptyData, "fit_scaler: train split is empty");

  ScalerParams params;
  for (Channel c : to_fit) {
    double sum = 0.0;
    std::int64_t n = 0;
    for (const auto& r : dataset.years) {
      if (r.split != Split::Train) continue;
      const auto& v = c == Channel::Rain ? r.rain_daily : r.nino_daily;
      for (double x : v) sum += x;
      n += static_cast<std::int64_t>(v.size());
    }
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& r : dataset.years) {
      if (r.split != Split::Train) continue;
      const auto& v = c == Channel::Rain ? r.rain_daily : r.nino_daily;
      for (double x : v) ss += (x - mean) * (x - mean);
    }
    const double stddev = std::sqrt(ss / static_cast<double>(n));  // population
    if (!(stddev > 1e-12))
      raise(ErrorCode::DegenerateChannel,
            std::string("channel ") + channel_name(c) + " is constant over the train split");
    params.by_channel[c] = ChannelScaler{mean, stddev};
  }
  return params;
}

double scale_value(const ScalerParams& params, Channel c, double v) {
  if (c == Channel::Iod) return v;
  const auto& s = params.at(c);
  return (v - s.mean) / s.stddev;
}

double unscale_value(const ScalerParams& params, Channel c, double v) {
  if (c == Channel::Iod) return v;
  const auto& s = params.at(c);
  return v * s.stddev + s.mean;
}

SeasonDataset apply_scaler(const ScalerParams& params, const SeasonDataset& dataset) {
  for (Channel c : dataset.channels())
    if (c != Channel::Iod) params.at(c);  // UnknownChannel if params don't cover the dataset
  SeasonDataset out = dataset;
  out.scaled = true;
  for (auto& r : out.years) {
    const auto& rs = params.at(Channel::Rain);
    for (double& v : r.rain_daily) v = (v - rs.mean) / rs.stddev;
    if (!r.nino_daily.empty()) {
      const auto& ns = params.at(Channel::Nino34);
      for (double& v : r.nino_daily) v = (v - ns.mean) / ns.stddev;
    }
    // iod_daily, the raw windows, and seasonal_total stay in original units
  }
  return out;
}

std::vector<double> invert_scaler(const ScalerParams& params, Channel c,
                                  const std::vector<double>& values) {
  std::vector<double> out = values;
  if (c == Channel::Iod) return out;
  const auto& s = params.at(c);
  for (double& v : out) v = v * s.stddev + s.mean;
  return out;
}

// --- windowing ---

WindowedBatch make_windows(const SeasonDataset& dataset, int window, int horizon, Split split) {
  if (window < 1 || horizon < 1)
    throw std::invalid_argument("make_windows: window and horizon must be >= 1");
  if (window + horizon > kSeasonDays)
    raise(ErrorCode::WindowTooLong, "window " + std::to_string(window) + " + horizon " +
                                        std::to_string(horizon) + " exceeds the 122-day season");
  WindowedBatch batch;
  batch.window = window;
  batch.horizon = horizon;
  batch.channels = dataset.channels();
  const int channels = static_cast<int>(batch.channels.size());
  const int per_year = kSeasonDays - window - horizon + 1;

  for (const auto& r : dataset.years) {
    if (r.split != split) continue;
    std::array<const std::vector<double>*, 3> chan{};
    int nc = 0;
    chan[static_cast<std::size_t>(nc++)] = &r.rain_daily;
    if (variant_uses_nino(dataset.variant)) chan[static_cast<std::size_t>(nc++)] = &r.nino_daily;
    if (variant_uses_iod(dataset.variant)) chan[static_cast<std::size_t>(nc++)] = &r.iod_daily;

    for (int s = 0; s < per_year; ++s) {
      WindowSample sample;
      sample.year = r.year;
      sample.start = s;
      sample.input.resize(static_cast<std::size_t>(window) * channels);
      for (int t = 0; t < window; ++t)
        for (int c = 0; c < channels; ++c)
          sample.input[static_cast<std::size_t>(t * channels + c)] =
              (*chan[static_cast<std::size_t>(c)])[static_cast<std::size_t>(s + t)];
      sample.target.resize(static_cast<std::size_t>(horizon));
      for (int h = 0; h < horizon; ++h)
        sample.target[static_cast<std::size_t>(h)] =
            r.rain_daily[static_cast<std::size_t>(s + window + h)];
      batch.samples.push_back(std::move(sample));
    }
  }
  return batch;
}

// --- baseline tables ---

BaselineTable make_baseline_table(const SeasonDataset& dataset, int lookback) {
  if (lookback < 1 || lookback > 5)
    throw std::invalid_argument("make_baseline_table: lookback must be in 1..5");
  BaselineTable table;
  table.variant = dataset.variant;
  table.lookback = lookback;
  table.feature_len = lookback * kSeasonDays + exo_feature_len(dataset.variant);

  for (const auto& r : dataset.years) {
    bool full_lookback = true;
    for (int j = 1; j <= lookback; ++j) full_lookback &= dataset.find(r.year - j) != nullptr;
    if (!full_lookback) continue;  // dropped, by design

    BaselineTable::Row row;
    row.year = r.year;
    row.split = r.split;
    row.target = r.seasonal_total;
    row.features.reserve(static_cast<std::size_t>(table.feature_len));
    for (int j = lookback; j >= 1; --j) {
      const auto& prev = dataset.at(r.year - j).rain_daily;
      row.features.insert(row.features.end(), prev.begin(), prev.end());
    }
    row.features.insert(row.features.end(), r.nino_window.begin(), r.nino_window.end());
    row.features.insert(row.features.end(), r.iod_window.begin(), r.iod_window.end());
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty())
    raise(ErrorCode::EmptyTable, std::string("no year has the full ") +
                                     std::to_string(lookback) + "-year lookback for " +
                                     variant_name(dataset.variant));
  return table;
}

std::vector<BaselineTable> enumerate_baseline_datasets(const DailyRainfallSeries& rain,
                                                       const MonthlyIndexSeries& nino,
                                                       const CategoricalIodSeries& iod,
                                                       const std::vector<int>& years,
                                                       int split_boundary) {
  std::vector<BaselineTable> tables;
  tables.reserve(20);
  for (DatasetVariant v : all_variants()) {
    const SeasonDataset ds = build_season_dataset(v, rain, nino, iod, years, split_boundary);
    for (int lookback = 1; lookback <= 5; ++lookback)
      tables.push_back(make_baseline_table(ds, lookback));
  }
  return tables;
}

// --- columnar CSV bundle ---

namespace {

std::string daily_csv(const SeasonDataset& ds, Channel c) {
  std::string out = "year";
  for (int d = 1; d <= kSeasonDays; ++d) out += ",d" + std::to_string(d);
  out += '\n';
  for (const auto& r : ds.years) {
    const auto& v = c == Channel::Rain ? r.rain_daily : c == Channel::Nino34 ? r.nino_daily : r.iod_daily;
    out += std::to_string(r.year);
    for (double x : v) {
      out += ',';
      out += format_double(x);
    }
    out += '\n';
  }
  return out;
}

std::string window_csv(const SeasonDataset& ds, bool nino) {
  const int len = nino ? 13 : 12;
  std::string out = "year";
  for (int m = 1; m <= len; ++m) out += ",m" + std::to_string(m);
  out += '\n';
  for (const auto& r : ds.years) {
    const auto& v = nino ? r.nino_window : r.iod_window;
    out += std::to_string(r.year);
    for (double x : v) {
      out += ',';
      out += format_double(x);
    }
    out += '\n';
  }
  return out;
}

std::vector<std::vector<double>> read_wide_csv(const std::string& path, int expected_cols,
                                               std::vector<int>& years_out) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_string(line, ',');
    if (static_cast<int>(fields.size()) != expected_cols + 1)
      raise(ErrorCode::MalformedRow, "bundle row width mismatch in " + path);
    const auto year = parse_long(fields[0]);
    if (!year) raise(ErrorCode::MalformedRow, "bad year in " + path);
    years_out.push_back(static_cast<int>(*year));
    std::vector<double> vals;
    vals.reserve(static_cast<std::size_t>(expected_cols));
    for (int i = 1; i <= expected_cols; ++i) {
      const auto v = parse_double(fields[static_cast<std::size_t>(i)]);
      if (!v) raise(ErrorCode::MalformedRow, "bad value in " + path);
      vals.push_back(*v);
    }
    rows.push_back(std::move(vals));
  }
  return rows;
}

}  // namespace

void save_season_dataset(const SeasonDataset& ds, const std::string& dir,
                         const DatasetBundleMeta& meta) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  json manifest;
  manifest["version"] = 1;
  manifest["variant"] = variant_name(ds.variant);
  manifest["split_boundary"] = ds.split_boundary;
  manifest["scaled"] = ds.scaled;
  if (meta.window) manifest["window"] = *meta.window;
  if (meta.horizon) manifest["horizon"] = *meta.horizon;
  if (meta.lookback) manifest["lookback"] = *meta.lookback;
  std::vector<std::string> files{"rain_daily.csv", "totals.csv"};

  write_text_file(dir + "/rain_daily.csv", daily_csv(ds, Channel::Rain));
  if (variant_uses_nino(ds.variant)) {
    write_text_file(dir + "/nino_daily.csv", daily_csv(ds, Channel::Nino34));
    write_text_file(dir + "/nino_window.csv", window_csv(ds, true));
    files.push_back("nino_daily.csv");
    files.push_back("nino_window.csv");
  }
  if (variant_uses_iod(ds.variant)) {
    write_text_file(dir + "/iod_daily.csv", daily_csv(ds, Channel::Iod));
    write_text_file(dir + "/iod_window.csv", window_csv(ds, false));
    files.push_back("iod_daily.csv");
    files.push_back("iod_window.csv");
  }
  std::string totals = "year,seasonal_total_mm,split\n";
  for (const auto& r : ds.years) {
    totals += std::to_string(r.year) + ',' + format_double(r.seasonal_total) + ',' +
              (r.split == Split::Train ? "train" : "test") + '\n';
  }
  write_text_file(dir + "/totals.csv", totals);
  manifest["files"] = files;
  write_text_file(dir + "/manifest.json", manifest.dump(2) + "\n");
}

SeasonDataset load_season_dataset(const std::string& dir) {
  const json manifest = json::parse(read_text_file(dir + "/manifest.json"));
  SeasonDataset ds;
  const auto variant = variant_from_string(manifest.at("variant").get<std::string>());
  if (!variant) raise(ErrorCode::MalformedRow, "bad variant in bundle manifest");
  ds.variant = *variant;
  ds.split_boundary = manifest.at("split_boundary").get<int>();
  ds.scaled = manifest.value("scaled", false);

  std::vector<int> years;
  auto rain = read_wide_csv(dir + "/rain_daily.csv", kSeasonDays, years);
  for (std::size_t i = 0; i < years.size(); ++i) {
    YearRecord r;
    r.year = years[i];
    r.split = r.year <= ds.split_boundary ? Split::Train : Split::Test;
    r.rain_daily = std::move(rain[i]);
    double total = 0.0;
    for (double v : r.rain_daily) total += v;
    r.seasonal_total = total;
    ds.years.push_back(std::move(r));
  }
  auto fill = [&](const std::string& file, int cols, auto member) {
    std::vector<int> ys;
    auto rows = read_wide_csv(dir + "/" + file, cols, ys);
    if (ys.size() != ds.years.size()) raise(ErrorCode::MalformedRow, "bundle year mismatch: " + file);
    for (std::size_t i = 0; i < ys.size(); ++i) ds.years[i].*member = std::move(rows[i]);
  };
  if (variant_uses_nino(ds.variant)) {
    fill("nino_daily.csv", kSeasonDays, &YearRecord::nino_daily);
    fill("nino_window.csv", 13, &YearRecord::nino_window);
  }
  if (variant_uses_iod(ds.variant)) {
    fill("iod_daily.csv", kSeasonDays, &YearRecord::iod_daily);
    fill("iod_window.csv", 12, &YearRecord::iod_window);
  }
  // totals.csv holds the authoritative totals for scaled bundles
  {
    const std::string text = read_text_file(dir + "/totals.csv");
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    std::size_t i = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto fields = split_string(line, ',');
      if (fields.size() != 3 || i >= ds.years.size())
        raise(ErrorCode::MalformedRow, "bad totals.csv row");
      ds.years[i].seasonal_total = *parse_double(fields[1]);
      ds.years[i].split = fields[2] == "train" ? Split::Train : Split::Test;
      ++i;
    }
  }
  return ds;
}

}  // namespace monsoon
