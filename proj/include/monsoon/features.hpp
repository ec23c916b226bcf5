#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "monsoon/ingest.hpp"

namespace monsoon {

// The four input-feature combinations models are trained on.
enum class DatasetVariant { D1, D2, D3, D4 };

const char* variant_name(DatasetVariant v);        // "D1".."D4"
const char* variant_long_name(DatasetVariant v);   // e.g. "AISMR+NINO+IOD"
std::optional<DatasetVariant> variant_from_string(const std::string& s);
bool variant_uses_nino(DatasetVariant v);
bool variant_uses_iod(DatasetVariant v);
// length of the flat exogenous feature block: 13 index months and/or 12 IOD months
int exo_feature_len(DatasetVariant v);
std::vector<DatasetVariant> all_variants();

enum class Channel { Rain, Nino34, Iod };
const char* channel_name(Channel c);

enum class Split { Train, Test };

// Model-ready season of one target year.
struct YearRecord {
  int year = 0;
  Split split = Split::Train;
  std::vector<double> rain_daily;   // 122
  std::vector<double> nino_daily;   // 122 or empty; month value broadcast per day
  std::vector<double> iod_daily;    // 122 or empty; category broadcast per day
  std::vector<double> nino_window;  // 13 or empty: May(T) .. May(T+1)
  std::vector<double> iod_window;   // 12 or empty: Jan .. Dec of the target year
  double seasonal_total = 0.0;      // mm, exact sum of rain_daily at build time
};

struct SeasonDataset {
  DatasetVariant variant = DatasetVariant::D1;
  int split_boundary = 0;  // train iff year <= split_boundary
  bool scaled = false;
  std::vector<YearRecord> years;  // ascending by year

  std::vector<Channel> channels() const;
  const YearRecord* find(int year) const;
  const YearRecord& at(int year) const;
  std::vector<int> year_list() const;
  std::vector<int> year_list(Split split) const;
  const std::vector<double>& daily(int year, Channel c) const;
};

// Expands monthly values onto the 122 JJAS day slots: each day takes the
// value of its calendar month. Accepts the 13-month index window (June..Sep
// are entries 1..4) or the 12-month calendar window (entries 5..8).
std::vector<double> broadcast_monthly_to_daily(const std::vector<std::optional<double>>& monthly);
std::vector<double> broadcast_monthly_to_daily(const std::vector<double>& monthly);

SeasonDataset build_season_dataset(DatasetVariant variant, const DailyRainfallSeries& rain,
                                   const MonthlyIndexSeries& nino, const CategoricalIodSeries& iod,
                                   const std::vector<int>& years, int split_boundary);

// --- standard scaling ---

struct ChannelScaler {
  double mean = 0.0;
  double stddev = 1.0;  // population normalization
};

struct ScalerParams {
  std::map<Channel, ChannelScaler> by_channel;

  bool has(Channel c) const { return by_channel.count(c) > 0; }
  const ChannelScaler& at(Channel c) const;
};

// Fits per-channel mean/std over all train-split daily values. The
// categorical IOD channel is never scaled (its three levels are ordinal).
ScalerParams fit_scaler(const SeasonDataset& dataset);
SeasonDataset apply_scaler(const ScalerParams& params, const SeasonDataset& dataset);
std::vector<double> invert_scaler(const ScalerParams& params, Channel c,
                                  const std::vector<double>& values);
double scale_value(const ScalerParams& params, Channel c, double v);
double unscale_value(const ScalerParams& params, Channel c, double v);

// --- windowing ---

struct WindowSample {
  std::vector<double> input;   // W x C, day-major rows
  std::vector<double> target;  // next H days of the rain channel
  int year = 0;
  int start = 0;
};

struct WindowedBatch {
  int window = 0;
  int horizon = 0;
  std::vector<Channel> channels;
  std::vector<WindowSample> samples;
};

// Emits, per year of the chosen split, every in-season window: start offsets
// s with s + W + H <= 122, so 122 - W - H + 1 samples per year. Windows
// never cross a year boundary.
WindowedBatch make_windows(const SeasonDataset& dataset, int window, int horizon, Split split);

// --- baseline feature tables ---

struct BaselineTable {
  DatasetVariant variant = DatasetVariant::D1;
  int lookback = 1;
  int feature_len = 0;  // lookback * 122 + exo_feature_len(variant)

  struct Row {
    int year = 0;
    Split split = Split::Train;
    std::vector<double> features;
    double target = 0.0;  // seasonal total, mm
  };
  std::vector<Row> rows;  // ascending by year
};

// Features are the lookback years' raw daily rain vectors concatenated,
// then the target year's exogenous block. Years lacking the full lookback
// are dropped, not errors.
BaselineTable make_baseline_table(const SeasonDataset& dataset, int lookback);

// The cartesian product {D1..D4} x {lookback 1..5}: exactly 20 tables.
std::vector<BaselineTable> enumerate_baseline_datasets(const DailyRainfallSeries& rain,
                                                       const MonthlyIndexSeries& nino,
                                                       const CategoricalIodSeries& iod,
                                                       const std::vector<int>& years,
                                                       int split_boundary);

// --- columnar CSV bundle (reproducible training inputs) ---

struct DatasetBundleMeta {
  std::optional<int> window;
  std::optional<int> horizon;
  std::optional<int> lookback;
};

void save_season_dataset(const SeasonDataset& dataset, const std::string& dir,
                         const DatasetBundleMeta& meta = {});
SeasonDataset load_season_dataset(const std::string& dir);

}  // namespace monsoon
