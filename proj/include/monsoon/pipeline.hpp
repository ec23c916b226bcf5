#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "monsoon/baselines.hpp"
#include "monsoon/eval.hpp"
#include "monsoon/features.hpp"
#include "monsoon/ingest.hpp"
#include "monsoon/patch_model.hpp"
#include "monsoon/train.hpp"

namespace monsoon {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kDefaultSplitBoundary = 2010;

// Validated, normalized input data: the unit every command operates on.
struct Store {
  DailyRainfallSeries rain;
  MonthlyIndexSeries nino;
  MonthlyIndexSeries iod_dmi;
  double iod_pos_threshold = 0.4;
  double iod_neg_threshold = -0.4;

  CategoricalIodSeries iod_categories() const;
};

struct IngestOptions {
  std::string rain_location;
  std::string nino_location;
  std::string iod_location;
  std::string cache_dir;
  double iod_pos_threshold = 0.4;
  double iod_neg_threshold = -0.4;
};

Store ingest_sources(const IngestOptions& options);
void save_store(const Store& store, const std::string& dir);
Store load_store(const std::string& dir);

// years whose variant requirements are fully covered by the store
std::vector<int> covered_years(const Store& store, DatasetVariant variant);
SeasonDataset dataset_from_store(const Store& store, DatasetVariant variant, int split_boundary);

// --- training runs ---

struct TrainRunOptions {
  DatasetVariant variant = DatasetVariant::D4;
  std::string model = "patchtst";  // patchtst | lstm | cnn
  PatchConfig patch;
  LstmBaselineConfig lstm;
  CnnBaselineConfig cnn;
  TrainConfig train;
  int split_boundary = kDefaultSplitBoundary;
  int lookback = 1;  // sequence baselines
};

struct TrainRunOutput {
  TrainResult result;
  std::vector<NamedTensor> params;
  nlohmann::json sidecar;  // everything needed to rebuild and apply the model
};

TrainRunOutput run_training(const Store& store, const TrainRunOptions& options);

nlohmann::json scaler_to_json(const ScalerParams& params);
ScalerParams scaler_from_json(const nlohmann::json& j);
std::string store_fingerprint(const Store& store);

// --- benchmark ---

struct BenchmarkOptions {
  int split_boundary = kDefaultSplitBoundary;
  TrainConfig train;         // shared by patch models and sequence baselines
  PatchConfig patch;
  LstmBaselineConfig lstm{/*hidden=*/32, /*layers=*/1};
  CnnBaselineConfig cnn{/*filters=*/16, /*kernel=*/5, /*layers=*/2};
  GbtOptions gbt{/*rounds=*/120, /*max_depth=*/3, /*shrinkage=*/0.1, /*min_leaf=*/2};
  SvrOptions svr;
  OlsOptions ols{/*ridge=*/true, /*lambda=*/1e-3};
  std::string only;  // restrict to one model family ("" = all)
  int jobs = 1;
  RmseConvention rmse = RmseConvention::Printed;
};

struct BenchmarkOutput {
  std::vector<MetricReport> table;      // merged and sorted
  AnomalySeries best_patch_anomalies;   // test-period series of the best patch row
  std::string best_patch_model;         // e.g. "patchtst D4"
};

BenchmarkOutput run_benchmark(const Store& store, const BenchmarkOptions& options);

// patch-model totals for the test years of a dataset (rollout per year)
std::vector<double> predict_season_totals(PatchForecaster& model, const ScalerParams& scaler,
                                          const SeasonDataset& raw_dataset,
                                          const std::vector<int>& target_years);

// --- season prediction ---

struct PredictOptions {
  int year = 0;
  std::string checkpoint_path;
  std::string nino_forecast_path;  // NOAA text layout, optional
  std::string iod_forecast_path;   // IOD CSV layout, optional
  std::optional<int> split_boundary;  // LPA reference period override
};

struct PredictReport {
  int year = 0;
  DatasetVariant variant = DatasetVariant::D1;
  std::string model;
  std::string encoder;
  int window = 0;
  std::vector<double> daily_mm;
  double total_mm = 0.0;
  TercileThresholds thresholds;
  TercileClass tercile = TercileClass::Normal;
  double anomaly_mm = 0.0;
  int reference_first = 0, reference_last = 0;
  std::vector<std::pair<int, int>> forecast_nino_months;
  std::vector<std::pair<int, int>> forecast_iod_months;
};

PredictReport run_predict(const Store& store, const PredictOptions& options);
std::string format_predict_report(const PredictReport& report);

// --- run manifests ---

nlohmann::json make_run_manifest(const std::string& command, const nlohmann::json& resolved_config,
                                 const std::vector<std::pair<std::string, std::string>>& input_files,
                                 std::uint64_t seed);

}  // namespace monsoon
