#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "monsoon/features.hpp"
#include "monsoon/ingest.hpp"

namespace monsoon {

// ascending ranks 1..n; tied values share the average of their positions
std::vector<double> rank_values(const std::vector<double>& values);

// rho = 1 - 6 * sum(d_i^2) / (n^3 - n) over average ranks
double spearman(const std::vector<double>& obs, const std::vector<double>& pred);

enum class RmseConvention {
  Printed,       // sqrt((100/n) * sum(((obs-pred)/obs)^2)), the reported form
  Conventional,  // 100 * sqrt((1/n) * sum(((obs-pred)/obs)^2))
};

double rmse_percent(const std::vector<double>& obs, const std::vector<double>& pred,
                    RmseConvention convention = RmseConvention::Printed);

// --- climatology, terciles, anomalies ---

struct TercileThresholds {
  double lpa = 0.0;  // long-period average of seasonal totals, mm
  double t1 = 0.0;   // 33.33% empirical quantile
  double t2 = 0.0;   // 66.67% empirical quantile
};

TercileThresholds long_period_average(const std::vector<double>& reference_totals);
TercileThresholds long_period_average(const DailyRainfallSeries& rain,
                                      const std::vector<int>& reference_years);

enum class TercileClass { BelowNormal, Normal, AboveNormal };
const char* tercile_name(TercileClass c);

// below < t1 <= normal <= t2 < above (thresholds inclusive into "normal")
TercileClass classify_tercile(double total, double t1, double t2);

struct AnomalyRow {
  int year = 0;
  double obs_total = 0.0;
  double pred_total = 0.0;
  double obs_anom = 0.0;
  double pred_anom = 0.0;
};

struct AnomalySeries {
  double lpa = 0.0;
  std::vector<AnomalyRow> rows;
};

AnomalySeries anomaly_series(const std::vector<int>& years, const std::vector<double>& obs_totals,
                             const std::vector<double>& pred_totals, double lpa);

// --- comparison table ---

struct MetricReport {
  std::string model;  // "patchtst", "lr", "gbt", "svr", "lstm", "cnn"
  DatasetVariant variant = DatasetVariant::D1;
  std::optional<int> lookback;  // baselines only
  double spearman = 0.0;
  double rmse_percent = 0.0;
  int n = 0;
  std::string error;  // non-empty marks a failed trial row

  bool ok() const { return error.empty(); }
};

// Deduplicates on (model, variant, lookback) keeping the later report (and
// logging the replacement), then sorts successes by rmse_percent ascending.
std::vector<MetricReport> build_comparison_table(const std::vector<MetricReport>& reports,
                                                 std::ostream* log = nullptr);

}  // namespace monsoon
