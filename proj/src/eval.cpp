#include "monsoon/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

#include "monsoon/errors.hpp"

namespace monsoon {

std::vector<double> rank_values(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n == 0) throw std::invalid_argument("rank_values: empty input");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double spearman(const std::vector<double>& obs, const std::vector<double>& pred) {
  if (obs.size() != pred.size())
    raise(ErrorCode::LengthMismatch, "spearman: " + std::to_string(obs.size()) + " vs " +
                                         std::to_string(pred.size()) + " values");
  const std::size_t n = obs.size();
  if (n < 2) raise(ErrorCode::DegenerateN, "spearman needs at least 2 pairs");
  const auto ro = rank_values(obs);
  const auto rp = rank_values(pred);
  double d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = ro[i] - rp[i];
    d2 += d * d;
  }
  const double nn = static_cast<double>(n);
  const double rho = 1.0 - 6.0 * d2 / (nn * nn * nn - nn);
  return std::clamp(rho, -1.0, 1.0);  // ties can push the formula marginally outside
}

double rmse_percent(const std::vector<double>& obs, const std::vector<double>& pred,
                    RmseConvention convention) {
  if (obs.size() != pred.size())
    raise(ErrorCode::LengthMismatch, "rmse_percent: " + std::to_string(obs.size()) + " vs " +
                                         std::to_string(pred.size()) + " values");
  if (obs.empty()) raise(ErrorCode::DegenerateN, "rmse_percent needs at least 1 pair");
  double acc = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (obs[i] == 0.0) raise(ErrorCode::ZeroObservation, "observation " + std::to_string(i) + " is zero");
    const double rel = (obs[i] - pred[i]) / obs[i];
    acc += rel * rel;
  }
  const double n = static_cast<double>(obs.size());
  if (convention == RmseConvention::Printed) return std::sqrt(100.0 / n * acc);
  return 100.0 * std::sqrt(acc / n);
}

// --- climatology ---

namespace {

// linear-interpolation empirical quantile on a sorted sample
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[lo + 1] - sorted[lo]) * frac;
}

}  // namespace

TercileThresholds long_period_average(const std::vector<double>& reference_totals) {
  if (reference_totals.size() < 3)
    raise(ErrorCode::TooFewYears, "tercile thresholds need at least 3 reference totals");
  TercileThresholds out;
  out.lpa = std::accumulate(reference_totals.begin(), reference_totals.end(), 0.0) /
            static_cast<double>(reference_totals.size());
  std::vector<double> sorted = reference_totals;
  std::sort(sorted.begin(), sorted.end());
  out.t1 = quantile_sorted(sorted, 1.0 / 3.0);
  out.t2 = quantile_sorted(sorted, 2.0 / 3.0);
  if (!(out.t1 < out.t2))
    raise(ErrorCode::DegenerateTerciles,
          "tercile thresholds coincide (t1 = t2 = " + std::to_string(out.t1) + ")");
  return out;
}

TercileThresholds long_period_average(const DailyRainfallSeries& rain,
                                      const std::vector<int>& reference_years) {
  if (reference_years.size() < 3)
    raise(ErrorCode::TooFewYears, "tercile thresholds need at least 3 reference years");
  std::vector<double> totals;
  totals.reserve(reference_years.size());
  for (int y : reference_years) {
    if (!rain.has_year(y)) {
      MonsoonError e(ErrorCode::CoverageGap,
                     "reference year " + std::to_string(y) + " absent from rainfall series");
      e.year = y;
      throw e;
    }
    totals.push_back(rain.seasonal_total(y));
  }
  return long_period_average(totals);
}

const char* tercile_name(TercileClass c) {
  switch (c) {
    case TercileClass::BelowNormal: return "below_normal";
    case TercileClass::Normal: return "normal";
    case TercileClass::AboveNormal: return "above_normal";
  }
  return "?";
}

TercileClass classify_tercile(double total, double t1, double t2) {
  if (!(t1 < t2)) raise(ErrorCode::DegenerateTerciles, "classify_tercile requires t1 < t2");
  if (total < t1) return TercileClass::BelowNormal;
  if (total > t2) return TercileClass::AboveNormal;
  return TercileClass::Normal;
}

AnomalySeries anomaly_series(const std::vector<int>& years, const std::vector<double>& obs_totals,
                             const std::vector<double>& pred_totals, double lpa) {
  if (years.size() != obs_totals.size() || years.size() != pred_totals.size())
    raise(ErrorCode::LengthMismatch, "anomaly_series: year/total lists differ in length");
  AnomalySeries out;
  out.lpa = lpa;
  out.rows.reserve(years.size());
  for (std::size_t i = 0; i < years.size(); ++i) {
    out.rows.push_back(AnomalyRow{years[i], obs_totals[i], pred_totals[i], obs_totals[i] - lpa,
                                  pred_totals[i] - lpa});
  }
  return out;
}

std::vector<MetricReport> build_comparison_table(const std::vector<MetricReport>& reports,
                                                 std::ostream* log) {
  using Key = std::tuple<std::string, DatasetVariant, int>;
  std::map<Key, MetricReport> merged;
  std::vector<Key> order;
  for (const auto& r : reports) {
    const Key key{r.model, r.variant, r.lookback.value_or(-1)};
    auto it = merged.find(key);
    if (it == merged.end()) {
      order.push_back(key);
      merged.emplace(key, r);
    } else {
      if (log)
        *log << "comparison table: replacing earlier report for " << r.model << "/"
             << variant_name(r.variant)
             << (r.lookback ? "/L" + std::to_string(*r.lookback) : "") << "\n";
      it->second = r;  // last write wins
    }
  }
  std::vector<MetricReport> rows;
  rows.reserve(order.size());
  for (const auto& key : order) rows.push_back(merged.at(key));
  std::stable_sort(rows.begin(), rows.end(), [](const MetricReport& a, const MetricReport& b) {
    if (a.ok() != b.ok()) return a.ok();  // error rows sink to the bottom
    if (!a.ok()) return false;
    return a.rmse_percent < b.rmse_percent;
  });
  return rows;
}

}  // namespace monsoon
