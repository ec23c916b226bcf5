#pragma once

#include <string>
#include <vector>

#include "monsoon/eval.hpp"
#include "monsoon/train.hpp"

namespace monsoon {

// comparison CSV: model,variant,lookback,spearman,rmse_percent
// (lookback empty for patch models; error rows leave both metric cells empty)
void write_comparison_csv(const std::vector<MetricReport>& rows, const std::string& path);
// scatter of spearman (x) vs rmse% (y); returns false (no file) when there
// are no successful rows to plot
bool write_comparison_svg(const std::vector<MetricReport>& rows, const std::string& path);

// anomaly CSV: year,obs_total_mm,pred_total_mm,obs_anom_mm,pred_anom_mm
void write_anomaly_csv(const AnomalySeries& series, const std::string& path);
// grouped observed/predicted anomaly bars; no file for an empty series
bool write_anomaly_svg(const AnomalySeries& series, const std::string& path);

// loss history CSV: epoch,train_loss,val_loss
void write_loss_history_csv(const std::vector<EpochStats>& history, const std::string& path);

// trial CSV: trial_id,<axes...>,best_val_loss,epochs,seconds (error trials
// leave the metric cells empty and append the message in an error column)
void write_trials_csv(const std::vector<TrialResult>& trials,
                      const std::vector<std::string>& axis_names, const std::string& path);

}  // namespace monsoon
