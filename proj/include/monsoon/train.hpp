#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "monsoon/model_iface.hpp"

namespace monsoon {

struct TrainConfig {
  int batch_size = 64;
  double learning_rate = 1e-3;
  int max_epochs = 500;
  double clip_norm = 1.0;
  int patience = 20;
  double min_delta = 1e-5;
  std::uint64_t seed = 0;
  double validation_fraction = 0.1;
  int jobs = 1;  // batch-parallel gradient chunks

  void validate() const;
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> history;
  double best_val_loss = 0.0;
  int best_epoch = 0;  // 1-based; 0 when no epochs ran
  int epochs_run = 0;
  double seconds = 0.0;
};

// stop = true iff each of the last `patience` epochs failed to improve the
// running best by more than min_delta; best epoch is the argmin (earliest tie)
struct EarlyStopDecision {
  bool stop = false;
  int best_epoch = 0;  // 1-based
};
EarlyStopDecision early_stop_check(const std::vector<double>& val_history, int patience,
                                   double min_delta);

// Temporal split: the last ~fraction of distinct years becomes validation.
std::pair<TrainData, TrainData> split_train_validation(const TrainData& data, double fraction);

// Mini-batch training: per epoch a seeded shuffle, MSE on the model outputs,
// gradient clipping, adaptive-moment updates, and early stopping on the
// validation loss; parameters are restored from the best-validation epoch.
TrainResult train_model(TrainableModel& model, const TrainData& train, const TrainData& val,
                        const TrainConfig& config);

// mean MSE of the model over a dataset (eval mode)
double evaluate_loss(TrainableModel& model, const TrainData& data, int batch_size, int jobs = 1);

// --- grid search ---

struct GridSpec {
  // axis order is significant: the last axis varies fastest
  std::vector<std::pair<std::string, std::vector<double>>> axes;

  std::size_t trial_count() const;
  std::map<std::string, double> point(std::size_t index) const;
  static GridSpec from_json_text(const std::string& text);
};

struct TrialResult {
  int trial_id = 0;
  std::map<std::string, double> point;
  double best_val_loss = 0.0;
  int epochs_run = 0;
  double seconds = 0.0;
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
};

using ModelFactory =
    std::function<std::unique_ptr<TrainableModel>(const std::map<std::string, double>& point,
                                                  std::uint64_t seed)>;

struct GridSearchResult {
  std::vector<TrialResult> ranked;  // successes by val loss asc (trial id on ties), then failures
  int best_trial_id = -1;
  std::map<std::string, double> best_point;
  std::vector<NamedTensor> best_params;
  TrainResult best_train;
};

// One trial per grid point; trial i uses derived seed base_seed + i. The
// axes learning_rate / batch_size / clip_norm / max_epochs / patience
// override TrainConfig; all other axes go to the model factory.
GridSearchResult grid_search(const GridSpec& grid, const ModelFactory& factory,
                             const TrainData& train, const TrainData& val,
                             const TrainConfig& base_config);

}  // namespace monsoon
