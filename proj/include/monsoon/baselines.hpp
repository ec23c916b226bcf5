#pragma once

#include <span>
#include <vector>

#include "monsoon/features.hpp"
#include "monsoon/model_iface.hpp"

namespace monsoon {

// --- linear regression ---

struct OlsOptions {
  bool ridge = false;
  double lambda = 1e-3;  // on standardized features, scaled by row count
};

struct OlsModel {
  std::vector<double> weights;
  double intercept = 0.0;
};

// Least squares via Householder QR. Rank deficiency raises SingularSystem
// unless the ridge fallback is enabled, which solves the standardized
// normal equations with an L2 penalty instead.
OlsModel ols_fit(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                 const OlsOptions& options = {});
double ols_predict(const OlsModel& model, std::span<const double> features);

// --- gradient-boosted regression trees ---

struct GbtOptions {
  int rounds = 200;
  int max_depth = 3;
  double shrinkage = 0.1;
  int min_leaf = 2;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
  std::vector<TreeNode> nodes;
  double predict(std::span<const double> features) const;
};

struct TreeEnsemble {
  double base_score = 0.0;
  double shrinkage = 0.1;
  std::vector<RegressionTree> trees;
};

// Squared-error boosting: every round fits a CART tree to the current
// residuals using exact greedy variance-reduction splits.
TreeEnsemble gbt_fit(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                     const GbtOptions& options = {});
double gbt_predict(const TreeEnsemble& ensemble, std::span<const double> features);

// --- linear epsilon-insensitive support vector regression ---

struct SvrOptions {
  double C = 10.0;
  double epsilon = 0.05;  // tube half-width, standardized target units
  int epochs = 400;
  double lr0 = 0.45;  // initial step size, decays as lr0 / (1 + t)
};

struct SvrModel {
  // standardized-space parameters plus the feature/target statistics needed
  // to map raw features to raw predictions
  std::vector<double> weights;
  double bias = 0.0;
  std::vector<double> feat_mean, feat_std;
  double y_mean = 0.0, y_std = 1.0;
};

// Deterministic full-batch subgradient descent on the primal objective
//   0.5 |w|^2 + C * sum_i max(0, |y_i - w.x_i - b| - epsilon)
// returning the averaged iterate. `objective_history`, when given, receives
// the objective evaluated at the running average after every epoch.
SvrModel svr_fit(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                 const SvrOptions& options = {}, std::vector<double>* objective_history = nullptr);
double svr_predict(const SvrModel& model, std::span<const double> features);
// primal objective of (weights, bias) in standardized space
double svr_objective(const std::vector<double>& weights, double bias,
                     const std::vector<std::vector<double>>& X_std,
                     const std::vector<double>& y_std, double C, double epsilon);

// fit-on-table conveniences used by the benchmark
std::vector<std::vector<double>> table_features(const BaselineTable& table, Split split);
std::vector<double> table_targets(const BaselineTable& table, Split split);

// --- sequence baselines (LSTM / temporal convolution) ---

struct LstmBaselineConfig {
  int hidden = 32;
  int layers = 1;
  double dropout = 0.0;
  int horizon = 1;
  int channels = 1;
};

class LstmBaseline final : public ModelBase {
 public:
  LstmBaseline(LstmBaselineConfig config, Rng& rng);
  const LstmBaselineConfig& config() const { return config_; }
  ForwardResult forward(Tape& tape, const Tensor& inputs, bool train_mode, Rng* rng) override;

 private:
  LstmBaselineConfig config_;
};

struct CnnBaselineConfig {
  int filters = 16;
  int kernel = 5;
  int layers = 2;
  double dropout = 0.0;
  int horizon = 1;
  int channels = 1;
};

class CnnBaseline final : public ModelBase {
 public:
  CnnBaseline(CnnBaselineConfig config, Rng& rng);
  const CnnBaselineConfig& config() const { return config_; }
  ForwardResult forward(Tape& tape, const Tensor& inputs, bool train_mode, Rng* rng) override;

 private:
  CnnBaselineConfig config_;
};

// Sequence view of a baseline table row: the lookback years' daily rain as
// the time axis, with the target year's broadcast exogenous channels
// repeated alongside; the single target is the (separately standardized)
// seasonal total.
TrainData make_baseline_sequences(const SeasonDataset& scaled_dataset, int lookback,
                                  double total_mean, double total_std);

}  // namespace monsoon
