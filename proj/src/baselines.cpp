#include "monsoon/baselines.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "monsoon/errors.hpp"

namespace monsoon {

namespace {

void check_xy(const std::vector<std::vector<double>>& X, const std::vector<double>& y) {
  if (X.empty() || X.size() != y.size())
    raise(ErrorCode::EmptyTable, "fit requires matching non-empty X and y");
  for (const auto& row : X)
    if (row.size() != X[0].size())
      raise(ErrorCode::ShapeMismatch, "ragged feature matrix");
}

}  // namespace

// --- OLS ---

OlsModel ols_fit(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                 const OlsOptions& options) {
  check_xy(X, y);
  const int n = static_cast<int>(X.size());
  const int f = static_cast<int>(X[0].size());

  if (!options.ridge) {
    Eigen::MatrixXd A(n, f + 1);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < f; ++j) A(i, j) = X[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      A(i, f) = 1.0;
      b(i) = y[static_cast<std::size_t>(i)];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(1e-10);
    if (qr.rank() < f + 1)
      raise(ErrorCode::SingularSystem,
            "rank-deficient system (" + std::to_string(qr.rank()) + " < " +
                std::to_string(f + 1) + "); enable the ridge fallback");
    const Eigen::VectorXd coef = qr.solve(b);
    OlsModel model;
    model.weights.assign(coef.data(), coef.data() + f);
    model.intercept = coef(f);
    return model;
  }

  // ridge fallback: standardized features, intercept unpenalized
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(f), stddev = Eigen::VectorXd::Ones(f);
  Eigen::MatrixXd Xs(n, f);
  for (int j = 0; j < f; ++j) {
    double m = 0.0;
    for (int i = 0; i < n; ++i) m += X[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    m /= n;
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = X[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] - m;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / n);
    mean(j) = m;
    stddev(j) = sd > 1e-12 ? sd : 1.0;  // constant columns contribute weight 0
    for (int i = 0; i < n; ++i)
      Xs(i, j) = (X[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] - m) / stddev(j);
  }
  double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  Eigen::VectorXd yc(n);
  for (int i = 0; i < n; ++i) yc(i) = y[static_cast<std::size_t>(i)] - y_mean;

  Eigen::MatrixXd G = Xs.transpose() * Xs;
  G.diagonal().array() += options.lambda * n;
  const Eigen::VectorXd beta = G.ldlt().solve(Xs.transpose() * yc);

  OlsModel model;
  model.weights.resize(static_cast<std::size_t>(f));
  double shift = 0.0;
  for (int j = 0; j < f; ++j) {
    model.weights[static_cast<std::size_t>(j)] = beta(j) / stddev(j);
    shift += model.weights[static_cast<std::size_t>(j)] * mean(j);
  }
  model.intercept = y_mean - shift;
  return model;
}

double ols_predict(const OlsModel& model, std::span<const double> features) {
  if (features.size() != model.weights.size())
    raise(ErrorCode::ShapeMismatch, "ols_predict: feature length mismatch");
  double acc = model.intercept;
  for (std::size_t j = 0; j < features.size(); ++j) acc += model.weights[j] * features[j];
  return acc;
}

// --- gradient-boosted trees ---

double RegressionTree::predict(std::span<const double> features) const {
  int node = 0;
  while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
    const TreeNode& nd = nodes[static_cast<std::size_t>(node)];
    node = features[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
  }
  return nodes[static_cast<std::size_t>(node)].value;
}

namespace {

struct TreeBuilder {
  const std::vector<std::vector<double>>& X;
  const std::vector<double>& residual;
  const GbtOptions& opt;
  const std::vector<std::vector<int>>& presorted;  // per feature, indices by value
  std::vector<char> in_node;
  RegressionTree tree;

  int build(std::vector<int>& members, int depth) {
    const int n = static_cast<int>(members.size());
    double sum = 0.0;
    for (int i : members) sum += residual[static_cast<std::size_t>(i)];
    const double node_mean = sum / n;

    int best_feature = -1;
    double best_gain = 1e-12;
    double best_threshold = 0.0;
    int best_left_count = 0;
    if (depth < opt.max_depth && n >= 2 * opt.min_leaf) {
      for (int i : members) in_node[static_cast<std::size_t>(i)] = 1;
      const int f = static_cast<int>(X[0].size());
      std::vector<int> ordered;
      ordered.reserve(static_cast<std::size_t>(n));
      for (int j = 0; j < f; ++j) {
        ordered.clear();
        for (int i : presorted[static_cast<std::size_t>(j)])
          if (in_node[static_cast<std::size_t>(i)]) ordered.push_back(i);
        double left_sum = 0.0;
        const double total = sum;
        for (int k = 1; k < n; ++k) {
          left_sum += residual[static_cast<std::size_t>(ordered[static_cast<std::size_t>(k - 1)])];
          const double lo = X[static_cast<std::size_t>(ordered[static_cast<std::size_t>(k - 1)])]
                             [static_cast<std::size_t>(j)];
          const double hi = X[static_cast<std::size_t>(ordered[static_cast<std::size_t>(k)])]
                             [static_cast<std::size_t>(j)];
          if (lo == hi) continue;  // no split between equal values
          if (k < opt.min_leaf || n - k < opt.min_leaf) continue;
          const double right_sum = total - left_sum;
          const double gain = left_sum * left_sum / k + right_sum * right_sum / (n - k) -
                              total * total / n;
          if (gain > best_gain) {
            best_gain = gain;
            best_feature = j;
            best_threshold = 0.5 * (lo + hi);
            best_left_count = k;
          }
        }
      }
      for (int i : members) in_node[static_cast<std::size_t>(i)] = 0;
    }

    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});
    if (best_feature < 0) {
      tree.nodes[static_cast<std::size_t>(id)].value = node_mean;
      return id;
    }
    std::vector<int> left, right;
    left.reserve(static_cast<std::size_t>(best_left_count));
    right.reserve(static_cast<std::size_t>(n - best_left_count));
    for (int i : members) {
      if (X[static_cast<std::size_t>(i)][static_cast<std::size_t>(best_feature)] <= best_threshold)
        left.push_back(i);
      else
        right.push_back(i);
    }
    tree.nodes[static_cast<std::size_t>(id)].feature = best_feature;
    tree.nodes[static_cast<std::size_t>(id)].threshold = best_threshold;
    const int l = build(left, depth + 1);
    const int r = build(right, depth + 1);
    tree.nodes[static_cast<std::size_t>(id)].left = l;
    tree.nodes[static_cast<std::size_t>(id)].right = r;
    return id;
  }
};

}  // namespace

TreeEnsemble gbt_fit(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                     const GbtOptions& options) {
  check_xy(X, y);
  if (options.rounds < 1 || options.max_depth < 0 || options.min_leaf < 1)
    throw std::invalid_argument("gbt_fit: bad options");
  const int n = static_cast<int>(X.size());
  const int f = static_cast<int>(X[0].size());

  TreeEnsemble ensemble;
  ensemble.shrinkage = options.shrinkage;
  ensemble.base_score = std::accumulate(y.begin(), y.end(), 0.0) / n;

  std::vector<std::vector<int>> presorted(static_cast<std::size_t>(f));
  for (int j = 0; j < f; ++j) {
    auto& idx = presorted[static_cast<std::size_t>(j)];
    idx.resize(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
      return X[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)] <
             X[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)];
    });
  }

  std::vector<double> residual(y);
  for (double& r : residual) r -= ensemble.base_score;

  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  for (int round = 0; round < options.rounds; ++round) {
    TreeBuilder builder{X, residual, options, presorted,
                        std::vector<char>(static_cast<std::size_t>(n), 0), RegressionTree{}};
    std::vector<int> members = all;
    builder.build(members, 0);
    for (int i = 0; i < n; ++i)
      residual[static_cast<std::size_t>(i)] -=
          options.shrinkage * builder.tree.predict(X[static_cast<std::size_t>(i)]);
    ensemble.trees.push_back(std::move(builder.tree));
  }
  return ensemble;
}

double gbt_predict(const TreeEnsemble& ensemble, std::span<const double> features) {
  double acc = 0.0;
  for (const auto& tree : ensemble.trees) acc += tree.predict(features);
  return ensemble.base_score + ensemble.shrinkage * acc;
}

// --- SVR ---

double svr_objective(const std::vector<double>& weights, double bias,
                     const std::vector<std::vector<double>>& X_std,
                     const std::vector<double>& y_std, double C, double epsilon) {
  double obj = 0.0;
  for (double w : weights) obj += 0.5 * w * w;
  for (std::size_t i = 0; i < X_std.size(); ++i) {
    double pred = bias;
    for (std::size_t j = 0; j < weights.size(); ++j) pred += weights[j] * X_std[i][j];
    const double slack = std::abs(y_std[i] - pred) - epsilon;
    if (slack > 0.0) obj += C * slack;
  }
  return obj;
}

SvrModel svr_fit(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                 const SvrOptions& options, std::vector<double>* objective_history) {
  check_xy(X, y);
  if (options.C <= 0.0 || options.epsilon < 0.0)
    throw std::invalid_argument("svr_fit: need C > 0 and epsilon >= 0");
  const int n = static_cast<int>(X.size());
  const int f = static_cast<int>(X[0].size());

  SvrModel model;
  model.feat_mean.assign(static_cast<std::size_t>(f), 0.0);
  model.feat_std.assign(static_cast<std::size_t>(f), 1.0);
  for (int j = 0; j < f; ++j) {
    double m = 0.0;
    for (int i = 0; i < n; ++i) m += X[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    m /= n;
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = X[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] - m;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / n);
    model.feat_mean[static_cast<std::size_t>(j)] = m;
    model.feat_std[static_cast<std::size_t>(j)] = sd > 1e-12 ? sd : 1.0;
  }
  model.y_mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double y_ss = 0.0;
  for (double v : y) y_ss += (v - model.y_mean) * (v - model.y_mean);
  model.y_std = std::sqrt(y_ss / n);
  if (model.y_std < 1e-12) model.y_std = 1.0;

  std::vector<std::vector<double>> Xs(static_cast<std::size_t>(n),
                                      std::vector<double>(static_cast<std::size_t>(f)));
  std::vector<double> ys(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < f; ++j)
      Xs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          (X[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -
           model.feat_mean[static_cast<std::size_t>(j)]) /
          model.feat_std[static_cast<std::size_t>(j)];
    ys[static_cast<std::size_t>(i)] = (y[static_cast<std::size_t>(i)] - model.y_mean) / model.y_std;
  }

  std::vector<double> w(static_cast<std::size_t>(f), 0.0);
  std::vector<double> w_avg(static_cast<std::size_t>(f), 0.0);
  std::vector<double> grad(static_cast<std::size_t>(f), 0.0);
  double b = 0.0, b_avg = 0.0;

  // descend the per-sample objective J/(C n): its data term is a mean with
  // O(1) subgradients, so 1/t step sizes stay stable for any C
  const double reg = 1.0 / (options.C * n);
  for (int t = 0; t < options.epochs; ++t) {
    const double lr = options.lr0 / (1.0 + t);
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto& xi = Xs[static_cast<std::size_t>(i)];
      double pred = b;
      for (int j = 0; j < f; ++j) pred += w[static_cast<std::size_t>(j)] * xi[static_cast<std::size_t>(j)];
      const double r = ys[static_cast<std::size_t>(i)] - pred;
      if (std::abs(r) <= options.epsilon) continue;
      const double s = (r > 0.0 ? -1.0 : 1.0) / n;  // d(mean loss)/d(pred)
      for (int j = 0; j < f; ++j)
        grad[static_cast<std::size_t>(j)] += s * xi[static_cast<std::size_t>(j)];
      grad_b += s;
    }
    const double shrink = std::max(0.0, 1.0 - lr * reg);
    for (int j = 0; j < f; ++j)
      w[static_cast<std::size_t>(j)] =
          shrink * w[static_cast<std::size_t>(j)] - lr * grad[static_cast<std::size_t>(j)];
    b -= lr * grad_b;
    const double k = 1.0 / (t + 1.0);
    for (int j = 0; j < f; ++j)
      w_avg[static_cast<std::size_t>(j)] += (w[static_cast<std::size_t>(j)] - w_avg[static_cast<std::size_t>(j)]) * k;
    b_avg += (b - b_avg) * k;
    if (objective_history)
      objective_history->push_back(svr_objective(w_avg, b_avg, Xs, ys, options.C, options.epsilon));
  }
  model.weights = std::move(w_avg);
  model.bias = b_avg;
  return model;
}

double svr_predict(const SvrModel& model, std::span<const double> features) {
  if (features.size() != model.weights.size())
    raise(ErrorCode::ShapeMismatch, "svr_predict: feature length mismatch");
  double pred = model.bias;
  for (std::size_t j = 0; j < features.size(); ++j)
    pred += model.weights[j] * (features[j] - model.feat_mean[j]) / model.feat_std[j];
  return pred * model.y_std + model.y_mean;
}

// --- table helpers ---

std::vector<std::vector<double>> table_features(const BaselineTable& table, Split split) {
  std::vector<std::vector<double>> out;
  for (const auto& row : table.rows)
    if (row.split == split) out.push_back(row.features);
  return out;
}

std::vector<double> table_targets(const BaselineTable& table, Split split) {
  std::vector<double> out;
  for (const auto& row : table.rows)
    if (row.split == split) out.push_back(row.target);
  return out;
}

}  // namespace monsoon
