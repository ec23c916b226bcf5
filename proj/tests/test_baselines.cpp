#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "monsoon/baselines.hpp"
#include "monsoon/errors.hpp"
#include "monsoon/train.hpp"

using namespace monsoon;

namespace {

// Independent least-squares oracle: normal equations solved by Gauss-Jordan
// elimination with partial pivoting. Deliberately a different route from the
// QR solve in ols_fit.
std::vector<double> normal_equation_oracle(const std::vector<std::vector<double>>& X,
                                           const std::vector<double>& y) {
  const int n = static_cast<int>(X.size());
  const int f = static_cast<int>(X[0].size()) + 1;  // + intercept
  auto a = [&](int i, int j) { return j < f - 1 ? X[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] : 1.0; };
  std::vector<std::vector<double>> g(static_cast<std::size_t>(f),
                                     std::vector<double>(static_cast<std::size_t>(f + 1), 0.0));
  for (int r = 0; r < f; ++r) {
    for (int c = 0; c < f; ++c) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += a(i, r) * a(i, c);
      g[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = s;
    }
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a(i, r) * y[static_cast<std::size_t>(i)];
    g[static_cast<std::size_t>(r)][static_cast<std::size_t>(f)] = s;
  }
  for (int col = 0; col < f; ++col) {
    int pivot = col;
    for (int r = col + 1; r < f; ++r)
      if (std::abs(g[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)]) >
          std::abs(g[static_cast<std::size_t>(pivot)][static_cast<std::size_t>(col)]))
        pivot = r;
    std::swap(g[static_cast<std::size_t>(col)], g[static_cast<std::size_t>(pivot)]);
    const double d = g[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)];
    for (int c = col; c <= f; ++c) g[static_cast<std::size_t>(col)][static_cast<std::size_t>(c)] /= d;
    for (int r = 0; r < f; ++r) {
      if (r == col) continue;
      const double m = g[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)];
      for (int c = col; c <= f; ++c)
        g[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] -=
            m * g[static_cast<std::size_t>(col)][static_cast<std::size_t>(c)];
    }
  }
  std::vector<double> coef(static_cast<std::size_t>(f));
  for (int r = 0; r < f; ++r) coef[static_cast<std::size_t>(r)] = g[static_cast<std::size_t>(r)][static_cast<std::size_t>(f)];
  return coef;  // weights then intercept
}

}  // namespace

TEST_CASE("ols: exact line through two points") {
  const std::vector<std::vector<double>> X{{1.0}, {2.0}};
  const std::vector<double> y{2.0, 4.0};
  const OlsModel m = ols_fit(X, y);
  CHECK(m.weights[0] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(m.intercept == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("ols: constant target gives zero slopes") {
  const std::vector<std::vector<double>> X{{1.0, 0.5}, {2.0, -0.5}, {3.0, 1.5}, {4.0, 2.5}};
  const std::vector<double> y{7.0, 7.0, 7.0, 7.0};
  const OlsModel m = ols_fit(X, y);
  CHECK(m.weights[0] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(m.weights[1] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(m.intercept == doctest::Approx(7.0));
}

TEST_CASE("ols matches the normal-equation oracle on random well-conditioned systems") {
  Rng rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 20 + static_cast<int>(rng.below(41));
    const int f = 2 + static_cast<int>(rng.below(7));
    std::vector<std::vector<double>> X(static_cast<std::size_t>(n),
                                       std::vector<double>(static_cast<std::size_t>(f)));
    std::vector<double> truth(static_cast<std::size_t>(f));
    for (auto& w : truth) w = rng.normal();
    std::vector<double> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      double acc = 0.5;
      for (int j = 0; j < f; ++j) {
        X[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = rng.normal();
        acc += truth[static_cast<std::size_t>(j)] * X[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      }
      y[static_cast<std::size_t>(i)] = acc + 0.1 * rng.normal();
    }
    const OlsModel m = ols_fit(X, y);
    const auto oracle = normal_equation_oracle(X, y);
    for (int j = 0; j < f; ++j) {
      const double denom = std::max(std::abs(oracle[static_cast<std::size_t>(j)]), 1e-8);
      CHECK(std::abs(m.weights[static_cast<std::size_t>(j)] - oracle[static_cast<std::size_t>(j)]) / denom <=
            1e-8);
    }
    const double di = std::max(std::abs(oracle.back()), 1e-8);
    CHECK(std::abs(m.intercept - oracle.back()) / di <= 1e-8);
  }
}

TEST_CASE("ols: rank-deficient system raises SingularSystem unless ridge engaged") {
  // duplicate column: exactly collinear
  const std::vector<std::vector<double>> X{{1.0, 1.0}, {2.0, 2.0}, {3.0, 3.0}, {4.0, 4.0}};
  const std::vector<double> y{1.0, 2.0, 3.0, 4.0};
  try {
    ols_fit(X, y);
    FAIL("expected SingularSystem");
  } catch (const MonsoonError& e) {
    CHECK(e.code() == ErrorCode::SingularSystem);
  }
  OlsOptions ridge;
  ridge.ridge = true;
  const OlsModel m = ols_fit(X, y, ridge);
  // ridge splits the weight across the duplicated columns
  CHECK(ols_predict(m, std::vector<double>{2.5, 2.5}) == doctest::Approx(2.5).epsilon(0.05));
}

TEST_CASE("gbt: depth-0 single round predicts the mean") {
  const std::vector<std::vector<double>> X{{0.0}, {1.0}, {2.0}};
  const std::vector<double> y{1.0, 2.0, 3.0};
  GbtOptions opt;
  opt.rounds = 1;
  opt.max_depth = 0;
  opt.shrinkage = 1.0;
  const TreeEnsemble m = gbt_fit(X, y, opt);
  for (const auto& x : X) CHECK(gbt_predict(m, x) == doctest::Approx(2.0));
}

TEST_CASE("gbt: zero shrinkage returns base_score exactly") {
  Rng rng(7);
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  for (int i = 0; i < 40; ++i) {
    X.push_back({rng.normal(), rng.normal()});
    y.push_back(rng.normal() * 3.0 + 1.0);
  }
  GbtOptions opt;
  opt.rounds = 25;
  opt.shrinkage = 0.0;
  const TreeEnsemble m = gbt_fit(X, y, opt);
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  for (const auto& x : X) CHECK(gbt_predict(m, x) == m.base_score);
  CHECK(m.base_score == doctest::Approx(mean));
}

TEST_CASE("gbt: training error decreases monotonically on a separable step target") {
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  for (int i = 0; i < 24; ++i) {
    X.push_back({static_cast<double>(i)});
    y.push_back(i < 12 ? 1.0 : 5.0);
  }
  GbtOptions opt;
  opt.max_depth = 1;
  opt.min_leaf = 1;
  opt.shrinkage = 0.5;
  double prev = std::numeric_limits<double>::infinity();
  for (int rounds : {1, 2, 4, 8, 16, 32}) {
    opt.rounds = rounds;
    const TreeEnsemble m = gbt_fit(X, y, opt);
    double mse = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
      const double d = gbt_predict(m, X[i]) - y[i];
      mse += d * d;
    }
    mse /= static_cast<double>(X.size());
    CHECK(mse <= prev + 1e-12);
    prev = mse;
  }
  CHECK(prev < 1e-6);  // converges to the step function
}

TEST_CASE("gbt: respects min_leaf and split thresholds are midpoints") {
  const std::vector<std::vector<double>> X{{0.0}, {1.0}, {2.0}, {3.0}};
  const std::vector<double> y{0.0, 0.0, 10.0, 10.0};
  GbtOptions opt;
  opt.rounds = 1;
  opt.max_depth = 1;
  opt.min_leaf = 2;
  opt.shrinkage = 1.0;
  const TreeEnsemble m = gbt_fit(X, y, opt);
  REQUIRE(m.trees.size() == 1);
  const auto& root = m.trees[0].nodes[0];
  REQUIRE(!root.is_leaf());
  CHECK(root.threshold == doctest::Approx(1.5));
  CHECK(gbt_predict(m, std::vector<double>{0.5}) == doctest::Approx(0.0));
  CHECK(gbt_predict(m, std::vector<double>{2.5}) == doctest::Approx(10.0));
}

TEST_CASE("svr: linear data inside the tube reaches zero epsilon-loss") {
  // y = 2x + 1, exactly linear
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  for (int i = 0; i < 9; ++i) {
    X.push_back({static_cast<double>(i)});
    y.push_back(2.0 * i + 1.0);
  }
  SvrOptions opt;
  opt.C = 100.0;
  opt.epsilon = 0.05;
  opt.epochs = 2000;
  const SvrModel m = svr_fit(X, y, opt);
  // the generating line is feasible, so the epsilon-insensitive loss reaches 0
  double loss = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    const double raw_err = std::abs(svr_predict(m, X[i]) - y[i]);
    loss += std::max(0.0, raw_err / m.y_std - opt.epsilon);
  }
  CHECK(loss <= 1e-3);
}

TEST_CASE("svr: objective over averaged iterates is non-increasing on the 3-point fixture") {
  const std::vector<std::vector<double>> X{{0.0}, {1.0}, {2.0}};
  const std::vector<double> y{1.0, 3.0, 5.0};
  SvrOptions opt;
  opt.C = 10.0;
  opt.epsilon = 0.1;
  opt.epochs = 300;
  std::vector<double> history;
  svr_fit(X, y, opt, &history);
  REQUIRE(history.size() == 300);
  for (std::size_t i = 1; i < history.size(); ++i) CHECK(history[i] <= history[i - 1] + 1e-12);
}

TEST_CASE("svr: wide tube and vanishing C shrink the weights to zero") {
  const std::vector<std::vector<double>> X{{0.0}, {1.0}, {2.0}};
  const std::vector<double> y{1.0, 1.2, 0.9};
  SvrOptions wide;
  wide.C = 10.0;
  wide.epsilon = 10.0;  // tube swallows the whole target spread
  wide.epochs = 400;
  const SvrModel m1 = svr_fit(X, y, wide);
  CHECK(std::abs(m1.weights[0]) < 1e-3);

  SvrOptions tiny_c;
  tiny_c.C = 1e-9;
  tiny_c.epsilon = 0.0;
  tiny_c.epochs = 2000;
  const SvrModel m2 = svr_fit(X, y, tiny_c);
  CHECK(std::abs(m2.weights[0]) < 1e-2);
}

TEST_CASE("conv1d identity kernel reproduces the input") {
  Tape tape;
  Rng rng(5);
  Tensor x({1, 10, 1});
  for (std::int64_t i = 0; i < x.size(); ++i) x[i] = rng.normal();
  Var y = tape.conv1d(tape.leaf(x), tape.leaf(Tensor({1, 1, 1}, {1.0})));
  CHECK(tape.value(y).buffer() == x.buffer());
}

TEST_CASE("lstm and cnn baselines overfit a 5-sample fixture") {
  Rng data_rng(21);
  TrainData data;
  data.steps = 20;
  data.channels = 1;
  data.horizon = 1;
  for (int s = 0; s < 5; ++s) {
    TrainSample sample;
    sample.year = 2000 + s;
    sample.input.resize(20);
    double mean = 0.0;
    for (auto& v : sample.input) {
      v = data_rng.normal();
      mean += v;
    }
    sample.target.push_back(mean / 20.0);  // learnable deterministic map
    data.samples.push_back(std::move(sample));
  }

  TrainConfig cfg;
  cfg.batch_size = 5;
  cfg.learning_rate = 0.01;
  cfg.max_epochs = 500;
  cfg.patience = 500;
  cfg.min_delta = 0.0;
  cfg.clip_norm = 10.0;
  cfg.seed = 3;

  {
    Rng rng(31);
    LstmBaseline model(LstmBaselineConfig{12, 1, 0.0, 1, 1}, rng);
    const TrainResult r = train_model(model, data, {}, cfg);
    CHECK(r.history.back().train_loss < 1e-3 * r.history.front().train_loss);
    // head output shape is H
    Tape tape;
    auto fr = model.forward(tape, pack_inputs(data, 0, 5), false, nullptr);
    CHECK(tape.value(fr.output).shape() == std::vector<int>{5, 1});
  }
  {
    Rng rng(32);
    CnnBaseline model(CnnBaselineConfig{8, 3, 2, 0.0, 1, 1}, rng);
    const TrainResult r = train_model(model, data, {}, cfg);
    CHECK(r.history.back().train_loss < 1e-3 * r.history.front().train_loss);
  }
}

TEST_CASE("make_baseline_sequences: layout matches the table contract") {
  // two-channel scaled dataset with recognizable values
  SeasonDataset ds;
  ds.variant = DatasetVariant::D2;
  ds.split_boundary = 2001;
  ds.scaled = true;
  for (int y : {2000, 2001, 2002}) {
    YearRecord r;
    r.year = y;
    r.split = y <= 2001 ? Split::Train : Split::Test;
    r.rain_daily.assign(122, static_cast<double>(y - 2000));
    r.nino_daily.assign(122, 10.0 + (y - 2000));
    r.nino_window.assign(13, 0.0);
    r.seasonal_total = 900.0 + (y - 2000) * 10.0;
    ds.years.push_back(r);
  }
  const TrainData data = make_baseline_sequences(ds, 2, 900.0, 10.0);
  REQUIRE(data.samples.size() == 1);  // only 2002 has the 2-year lookback
  const auto& s = data.samples[0];
  CHECK(s.year == 2002);
  CHECK(data.steps == 244);
  CHECK(data.channels == 2);
  // rain channel walks the lookback years oldest-first
  CHECK(s.input[0] == 0.0);
  CHECK(s.input[244] == 1.0);          // second lookback year at t=122
  CHECK(s.input[1] == 12.0);           // target-year nino broadcast everywhere
  CHECK(s.input[245] == 12.0);
  CHECK(s.target[0] == doctest::Approx((920.0 - 900.0) / 10.0));
}
