#include <cmath>

#include "monsoon/baselines.hpp"
#include "monsoon/errors.hpp"

namespace monsoon {

namespace {

Tensor uniform_init(Rng& rng, std::vector<int> shape, double a) {
  Tensor t(std::move(shape));
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-a, a);
  return t;
}

Var dropout_if(Tape& tape, Var x, double rate, bool train_mode, Rng* rng) {
  if (!train_mode || rate == 0.0) return x;
  if (!rng) raise(ErrorCode::EmptyData, "training-mode forward needs an rng for dropout");
  const Tensor& v = tape.value(x);
  const auto mask = rng->bernoulli_keep_mask(static_cast<std::size_t>(v.size()), rate);
  Tensor mt(v.shape());
  for (std::int64_t i = 0; i < mt.size(); ++i)
    mt[i] = static_cast<double>(mask[static_cast<std::size_t>(i)]);
  return tape.dropout(x, mt, rate);
}

}  // namespace

// --- LSTM baseline: stacked LSTM over the raw (unpatched) sequence ---

LstmBaseline::LstmBaseline(LstmBaselineConfig config, Rng& rng) : config_(config) {
  if (config_.hidden < 1 || config_.layers < 1 || config_.channels < 1 || config_.horizon < 1)
    throw std::invalid_argument("LstmBaseline: bad config");
  const int h = config_.hidden;
  const double a = 1.0 / std::sqrt(static_cast<double>(h));
  for (int l = 0; l < config_.layers; ++l) {
    const std::string pre = "lstm" + std::to_string(l) + ".";
    const int in = l == 0 ? config_.channels : h;
    add_param(pre + "wx", uniform_init(rng, {in, 4 * h}, a));
    add_param(pre + "wh", uniform_init(rng, {h, 4 * h}, a));
    Tensor bias({4 * h});
    for (int i = h; i < 2 * h; ++i) bias[i] = 1.0;
    add_param(pre + "bias", std::move(bias));
  }
  const double ah = std::sqrt(6.0 / (h + config_.horizon));
  add_param("head.weight", uniform_init(rng, {h, config_.horizon}, ah));
  add_param("head.bias", Tensor({config_.horizon}));
}

ForwardResult LstmBaseline::forward(Tape& tape, const Tensor& inputs, bool train_mode, Rng* rng) {
  if (inputs.rank() != 3 || inputs.dim(2) != config_.channels)
    raise(ErrorCode::ShapeMismatch, "LstmBaseline: expected (B, T, C), got " + inputs.shape_str());
  const int B = inputs.dim(0);
  const int T = inputs.dim(1);
  const int h = config_.hidden;

  std::vector<Var> leaves = bind(tape);
  auto p = [&](const std::string& name) {
    return leaves[static_cast<std::size_t>(index_of(name))];
  };

  Var x = tape.leaf(inputs);
  std::vector<Var> xs;
  xs.reserve(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t)
    xs.push_back(tape.reshape(tape.slice(x, 1, t, 1), {B, inputs.dim(2)}));

  Var hidden{};
  for (int l = 0; l < config_.layers; ++l) {
    const std::string pre = "lstm" + std::to_string(l) + ".";
    Var wx = p(pre + "wx");
    Var wh = p(pre + "wh");
    Var bias = p(pre + "bias");
    Var hs = tape.leaf(Tensor({B, h}));
    Var cs = tape.leaf(Tensor({B, h}));
    std::vector<Var> outs;
    outs.reserve(xs.size());
    for (Var xt : xs) {
      Var gates = tape.add(tape.add(tape.matmul(xt, wx), tape.matmul(hs, wh)), bias);
      Var gi = tape.sigmoid(tape.slice(gates, 1, 0, h));
      Var gf = tape.sigmoid(tape.slice(gates, 1, h, h));
      Var gg = tape.tanh(tape.slice(gates, 1, 2 * h, h));
      Var go = tape.sigmoid(tape.slice(gates, 1, 3 * h, h));
      cs = tape.add(tape.mul(gf, cs), tape.mul(gi, gg));
      hs = tape.mul(go, tape.tanh(cs));
      outs.push_back(hs);
    }
    hidden = hs;
    if (l + 1 < config_.layers) {
      for (Var& o : outs) o = dropout_if(tape, o, config_.dropout, train_mode, rng);
      xs = std::move(outs);
    }
  }
  Var out = tape.add(tape.matmul(hidden, p("head.weight")), p("head.bias"));
  return ForwardResult{out, std::move(leaves)};
}

// --- CNN baseline: stacked 1-d convolutions + global average pooling ---

CnnBaseline::CnnBaseline(CnnBaselineConfig config, Rng& rng) : config_(config) {
  if (config_.filters < 1 || config_.kernel < 1 || config_.layers < 1 || config_.channels < 1)
    throw std::invalid_argument("CnnBaseline: bad config");
  for (int l = 0; l < config_.layers; ++l) {
    const int in = l == 0 ? config_.channels : config_.filters;
    const double a = std::sqrt(6.0 / (config_.kernel * in + config_.filters));
    add_param("conv" + std::to_string(l) + ".kernel",
              uniform_init(rng, {config_.kernel, in, config_.filters}, a));
    add_param("conv" + std::to_string(l) + ".bias", Tensor({config_.filters}));
  }
  const double ah = std::sqrt(6.0 / (config_.filters + config_.horizon));
  add_param("head.weight", uniform_init(rng, {config_.filters, config_.horizon}, ah));
  add_param("head.bias", Tensor({config_.horizon}));
}

ForwardResult CnnBaseline::forward(Tape& tape, const Tensor& inputs, bool train_mode, Rng* rng) {
  if (inputs.rank() != 3 || inputs.dim(2) != config_.channels)
    raise(ErrorCode::ShapeMismatch, "CnnBaseline: expected (B, T, C), got " + inputs.shape_str());
  const int T = inputs.dim(1);
  if (T < config_.layers * (config_.kernel - 1) + 1)
    raise(ErrorCode::ShapeMismatch, "CnnBaseline: sequence too short for the conv stack");

  std::vector<Var> leaves = bind(tape);
  auto p = [&](const std::string& name) {
    return leaves[static_cast<std::size_t>(index_of(name))];
  };

  Var x = tape.leaf(inputs);
  for (int l = 0; l < config_.layers; ++l) {
    x = tape.add(tape.conv1d(x, p("conv" + std::to_string(l) + ".kernel")),
                 p("conv" + std::to_string(l) + ".bias"));
    x = tape.relu(x);
    x = dropout_if(tape, x, config_.dropout, train_mode, rng);
  }
  Var pooled = tape.mean_axis(x, 1);  // (B, filters)
  Var out = tape.add(tape.matmul(pooled, p("head.weight")), p("head.bias"));
  return ForwardResult{out, std::move(leaves)};
}

// --- baseline-table sequences ---

TrainData make_baseline_sequences(const SeasonDataset& scaled_dataset, int lookback,
                                  double total_mean, double total_std) {
  if (lookback < 1 || lookback > 5)
    throw std::invalid_argument("make_baseline_sequences: lookback must be in 1..5");
  if (!(total_std > 0.0))
    throw std::invalid_argument("make_baseline_sequences: total_std must be positive");
  const auto channels = scaled_dataset.channels();
  const int C = static_cast<int>(channels.size());
  const int T = lookback * kSeasonDays;

  TrainData data;
  data.steps = T;
  data.channels = C;
  data.horizon = 1;
  for (const auto& rec : scaled_dataset.years) {
    bool full = true;
    for (int j = 1; j <= lookback; ++j) full &= scaled_dataset.find(rec.year - j) != nullptr;
    if (!full) continue;

    TrainSample sample;
    sample.year = rec.year;
    sample.input.resize(static_cast<std::size_t>(T) * C);
    for (int j = 0; j < lookback; ++j) {
      const auto& hist = scaled_dataset.at(rec.year - lookback + j).rain_daily;
      for (int d = 0; d < kSeasonDays; ++d) {
        const int t = j * kSeasonDays + d;
        double* row = sample.input.data() + static_cast<std::size_t>(t) * C;
        row[0] = hist[static_cast<std::size_t>(d)];
        int c = 1;
        // the target year's broadcast exogenous channels repeat across the
        // whole lookback span, aligned by day-of-season
        if (variant_uses_nino(scaled_dataset.variant))
          row[c++] = rec.nino_daily[static_cast<std::size_t>(d)];
        if (variant_uses_iod(scaled_dataset.variant))
          row[c++] = rec.iod_daily[static_cast<std::size_t>(d)];
      }
    }
    sample.target.push_back((rec.seasonal_total - total_mean) / total_std);
    data.samples.push_back(std::move(sample));
  }
  if (data.samples.empty())
    raise(ErrorCode::EmptyTable, "no year has the full lookback for sequence baselines");
  return data;
}

}  // namespace monsoon
