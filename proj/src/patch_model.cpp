#include "monsoon/patch_model.hpp"

#include <cmath>

#include "monsoon/errors.hpp"

namespace monsoon {

using nlohmann::json;

const char* encoder_name(EncoderKind k) {
  return k == EncoderKind::Attention ? "attention" : "recurrent";
}

std::optional<EncoderKind> encoder_from_string(const std::string& s) {
  if (s == "attention") return EncoderKind::Attention;
  if (s == "recurrent") return EncoderKind::Recurrent;
  return std::nullopt;
}

void PatchConfig::validate() const {
  if (window < 1 || horizon < 1) throw std::invalid_argument("window and horizon must be >= 1");
  if (patch_len < 1 || patch_len > window)
    raise(ErrorCode::WindowShorterThanPatch,
          "patch_len must be in [1, window], got " + std::to_string(patch_len));
  if (stride < 1 || stride > patch_len)
    throw std::invalid_argument("stride must be in [1, patch_len]");
  if (d_model % n_heads != 0) throw std::invalid_argument("d_model must divide into n_heads");
  if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("dropout must be in [0, 1)");
  if (n_channels < 1 || n_layers < 1 || hidden_dim < 1 || ff_dim < 1 || d_model < 1)
    throw std::invalid_argument("model dimensions must be positive");
}

int PatchConfig::num_patches() const {
  const int base = (window - patch_len) / stride + 1;
  return pad_end ? base + 1 : base;
}

json PatchConfig::to_json() const {
  return json{{"window", window},
              {"horizon", horizon},
              {"patch_len", patch_len},
              {"stride", stride},
              {"pad_end", pad_end},
              {"encoder", encoder_name(encoder)},
              {"d_model", d_model},
              {"n_heads", n_heads},
              {"n_layers", n_layers},
              {"ff_dim", ff_dim},
              {"hidden_dim", hidden_dim},
              {"dropout", dropout},
              {"n_channels", n_channels}};
}

PatchConfig PatchConfig::from_json(const json& j) {
  PatchConfig c;
  c.window = j.at("window").get<int>();
  c.horizon = j.at("horizon").get<int>();
  c.patch_len = j.at("patch_len").get<int>();
  c.stride = j.at("stride").get<int>();
  c.pad_end = j.at("pad_end").get<bool>();
  const auto enc = encoder_from_string(j.at("encoder").get<std::string>());
  if (!enc) raise(ErrorCode::VersionMismatch, "unknown encoder kind in config");
  c.encoder = *enc;
  c.d_model = j.at("d_model").get<int>();
  c.n_heads = j.at("n_heads").get<int>();
  c.n_layers = j.at("n_layers").get<int>();
  c.ff_dim = j.at("ff_dim").get<int>();
  c.hidden_dim = j.at("hidden_dim").get<int>();
  c.dropout = j.at("dropout").get<double>();
  c.n_channels = j.at("n_channels").get<int>();
  return c;
}

std::vector<std::vector<double>> patchify(std::span<const double> series, int patch_len,
                                          int stride, bool pad_end) {
  const int W = static_cast<int>(series.size());
  if (patch_len < 1 || stride < 1 || stride > patch_len)
    throw std::invalid_argument("patchify: need 1 <= stride <= patch_len");
  if (W < patch_len)
    raise(ErrorCode::WindowShorterThanPatch, "series length " + std::to_string(W) +
                                                 " shorter than patch " + std::to_string(patch_len));
  std::vector<double> padded(series.begin(), series.end());
  if (pad_end) padded.insert(padded.end(), static_cast<std::size_t>(stride), series.back());
  const int n = (static_cast<int>(padded.size()) - patch_len) / stride + 1;
  std::vector<std::vector<double>> patches;
  patches.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto begin = padded.begin() + static_cast<std::ptrdiff_t>(i) * stride;
    patches.emplace_back(begin, begin + patch_len);
  }
  return patches;
}

// --- construction ---

namespace {

Tensor xavier(Rng& rng, int fan_in, int fan_out) {
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  Tensor t({fan_in, fan_out});
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-a, a);
  return t;
}

}  // namespace

PatchForecaster::PatchForecaster(PatchConfig config, Rng& rng) : config_(config) {
  config_.validate();
  const int P = config_.patch_len;
  const int d = config_.d_model;
  const int N = config_.num_patches();
  const int C = config_.n_channels;
  const int H = config_.horizon;

  add_param("embed.weight", xavier(rng, P, d));
  add_param("embed.bias", Tensor({d}));
  {
    Tensor pos({N, d});
    for (std::int64_t i = 0; i < pos.size(); ++i) pos[i] = 0.02 * rng.normal();
    add_param("pos", std::move(pos));
  }

  int head_in = 0;
  if (config_.encoder == EncoderKind::Attention) {
    for (int l = 0; l < config_.n_layers; ++l) {
      const std::string pre = "enc" + std::to_string(l) + ".";
      add_param(pre + "ln1.gamma", Tensor::full({d}, 1.0));
      add_param(pre + "ln1.beta", Tensor({d}));
      for (const char* nm : {"wq", "wk", "wv", "wo"}) add_param(pre + nm, xavier(rng, d, d));
      for (const char* nm : {"bq", "bk", "bv", "bo"}) add_param(pre + nm, Tensor({d}));
      add_param(pre + "ln2.gamma", Tensor::full({d}, 1.0));
      add_param(pre + "ln2.beta", Tensor({d}));
      add_param(pre + "ff1.weight", xavier(rng, d, config_.ff_dim));
      add_param(pre + "ff1.bias", Tensor({config_.ff_dim}));
      add_param(pre + "ff2.weight", xavier(rng, config_.ff_dim, d));
      add_param(pre + "ff2.bias", Tensor({d}));
    }
    add_param("final.gamma", Tensor::full({d}, 1.0));
    add_param("final.beta", Tensor({d}));
    head_in = C * N * d;
  } else {
    const int h = config_.hidden_dim;
    const double a = 1.0 / std::sqrt(static_cast<double>(h));
    for (int l = 0; l < config_.n_layers; ++l) {
      const std::string pre = "lstm" + std::to_string(l) + ".";
      const int in = l == 0 ? d : h;
      Tensor wx({in, 4 * h}), wh({h, 4 * h}), bias({4 * h});
      for (std::int64_t i = 0; i < wx.size(); ++i) wx[i] = rng.uniform(-a, a);
      for (std::int64_t i = 0; i < wh.size(); ++i) wh[i] = rng.uniform(-a, a);
      for (int i = h; i < 2 * h; ++i) bias[i] = 1.0;  // forget gate starts open
      add_param(pre + "wx", std::move(wx));
      add_param(pre + "wh", std::move(wh));
      add_param(pre + "bias", std::move(bias));
    }
    head_in = C * config_.hidden_dim;
  }
  add_param("head.weight", xavier(rng, head_in, H));
  add_param("head.bias", Tensor({H}));
}

// --- forward ---

Var PatchForecaster::pvar(Tape& tape, const std::vector<Var>& leaves,
                          const std::string& name) const {
  (void)tape;
  return leaves[static_cast<std::size_t>(index_of(name))];
}

Var PatchForecaster::maybe_dropout(Tape& tape, Var x, bool train_mode, Rng* rng) const {
  if (!train_mode || config_.dropout == 0.0) return x;
  if (!rng) raise(ErrorCode::EmptyData, "training-mode forward needs an rng for dropout");
  const Tensor& v = tape.value(x);
  const auto mask = rng->bernoulli_keep_mask(static_cast<std::size_t>(v.size()), config_.dropout);
  Tensor mt(v.shape());
  for (std::int64_t i = 0; i < mt.size(); ++i)
    mt[i] = static_cast<double>(mask[static_cast<std::size_t>(i)]);
  return tape.dropout(x, mt, config_.dropout);
}

Var PatchForecaster::embed_patches(Tape& tape, const std::vector<Var>& leaves,
                                   Var patch_rows) const {
  const int N = config_.num_patches();
  const int d = config_.d_model;
  const int rows = tape.value(patch_rows).dim(0);
  Var tok = tape.add(tape.matmul(patch_rows, pvar(tape, leaves, "embed.weight")),
                     pvar(tape, leaves, "embed.bias"));
  tok = tape.reshape(tok, {rows / N, N, d});
  return tape.add(tok, pvar(tape, leaves, "pos"));
}

Var PatchForecaster::attention_layer(Tape& tape, const std::vector<Var>& leaves, Var x, int layer,
                                     bool train_mode, Rng* rng, ForwardTrace* trace) const {
  const std::string pre = "enc" + std::to_string(layer) + ".";
  const int BC = tape.value(x).dim(0);
  const int N = tape.value(x).dim(1);
  const int d = config_.d_model;
  const int heads = config_.n_heads;
  const int dk = d / heads;

  Var ln1 = tape.layer_norm(x, pvar(tape, leaves, pre + "ln1.gamma"),
                            pvar(tape, leaves, pre + "ln1.beta"));
  Var flat = tape.reshape(ln1, {BC * N, d});
  auto proj = [&](const char* w, const char* b) {
    Var y = tape.add(tape.matmul(flat, pvar(tape, leaves, pre + w)), pvar(tape, leaves, pre + b));
    y = tape.reshape(y, {BC, N, heads, dk});
    y = tape.permute(y, {0, 2, 1, 3});
    return tape.reshape(y, {BC * heads, N, dk});
  };
  Var q = proj("wq", "bq");
  Var k = proj("wk", "bk");
  Var v = proj("wv", "bv");
  Var scores = tape.smul(tape.bmm(q, tape.permute(k, {0, 2, 1})), 1.0 / std::sqrt(double(dk)));
  Var attn = tape.softmax(scores, 2);
  if (trace) trace->attention.push_back(tape.value(attn));
  Var ctx = tape.bmm(attn, v);  // (BC*heads, N, dk)
  ctx = tape.reshape(ctx, {BC, heads, N, dk});
  ctx = tape.permute(ctx, {0, 2, 1, 3});
  ctx = tape.reshape(ctx, {BC * N, d});
  Var out = tape.add(tape.matmul(ctx, pvar(tape, leaves, pre + "wo")),
                     pvar(tape, leaves, pre + "bo"));
  out = maybe_dropout(tape, out, train_mode, rng);
  Var res = tape.add(x, tape.reshape(out, {BC, N, d}));

  Var ln2 = tape.layer_norm(res, pvar(tape, leaves, pre + "ln2.gamma"),
                            pvar(tape, leaves, pre + "ln2.beta"));
  Var f = tape.reshape(ln2, {BC * N, d});
  f = tape.relu(tape.add(tape.matmul(f, pvar(tape, leaves, pre + "ff1.weight")),
                         pvar(tape, leaves, pre + "ff1.bias")));
  f = maybe_dropout(tape, f, train_mode, rng);
  f = tape.add(tape.matmul(f, pvar(tape, leaves, pre + "ff2.weight")),
               pvar(tape, leaves, pre + "ff2.bias"));
  f = maybe_dropout(tape, f, train_mode, rng);
  return tape.add(res, tape.reshape(f, {BC, N, d}));
}

Var PatchForecaster::recurrent_encode(Tape& tape, const std::vector<Var>& leaves, Var tokens,
                                      bool train_mode, Rng* rng) const {
  const int BC = tape.value(tokens).dim(0);
  const int N = tape.value(tokens).dim(1);
  const int d = config_.d_model;
  const int h = config_.hidden_dim;

  std::vector<Var> xs;
  xs.reserve(static_cast<std::size_t>(N));
  for (int t = 0; t < N; ++t)
    xs.push_back(tape.reshape(tape.slice(tokens, 1, t, 1), {BC, d}));

  Var hidden{};
  for (int l = 0; l < config_.n_layers; ++l) {
    const std::string pre = "lstm" + std::to_string(l) + ".";
    Var wx = pvar(tape, leaves, pre + "wx");
    Var wh = pvar(tape, leaves, pre + "wh");
    Var bias = pvar(tape, leaves, pre + "bias");
    Var hs = tape.leaf(Tensor({BC, h}));
    Var cs = tape.leaf(Tensor({BC, h}));
    std::vector<Var> outs;
    outs.reserve(xs.size());
    for (Var x : xs) {
      Var gates = tape.add(tape.add(tape.matmul(x, wx), tape.matmul(hs, wh)), bias);
      Var gi = tape.sigmoid(tape.slice(gates, 1, 0, h));
      Var gf = tape.sigmoid(tape.slice(gates, 1, h, h));
      Var gg = tape.tanh(tape.slice(gates, 1, 2 * h, h));
      Var go = tape.sigmoid(tape.slice(gates, 1, 3 * h, h));
      cs = tape.add(tape.mul(gf, cs), tape.mul(gi, gg));
      hs = tape.mul(go, tape.tanh(cs));
      outs.push_back(hs);
    }
    hidden = hs;
    if (l + 1 < config_.n_layers) {
      for (Var& o : outs) o = maybe_dropout(tape, o, train_mode, rng);
      xs = std::move(outs);
    }
  }
  return hidden;  // (BC, hidden_dim)
}

Var PatchForecaster::encode_tokens(Tape& tape, const std::vector<Var>& leaves, Var tokens,
                                   bool train_mode, Rng* rng, ForwardTrace* trace) const {
  if (config_.encoder == EncoderKind::Recurrent)
    return recurrent_encode(tape, leaves, tokens, train_mode, rng);
  Var x = tokens;
  for (int l = 0; l < config_.n_layers; ++l)
    x = attention_layer(tape, leaves, x, l, train_mode, rng, trace);
  return tape.layer_norm(x, pvar(tape, leaves, "final.gamma"), pvar(tape, leaves, "final.beta"));
}

Var PatchForecaster::flatten_head(Tape& tape, const std::vector<Var>& leaves, Var encoded,
                                  int batch) const {
  const std::int64_t per = tape.value(encoded).size() / batch;
  Var flat = tape.reshape(encoded, {batch, static_cast<int>(per)});
  return tape.add(tape.matmul(flat, pvar(tape, leaves, "head.weight")),
                  pvar(tape, leaves, "head.bias"));
}

ForwardResult PatchForecaster::forward_traced(Tape& tape, const Tensor& inputs, bool train_mode,
                                              Rng* rng, ForwardTrace* trace) {
  if (inputs.rank() != 3 || inputs.dim(1) != config_.window || inputs.dim(2) != config_.n_channels)
    raise(ErrorCode::ShapeMismatch, "forward expects (B, " + std::to_string(config_.window) +
                                        ", " + std::to_string(config_.n_channels) + "), got " +
                                        inputs.shape_str());
  const int B = inputs.dim(0);
  const int W = config_.window;
  const int C = config_.n_channels;
  const int P = config_.patch_len;
  const int N = config_.num_patches();

  // patch extraction is pure data movement on the (gradient-free) inputs
  Tensor rows({B * C * N, P});
  std::vector<double> channel(static_cast<std::size_t>(W));
  for (int b = 0; b < B; ++b) {
    for (int c = 0; c < C; ++c) {
      for (int t = 0; t < W; ++t)
        channel[static_cast<std::size_t>(t)] = inputs[(static_cast<std::int64_t>(b) * W + t) * C + c];
      const auto patches = patchify(channel, P, config_.stride, config_.pad_end);
      for (int n = 0; n < N; ++n) {
        double* dst = rows.data() + ((static_cast<std::int64_t>(b) * C + c) * N + n) * P;
        std::copy(patches[static_cast<std::size_t>(n)].begin(),
                  patches[static_cast<std::size_t>(n)].end(), dst);
      }
    }
  }

  std::vector<Var> leaves = bind(tape);
  Var tokens = embed_patches(tape, leaves, tape.leaf(std::move(rows)));
  tokens = maybe_dropout(tape, tokens, train_mode, rng);
  Var encoded = encode_tokens(tape, leaves, tokens, train_mode, rng, trace);
  Var out = flatten_head(tape, leaves, encoded, B);
  return ForwardResult{out, std::move(leaves)};
}

ForwardResult PatchForecaster::forward(Tape& tape, const Tensor& inputs, bool train_mode,
                                       Rng* rng) {
  return forward_traced(tape, inputs, train_mode, rng, nullptr);
}

std::vector<double> PatchForecaster::predict(const Tensor& inputs) {
  Tape tape;
  const auto fr = forward(tape, inputs, false, nullptr);
  return tape.value(fr.output).buffer();
}

// --- rollout ---

RolloutResult rollout_season(PatchForecaster& model, const ScalerParams& scaler,
                             const std::vector<Channel>& channels, const RolloutInputs& inputs) {
  const PatchConfig& cfg = model.config();
  const int W = cfg.window;
  const int H = cfg.horizon;
  const int C = static_cast<int>(channels.size());
  if (C != cfg.n_channels)
    raise(ErrorCode::ShapeMismatch, "rollout: channel count does not match model config");
  if (channels.empty() || channels[0] != Channel::Rain)
    raise(ErrorCode::ShapeMismatch, "rollout: rain must be the first channel");
  if (static_cast<int>(inputs.prior_rain.size()) != kSeasonDays)
    raise(ErrorCode::MissingExogenous, "rollout: prior season rain must hold 122 days");

  // per-channel buffers over [prior season | target season], scaled units
  std::vector<std::vector<double>> buf(static_cast<std::size_t>(C),
                                       std::vector<double>(2 * kSeasonDays, 0.0));
  for (int c = 0; c < C; ++c) {
    const Channel ch = channels[static_cast<std::size_t>(c)];
    const std::vector<double>* prior = nullptr;
    const std::vector<double>* target = nullptr;
    switch (ch) {
      case Channel::Rain: prior = &inputs.prior_rain; break;
      case Channel::Nino34:
        prior = &inputs.prior_nino;
        target = &inputs.target_nino;
        break;
      case Channel::Iod:
        prior = &inputs.prior_iod;
        target = &inputs.target_iod;
        break;
    }
    if (static_cast<int>(prior->size()) != kSeasonDays ||
        (ch != Channel::Rain && static_cast<int>(target->size()) != kSeasonDays)) {
      raise(ErrorCode::MissingExogenous,
            std::string("rollout: channel ") + channel_name(ch) + " requires 122-day vectors");
    }
    for (int i = 0; i < kSeasonDays; ++i)
      buf[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)] =
          scale_value(scaler, ch, (*prior)[static_cast<std::size_t>(i)]);
    if (ch != Channel::Rain)
      for (int i = 0; i < kSeasonDays; ++i)
        buf[static_cast<std::size_t>(c)][static_cast<std::size_t>(kSeasonDays + i)] =
            scale_value(scaler, ch, (*target)[static_cast<std::size_t>(i)]);
  }

  RolloutResult result;
  result.daily_mm.reserve(kSeasonDays);
  int pos = kSeasonDays;  // next buffer index to predict
  Tensor window({1, W, C});
  while (static_cast<int>(result.daily_mm.size()) < kSeasonDays) {
    for (int t = 0; t < W; ++t)
      for (int c = 0; c < C; ++c)
        window[static_cast<std::int64_t>(t) * C + c] =
            buf[static_cast<std::size_t>(c)][static_cast<std::size_t>(pos - W + t)];
    const auto pred = model.predict(window);
    for (int h = 0; h < H && static_cast<int>(result.daily_mm.size()) < kSeasonDays; ++h) {
      const double mm = unscale_value(scaler, Channel::Rain, pred[static_cast<std::size_t>(h)]);
      const double clamped = mm < 0.0 ? 0.0 : mm;  // rain is non-negative
      result.daily_mm.push_back(clamped);
      buf[0][static_cast<std::size_t>(pos)] = scale_value(scaler, Channel::Rain, clamped);
      ++pos;
    }
  }
  double total = 0.0;
  for (double v : result.daily_mm) total += v;
  result.total_mm = total;
  return result;
}

}  // namespace monsoon
