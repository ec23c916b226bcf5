#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "monsoon/features.hpp"
#include "monsoon/model_iface.hpp"

namespace monsoon {

enum class EncoderKind { Attention, Recurrent };

const char* encoder_name(EncoderKind k);
std::optional<EncoderKind> encoder_from_string(const std::string& s);

struct PatchConfig {
  int window = 30;  // input days per sequence
  int horizon = 1;  // forecast days per step
  int patch_len = 16;
  int stride = 8;
  bool pad_end = true;
  EncoderKind encoder = EncoderKind::Attention;
  int d_model = 64;
  int n_heads = 4;
  int n_layers = 3;
  int ff_dim = 128;
  int hidden_dim = 128;  // recurrent encoder width
  double dropout = 0.1;
  int n_channels = 1;

  void validate() const;
  int num_patches() const;

  nlohmann::json to_json() const;
  static PatchConfig from_json(const nlohmann::json& j);
};

// Splits a series into length-P segments at stride S. Patch i covers
// [i*S, i*S + P). With pad_end the last value is repeated S times first,
// adding one extra patch; values are never altered.
std::vector<std::vector<double>> patchify(std::span<const double> series, int patch_len,
                                          int stride, bool pad_end);

// Attention weights captured during a forward pass, for inspection/tests.
struct ForwardTrace {
  std::vector<Tensor> attention;  // per layer, (B*C*heads, N, N)
};

// Patch-token forecaster with channel-independent encoding: every channel is
// patched, embedded, and encoded with the same shared weights; the flatten
// head then maps the concatenated per-channel encodings to H rain values.
// The encoder is either pre-norm multi-head self-attention or a stacked LSTM.
class PatchForecaster final : public ModelBase {
 public:
  PatchForecaster(PatchConfig config, Rng& init_rng);

  const PatchConfig& config() const { return config_; }

  ForwardResult forward(Tape& tape, const Tensor& inputs, bool train_mode, Rng* rng) override;
  ForwardResult forward_traced(Tape& tape, const Tensor& inputs, bool train_mode, Rng* rng,
                               ForwardTrace* trace);

  // exposed stages; `leaves` comes from a prior forward (or internal bind)
  Var embed_patches(Tape& tape, const std::vector<Var>& leaves, Var patch_rows) const;
  Var encode_tokens(Tape& tape, const std::vector<Var>& leaves, Var tokens, bool train_mode,
                    Rng* rng, ForwardTrace* trace = nullptr) const;
  Var flatten_head(Tape& tape, const std::vector<Var>& leaves, Var encoded, int batch) const;
  std::vector<Var> bind_params(Tape& tape) const { return bind(tape); }

  // eval-mode predictions, flattened (B * H)
  std::vector<double> predict(const Tensor& inputs);

 private:
  Var attention_layer(Tape& tape, const std::vector<Var>& leaves, Var x, int layer,
                      bool train_mode, Rng* rng, ForwardTrace* trace) const;
  Var recurrent_encode(Tape& tape, const std::vector<Var>& leaves, Var tokens, bool train_mode,
                       Rng* rng) const;
  Var pvar(Tape& tape, const std::vector<Var>& leaves, const std::string& name) const;
  Var maybe_dropout(Tape& tape, Var x, bool train_mode, Rng* rng) const;

  PatchConfig config_;
};

// Inputs for one season of autoregressive forecasting, all in raw units.
struct RolloutInputs {
  std::vector<double> prior_rain;   // 122, mm (last observed season)
  std::vector<double> prior_nino;   // 122 or empty
  std::vector<double> prior_iod;    // 122 or empty
  std::vector<double> target_nino;  // 122 or empty (target-year broadcast)
  std::vector<double> target_iod;   // 122 or empty
};

struct RolloutResult {
  std::vector<double> daily_mm;  // 122 values, clamped at 0
  double total_mm = 0.0;
};

// Rolls the model forward over the 122-day target season, H days at a time,
// feeding clamped predictions back through the rain channel while the
// exogenous channels advance with the calendar.
RolloutResult rollout_season(PatchForecaster& model, const ScalerParams& scaler,
                             const std::vector<Channel>& channels, const RolloutInputs& inputs);

}  // namespace monsoon
