#include "monsoon/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>
#include <thread>

#include "json.hpp"
#include "monsoon/errors.hpp"
#include "monsoon/optim.hpp"

namespace monsoon {

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (patience < 1) throw std::invalid_argument("patience must be >= 1");
  if (min_delta < 0.0) throw std::invalid_argument("min_delta must be >= 0");
  if (max_epochs < 0) throw std::invalid_argument("max_epochs must be >= 0");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw std::invalid_argument("validation_fraction must be in (0, 1)");
  if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
  if (!(clip_norm > 0.0)) throw std::invalid_argument("clip_norm must be > 0");
}

EarlyStopDecision early_stop_check(const std::vector<double>& val_history, int patience,
                                   double min_delta) {
  if (val_history.empty()) throw std::invalid_argument("early_stop_check: empty history");
  double best = std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  int stale = 0;
  for (std::size_t i = 0; i < val_history.size(); ++i) {
    const double v = val_history[i];
    const bool improved = best - v > min_delta;
    stale = improved ? 0 : stale + 1;
    if (v < best) {
      best = v;
      best_epoch = static_cast<int>(i) + 1;  // earliest on exact ties
    }
  }
  return EarlyStopDecision{stale >= patience, best_epoch};
}

std::pair<TrainData, TrainData> split_train_validation(const TrainData& data, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("split_train_validation: fraction must be in (0, 1)");
  std::set<int> years;
  for (const auto& s : data.samples) years.insert(s.year);
  TrainData train = data, val = data;
  train.samples.clear();
  val.samples.clear();
  if (years.size() < 2) {  // nothing to carve from
    train.samples = data.samples;
    return {train, val};
  }
  const int n_val = std::max(
      1, static_cast<int>(std::floor(static_cast<double>(years.size()) * fraction + 0.5)));
  std::vector<int> sorted(years.begin(), years.end());
  const std::set<int> val_years(sorted.end() - n_val, sorted.end());
  for (const auto& s : data.samples)
    (val_years.count(s.year) ? val : train).samples.push_back(s);
  return {train, val};
}

namespace {

struct ChunkPlan {
  std::size_t first, last;  // positions within the batch
};

std::vector<ChunkPlan> plan_chunks(std::size_t batch, int jobs) {
  const std::size_t n_chunks = std::min<std::size_t>(static_cast<std::size_t>(jobs), batch);
  std::vector<ChunkPlan> chunks;
  std::size_t start = 0;
  for (std::size_t c = 0; c < n_chunks; ++c) {
    const std::size_t len = batch / n_chunks + (c < batch % n_chunks ? 1 : 0);
    chunks.push_back(ChunkPlan{start, start + len});
    start += len;
  }
  return chunks;
}

struct ChunkOutput {
  double loss = 0.0;
  std::size_t count = 0;
  std::vector<Tensor> grads;
  std::exception_ptr error;
};

// Runs forward (+ backward when grads_out) over one contiguous chunk.
void run_chunk(TrainableModel& model, const TrainData& data, std::size_t first, std::size_t last,
               const std::vector<int>* order, bool train_mode, Rng* rng, bool want_grads,
               ChunkOutput& out) {
  try {
    Tape tape;
    const Tensor inputs = pack_inputs(data, first, last, order);
    const Tensor targets = pack_targets(data, first, last, order);
    auto fr = model.forward(tape, inputs, train_mode, rng);
    Var loss = tape.mse_loss(fr.output, tape.leaf(targets));
    out.loss = tape.value(loss).item();
    out.count = last - first;
    if (want_grads) {
      tape.backward(loss);
      out.grads.reserve(fr.param_leaves.size());
      for (Var p : fr.param_leaves) out.grads.push_back(tape.grad(p));
    }
  } catch (...) {
    out.error = std::current_exception();
  }
}

double weighted_chunk_loss(const std::vector<ChunkOutput>& outs) {
  double loss = 0.0;
  std::size_t n = 0;
  for (const auto& o : outs) {
    loss += o.loss * static_cast<double>(o.count);
    n += o.count;
  }
  return loss / static_cast<double>(n);
}

void run_chunks(TrainableModel& model, const TrainData& data, std::size_t first, std::size_t last,
                const std::vector<int>* order, bool train_mode, bool want_grads,
                std::uint64_t seed_base, std::vector<ChunkOutput>& outs, int jobs) {
  const auto chunks = plan_chunks(last - first, jobs);
  outs.assign(chunks.size(), ChunkOutput{});
  std::vector<Rng> rngs;
  rngs.reserve(chunks.size());
  for (std::size_t c = 0; c < chunks.size(); ++c)
    rngs.emplace_back(mix_seed(seed_base, 0xD2 + c));
  if (chunks.size() == 1) {
    run_chunk(model, data, first + chunks[0].first, first + chunks[0].last, order, train_mode,
              &rngs[0], want_grads, outs[0]);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(chunks.size());
    for (std::size_t c = 0; c < chunks.size(); ++c) {
      threads.emplace_back([&, c] {
        run_chunk(model, data, first + chunks[c].first, first + chunks[c].last, order, train_mode,
                  &rngs[c], want_grads, outs[c]);
      });
    }
    for (auto& t : threads) t.join();
  }
  for (const auto& o : outs)
    if (o.error) std::rethrow_exception(o.error);
}

}  // namespace

double evaluate_loss(TrainableModel& model, const TrainData& data, int batch_size, int jobs) {
  if (data.samples.empty()) raise(ErrorCode::EmptyData, "evaluate_loss: no samples");
  double loss = 0.0;
  std::size_t count = 0;
  std::vector<ChunkOutput> outs;
  for (std::size_t i = 0; i < data.samples.size(); i += static_cast<std::size_t>(batch_size)) {
    const std::size_t last = std::min(data.samples.size(), i + static_cast<std::size_t>(batch_size));
    run_chunks(model, data, i, last, nullptr, false, false, 0, outs, jobs);
    for (const auto& o : outs) {
      loss += o.loss * static_cast<double>(o.count);
      count += o.count;
    }
  }
  return loss / static_cast<double>(count);
}

TrainResult train_model(TrainableModel& model, const TrainData& train, const TrainData& val,
                        const TrainConfig& config) {
  config.validate();
  if (train.samples.empty()) raise(ErrorCode::EmptyData, "train_model: no training samples");
  const auto t0 = std::chrono::steady_clock::now();

  TrainResult result;
  result.best_val_loss = std::numeric_limits<double>::infinity();
  if (config.max_epochs == 0) return result;

  std::vector<Tensor> param_values;
  for (const auto& p : model.params()) param_values.push_back(p.value);
  Adam adam(AdamConfig{config.learning_rate, 0.9, 0.999, 1e-8}, param_values);

  Rng shuffle_rng(mix_seed(config.seed, 0x5F));
  const std::size_t n = train.samples.size();
  std::vector<double> val_history;
  std::vector<NamedTensor> best_params = model.params();
  std::vector<ChunkOutput> outs;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const std::vector<int> order = shuffle_rng.permutation(static_cast<int>(n));
    double epoch_loss = 0.0;
    int batch_index = 0;
    for (std::size_t i = 0; i < n; i += static_cast<std::size_t>(config.batch_size), ++batch_index) {
      const std::size_t last = std::min(n, i + static_cast<std::size_t>(config.batch_size));
      const std::uint64_t seed_base =
          mix_seed(config.seed, (static_cast<std::uint64_t>(epoch) << 24) ^
                                    static_cast<std::uint64_t>(batch_index));
      try {
        run_chunks(model, train, i, last, &order, true, true, seed_base, outs, config.jobs);
      } catch (const MonsoonError& e) {
        if (e.code() == ErrorCode::NonFiniteValue || e.code() == ErrorCode::NonFiniteGradient) {
          raise(ErrorCode::NonFiniteLoss, "non-finite loss at epoch " + std::to_string(epoch) +
                                              ", batch " + std::to_string(batch_index) + ": " +
                                              e.what());
        }
        throw;
      }

      // combine chunk gradients in fixed chunk order (deterministic)
      const double batch_n = static_cast<double>(last - i);
      std::vector<Tensor> grads = std::move(outs[0].grads);
      {
        const double w0 = static_cast<double>(outs[0].count) / batch_n;
        for (auto& g : grads)
          for (std::int64_t k = 0; k < g.size(); ++k) g[k] *= w0;
      }
      for (std::size_t c = 1; c < outs.size(); ++c) {
        const double w = static_cast<double>(outs[c].count) / batch_n;
        for (std::size_t p = 0; p < grads.size(); ++p)
          for (std::int64_t k = 0; k < grads[p].size(); ++k)
            grads[p][k] += w * outs[c].grads[p][k];
      }
      epoch_loss += weighted_chunk_loss(outs) * batch_n;

      clip_gradients(grads, config.clip_norm);
      param_values.clear();
      for (auto& p : model.params()) param_values.push_back(std::move(p.value));
      adam.step(param_values, grads);
      for (std::size_t p = 0; p < param_values.size(); ++p)
        model.params()[p].value = std::move(param_values[p]);
    }
    epoch_loss /= static_cast<double>(n);

    const double val_loss = val.samples.empty()
                                ? epoch_loss
                                : evaluate_loss(model, val, config.batch_size, config.jobs);
    result.history.push_back(EpochStats{epoch, epoch_loss, val_loss});
    val_history.push_back(val_loss);
    if (val_loss < result.best_val_loss) {
      result.best_val_loss = val_loss;
      result.best_epoch = epoch;
      best_params = model.params();
    }
    result.epochs_run = epoch;
    if (early_stop_check(val_history, config.patience, config.min_delta).stop) break;
  }

  model.params() = std::move(best_params);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

// --- grid search ---

std::size_t GridSpec::trial_count() const {
  std::size_t n = 1;
  for (const auto& [_, values] : axes) n *= values.size();
  return n;
}

std::map<std::string, double> GridSpec::point(std::size_t index) const {
  std::map<std::string, double> out;
  for (auto it = axes.rbegin(); it != axes.rend(); ++it) {
    const auto& [name, values] = *it;
    out[name] = values[index % values.size()];
    index /= values.size();
  }
  return out;
}

GridSpec GridSpec::from_json_text(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (!j.is_object() || j.empty())
    throw std::invalid_argument("grid file must be a non-empty JSON object of axes");
  GridSpec grid;
  for (const auto& [name, values] : j.items()) {
    if (!values.is_array() || values.empty())
      throw std::invalid_argument("grid axis '" + name + "' must be a non-empty array");
    std::vector<double> axis;
    for (const auto& v : values) axis.push_back(v.get<double>());
    grid.axes.emplace_back(name, std::move(axis));
  }
  return grid;
}

GridSearchResult grid_search(const GridSpec& grid, const ModelFactory& factory,
                             const TrainData& train, const TrainData& val,
                             const TrainConfig& base_config) {
  if (grid.axes.empty()) throw std::invalid_argument("grid_search: empty grid");
  const std::size_t n_trials = grid.trial_count();

  GridSearchResult result;
  std::vector<TrialResult> trials;
  trials.reserve(n_trials);
  double best_val = std::numeric_limits<double>::infinity();

  for (std::size_t i = 0; i < n_trials; ++i) {
    TrialResult trial;
    trial.trial_id = static_cast<int>(i);
    trial.point = grid.point(i);
    TrainConfig cfg = base_config;
    cfg.seed = base_config.seed + i;  // independent derived seed per trial
    for (const auto& [name, v] : trial.point) {
      if (name == "learning_rate") cfg.learning_rate = v;
      else if (name == "batch_size") cfg.batch_size = static_cast<int>(v);
      else if (name == "clip_norm") cfg.clip_norm = v;
      else if (name == "max_epochs") cfg.max_epochs = static_cast<int>(v);
      else if (name == "patience") cfg.patience = static_cast<int>(v);
    }
    try {
      auto model = factory(trial.point, cfg.seed);
      const TrainResult tr = train_model(*model, train, val, cfg);
      trial.best_val_loss = tr.best_val_loss;
      trial.epochs_run = tr.epochs_run;
      trial.seconds = tr.seconds;
      if (tr.best_val_loss < best_val) {
        best_val = tr.best_val_loss;
        result.best_trial_id = trial.trial_id;
        result.best_point = trial.point;
        result.best_params = model->params();
        result.best_train = tr;
      }
    } catch (const std::exception& e) {
      trial.error = e.what();
    }
    trials.push_back(std::move(trial));
  }

  std::stable_sort(trials.begin(), trials.end(), [](const TrialResult& a, const TrialResult& b) {
    if (a.ok() != b.ok()) return a.ok();
    if (!a.ok()) return a.trial_id < b.trial_id;
    if (a.best_val_loss != b.best_val_loss) return a.best_val_loss < b.best_val_loss;
    return a.trial_id < b.trial_id;
  });
  result.ranked = std::move(trials);
  if (result.best_trial_id < 0)
    raise(ErrorCode::AllTrialsFailed, "every grid trial failed; first error: " +
                                          (result.ranked.empty() ? std::string("none")
                                                                 : result.ranked[0].error));
  return result;
}

}  // namespace monsoon
