// monsoon: seasonal monsoon rainfall forecasting toolkit.
//
// Subcommands cover the full pipeline: ingest raw sources into a validated
// store, train a forecaster, benchmark every model family, predict a target
// season, grid-search hyperparameters, and generate synthetic demo data.
//
// Exit codes: 0 success, 1 usage, 2 data/validation, 3 training,
// 4 prediction inputs, 5 grid search.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "monsoon/checkpoint.hpp"
#include "monsoon/errors.hpp"
#include "monsoon/pipeline.hpp"
#include "monsoon/report.hpp"
#include "monsoon/synth.hpp"
#include "monsoon/util.hpp"

namespace {

using nlohmann::json;
using namespace monsoon;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitTraining = 3;
constexpr int kExitPrediction = 4;
constexpr int kExitSearch = 5;

int exit_code_for(const MonsoonError& e) {
  switch (e.code()) {
    case ErrorCode::NonFiniteLoss:
      return kExitTraining;
    case ErrorCode::MissingExogenous:
      return kExitPrediction;
    case ErrorCode::AllTrialsFailed:
      return kExitSearch;
    default:
      return kExitData;
  }
}

std::string default_run_dir(const std::string& command) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "runs/%04d%02d%02dT%02d%02d%02d-%s", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, command.c_str());
  return buf;
}

std::string prepare_run_dir(std::string out_dir, const std::string& command) {
  if (out_dir.empty()) out_dir = default_run_dir(command);
  std::filesystem::create_directories(out_dir);
  return out_dir;
}

// Shared model/training flags; every default is materialized into the
// manifest, so a run is reproducible from its config block alone.
struct CommonTrainFlags {
  PatchConfig patch;
  TrainConfig train;
  LstmBaselineConfig lstm{32, 1, 0.0, 1, 1};
  CnnBaselineConfig cnn{16, 5, 2, 0.0, 1, 1};
  std::string encoder = "attention";
  int jobs = 1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--window", patch.window, "input window length, days");
    cmd->add_option("--horizon", patch.horizon, "forecast steps per model call");
    cmd->add_option("--patch-len", patch.patch_len, "patch length, days");
    cmd->add_option("--stride", patch.stride, "patch stride, days");
    cmd->add_flag("--no-pad-end,!--pad-end", [this](std::int64_t count) { patch.pad_end = count == 0; },
                  "repeat the last value to right-pad the patch grid")->default_str("--pad-end");
    cmd->add_option("--encoder", encoder, "attention|recurrent")->check(CLI::IsMember({"attention", "recurrent"}));
    cmd->add_option("--d-model", patch.d_model, "token embedding width");
    cmd->add_option("--heads", patch.n_heads, "attention heads");
    cmd->add_option("--layers", patch.n_layers, "encoder depth");
    cmd->add_option("--ff-dim", patch.ff_dim, "feed-forward width");
    cmd->add_option("--hidden", patch.hidden_dim, "recurrent encoder width");
    cmd->add_option("--dropout", patch.dropout, "dropout rate");
    cmd->add_option("--lstm-hidden", lstm.hidden, "LSTM baseline width");
    cmd->add_option("--lstm-layers", lstm.layers, "LSTM baseline depth");
    cmd->add_option("--cnn-filters", cnn.filters, "CNN baseline filters");
    cmd->add_option("--cnn-kernel", cnn.kernel, "CNN baseline kernel, days");
    cmd->add_option("--cnn-layers", cnn.layers, "CNN baseline depth");
    cmd->add_option("--batch", train.batch_size, "mini-batch size");
    cmd->add_option("--lr", train.learning_rate, "learning rate");
    cmd->add_option("--max-epochs", train.max_epochs, "epoch cap");
    cmd->add_option("--clip", train.clip_norm, "gradient clipping norm");
    cmd->add_option("--patience", train.patience, "early-stopping patience, epochs");
    cmd->add_option("--min-delta", train.min_delta, "early-stopping improvement threshold");
    cmd->add_option("--val-fraction", train.validation_fraction,
                    "trailing fraction of train years held out for validation");
    cmd->add_option("--seed", train.seed, "run seed");
    cmd->add_option("--jobs", jobs, "worker threads");
  }

  void resolve() {
    const auto enc = encoder_from_string(encoder);
    patch.encoder = *enc;
    train.jobs = jobs;
  }

  json to_json() const {
    json j;
    j["patch"] = patch.to_json();
    j["train"] = {{"batch_size", train.batch_size},
                  {"learning_rate", train.learning_rate},
                  {"max_epochs", train.max_epochs},
                  {"clip_norm", train.clip_norm},
                  {"patience", train.patience},
                  {"min_delta", train.min_delta},
                  {"seed", train.seed},
                  {"validation_fraction", train.validation_fraction},
                  {"jobs", train.jobs}};
    j["lstm"] = {{"hidden", lstm.hidden}, {"layers", lstm.layers}};
    j["cnn"] = {{"filters", cnn.filters}, {"kernel", cnn.kernel}, {"layers", cnn.layers}};
    return j;
  }
};

std::vector<std::pair<std::string, std::string>> store_inputs(const std::string& store_dir) {
  return {{"rain", store_dir + "/rain.csv"},
          {"nino34", store_dir + "/nino34.txt"},
          {"iod", store_dir + "/iod.csv"}};
}

// --- ingest ---

int cmd_ingest(const std::string& rain, const std::string& nino, const std::string& iod,
               const std::string& cache, double iod_pos, double iod_neg, std::string out_dir) {
  IngestOptions opts{rain, nino, iod, cache, iod_pos, iod_neg};
  const Store store = ingest_sources(opts);

  out_dir = prepare_run_dir(std::move(out_dir), "ingest");
  json config{{"rain", rain},          {"nino", nino},
              {"iod", iod},            {"cache_dir", cache},
              {"iod_pos", iod_pos},    {"iod_neg", iod_neg},
              {"store_dir", out_dir}};
  json manifest = make_run_manifest("ingest", config, {}, 0);
  write_text_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");

  save_store(store, out_dir);
  const auto years = store.rain.years();
  const CoverageReport coverage =
      validate_coverage(store.rain, store.nino, store.iod_categories(), years.front(), years.back());
  write_text_file(out_dir + "/coverage.txt", coverage.to_text());
  std::cout << "ingested " << years.size() << " rainfall years (" << years.front() << "-"
            << years.back() << "), " << store.nino.values.size() << " index months, "
            << store.iod_dmi.values.size() << " IOD months\n";
  std::cout << coverage.to_text();
  std::cout << "store written to " << out_dir << "\n";
  return 0;
}

// --- train ---

int cmd_train(const std::string& store_dir, const std::string& variant_s, const std::string& model,
              CommonTrainFlags& flags, int split_boundary, int lookback, bool dump_dataset,
              std::string out_dir) {
  flags.resolve();
  const auto variant = variant_from_string(variant_s);

  TrainRunOptions opts;
  opts.variant = *variant;
  opts.model = model;
  opts.patch = flags.patch;
  opts.lstm = flags.lstm;
  opts.cnn = flags.cnn;
  opts.train = flags.train;
  opts.split_boundary = split_boundary;
  opts.lookback = lookback;

  out_dir = prepare_run_dir(std::move(out_dir), "train");
  json config = flags.to_json();
  config["variant"] = variant_s;
  config["model"] = model;
  config["split_boundary"] = split_boundary;
  config["lookback"] = lookback;
  config["store_dir"] = store_dir;
  write_text_file(out_dir + "/manifest.json",
                  make_run_manifest("train", config, store_inputs(store_dir), flags.train.seed)
                          .dump(2) +
                      "\n");

  const Store store = load_store(store_dir);
  const TrainRunOutput result = run_training(store, opts);

  const std::string ckpt_path = out_dir + "/model.ckpt";
  save_checkpoint(result.params, result.sidecar, ckpt_path);
  write_text_file(ckpt_path + ".json", result.sidecar.dump(2) + "\n");
  write_loss_history_csv(result.result.history, out_dir + "/loss_history.csv");
  if (dump_dataset) {
    DatasetBundleMeta meta;
    meta.window = flags.patch.window;
    meta.horizon = flags.patch.horizon;
    if (model != "patchtst") meta.lookback = lookback;
    save_season_dataset(dataset_from_store(store, *variant, split_boundary), out_dir + "/dataset",
                        meta);
  }
  std::printf("trained %s %s: %d epochs, best val loss %.6g (epoch %d), %.1fs\n", model.c_str(),
              variant_s.c_str(), result.result.epochs_run, result.result.best_val_loss,
              result.result.best_epoch, result.result.seconds);
  std::cout << "checkpoint: " << ckpt_path << "\n";
  return 0;
}

// --- benchmark ---

int cmd_benchmark(const std::string& store_dir, CommonTrainFlags& flags, int split_boundary,
                  const std::string& only, const std::string& rmse_convention,
                  std::string out_dir) {
  flags.resolve();
  BenchmarkOptions opts;
  opts.split_boundary = split_boundary;
  opts.train = flags.train;
  opts.train.jobs = 1;  // parallelism lives in the trial pool
  opts.patch = flags.patch;
  opts.lstm = flags.lstm;
  opts.cnn = flags.cnn;
  opts.only = only;
  opts.jobs = flags.jobs;
  opts.rmse =
      rmse_convention == "conventional" ? RmseConvention::Conventional : RmseConvention::Printed;

  out_dir = prepare_run_dir(std::move(out_dir), "benchmark");
  json config = flags.to_json();
  config["split_boundary"] = split_boundary;
  config["only"] = only;
  config["rmse_convention"] = rmse_convention;
  config["store_dir"] = store_dir;
  write_text_file(out_dir + "/manifest.json",
                  make_run_manifest("benchmark", config, store_inputs(store_dir), flags.train.seed)
                          .dump(2) +
                      "\n");

  const Store store = load_store(store_dir);
  const BenchmarkOutput result = run_benchmark(store, opts);

  write_comparison_csv(result.table, out_dir + "/comparison.csv");
  write_comparison_svg(result.table, out_dir + "/comparison.svg");
  if (!result.best_patch_anomalies.rows.empty()) {
    write_anomaly_csv(result.best_patch_anomalies, out_dir + "/anomalies.csv");
    write_anomaly_svg(result.best_patch_anomalies, out_dir + "/anomalies.svg");
  }

  int ok = 0, failed = 0;
  for (const auto& row : result.table) {
    if (row.ok()) {
      ++ok;
    } else {
      ++failed;
      std::cerr << "trial failed: " << row.model << " " << variant_name(row.variant)
                << (row.lookback ? " L" + std::to_string(*row.lookback) : "") << ": " << row.error
                << "\n";
    }
  }
  std::printf("benchmark complete: %d rows (%d failed); best patch model: %s\n", ok + failed,
              failed, result.best_patch_model.empty() ? "n/a" : result.best_patch_model.c_str());
  std::cout << "comparison table: " << out_dir << "/comparison.csv\n";
  if (ok == 0) {
    std::cerr << "every benchmark trial failed\n";
    return kExitData;
  }
  return 0;
}

// --- predict ---

int cmd_predict(const std::string& store_dir, int year, const std::string& checkpoint,
                const std::string& nino_forecast, const std::string& iod_forecast,
                int split_boundary, std::string out_dir) {
  PredictOptions opts;
  opts.year = year;
  opts.checkpoint_path = checkpoint;
  opts.nino_forecast_path = nino_forecast;
  opts.iod_forecast_path = iod_forecast;
  if (split_boundary > 0) opts.split_boundary = split_boundary;

  out_dir = prepare_run_dir(std::move(out_dir), "predict");
  json config{{"year", year},
              {"checkpoint", checkpoint},
              {"nino_forecast", nino_forecast},
              {"iod_forecast", iod_forecast},
              {"split_boundary", split_boundary},
              {"store_dir", store_dir}};
  auto inputs = store_inputs(store_dir);
  inputs.emplace_back("checkpoint", checkpoint);
  if (!nino_forecast.empty()) inputs.emplace_back("nino_forecast", nino_forecast);
  if (!iod_forecast.empty()) inputs.emplace_back("iod_forecast", iod_forecast);
  write_text_file(out_dir + "/manifest.json",
                  make_run_manifest("predict", config, inputs, 0).dump(2) + "\n");

  const Store store = load_store(store_dir);
  const PredictReport report = run_predict(store, opts);

  const std::string text = format_predict_report(report);
  std::cout << text;
  write_text_file(out_dir + "/report.txt", text);
  std::string daily = "day_of_season,date,rain_mm\n";
  for (int i = 0; i < kSeasonDays; ++i) {
    const int month = jjas_month_of_index(i);
    int day = i + 1;
    for (int m = 6; m < month; ++m) day -= jjas_month_len(m);
    daily += std::to_string(i + 1) + ',' +
             format_iso_date(Date{report.year, month, day}) + ',' +
             format_double(report.daily_mm[static_cast<std::size_t>(i)]) + '\n';
  }
  write_text_file(out_dir + "/daily.csv", daily);
  json jr{{"year", report.year},
          {"variant", variant_name(report.variant)},
          {"total_mm", report.total_mm},
          {"lpa_mm", report.thresholds.lpa},
          {"anomaly_mm", report.anomaly_mm},
          {"tercile", tercile_name(report.tercile)},
          {"t1_mm", report.thresholds.t1},
          {"t2_mm", report.thresholds.t2},
          {"lead", "issued >=3 months before June 1"}};
  write_text_file(out_dir + "/report.json", jr.dump(2) + "\n");
  std::cout << "report written to " << out_dir << "\n";
  return 0;
}

// --- gridsearch ---

int cmd_gridsearch(const std::string& store_dir, const std::string& variant_s,
                   const std::string& model, const std::string& grid_path,
                   CommonTrainFlags& flags, int split_boundary, int lookback,
                   std::string out_dir) {
  flags.resolve();
  const auto variant = variant_from_string(variant_s);
  const GridSpec grid = GridSpec::from_json_text(read_text_file(grid_path));

  out_dir = prepare_run_dir(std::move(out_dir), "gridsearch");
  json config = flags.to_json();
  config["variant"] = variant_s;
  config["model"] = model;
  config["grid_file"] = grid_path;
  config["split_boundary"] = split_boundary;
  config["store_dir"] = store_dir;
  {
    json axes = json::object();
    for (const auto& [name, values] : grid.axes) axes[name] = values;
    config["grid"] = axes;
  }
  auto inputs = store_inputs(store_dir);
  inputs.emplace_back("grid", grid_path);
  write_text_file(out_dir + "/manifest.json",
                  make_run_manifest("gridsearch", config, inputs, flags.train.seed).dump(2) + "\n");

  const Store store = load_store(store_dir);
  const SeasonDataset raw = dataset_from_store(store, *variant, split_boundary);
  const ScalerParams scaler = fit_scaler(raw);
  const SeasonDataset scaled = apply_scaler(scaler, raw);

  // the searchable model family is the patch forecaster; grid axes override
  // its dimensions and the optimizer settings
  PatchConfig base_patch = flags.patch;
  base_patch.n_channels = static_cast<int>(raw.channels().size());
  TrainData data;
  {
    WindowedBatch batch = make_windows(scaled, base_patch.window, base_patch.horizon, Split::Train);
    data.steps = batch.window;
    data.channels = static_cast<int>(batch.channels.size());
    data.horizon = batch.horizon;
    for (auto& s : batch.samples)
      data.samples.push_back(TrainSample{std::move(s.input), std::move(s.target), s.year});
  }
  auto [train, val] = split_train_validation(data, flags.train.validation_fraction);

  ModelFactory factory = [&](const std::map<std::string, double>& point,
                             std::uint64_t seed) -> std::unique_ptr<TrainableModel> {
    PatchConfig cfg = base_patch;
    for (const auto& [name, v] : point) {
      if (name == "hidden_dim") cfg.hidden_dim = static_cast<int>(v);
      else if (name == "n_layers") cfg.n_layers = static_cast<int>(v);
      else if (name == "d_model") cfg.d_model = static_cast<int>(v);
      else if (name == "n_heads") cfg.n_heads = static_cast<int>(v);
      else if (name == "ff_dim") cfg.ff_dim = static_cast<int>(v);
      else if (name == "dropout") cfg.dropout = v;
      else if (name == "patch_len") cfg.patch_len = static_cast<int>(v);
      else if (name == "stride") cfg.stride = static_cast<int>(v);
      else if (name == "learning_rate" || name == "batch_size" || name == "clip_norm" ||
               name == "max_epochs" || name == "patience") {
        // handled by the training loop
      } else {
        throw std::invalid_argument("unknown grid axis '" + name + "'");
      }
    }
    cfg.validate();
    Rng init(mix_seed(seed, 0xA1));
    return std::make_unique<PatchForecaster>(cfg, init);
  };

  const GridSearchResult result = grid_search(grid, factory, train, val, flags.train);

  std::vector<std::string> axis_names;
  for (const auto& [name, _] : grid.axes) axis_names.push_back(name);
  write_trials_csv(result.ranked, axis_names, out_dir + "/trials.csv");

  json sidecar;
  sidecar["tool_version"] = kToolVersion;
  sidecar["model"] = "patchtst";
  sidecar["variant"] = variant_s;
  sidecar["split_boundary"] = split_boundary;
  sidecar["scaler"] = scaler_to_json(scaler);
  sidecar["data_fingerprint"] = store_fingerprint(store);
  sidecar["seed"] = flags.train.seed + static_cast<std::uint64_t>(result.best_trial_id);
  {
    PatchConfig best_cfg = base_patch;
    for (const auto& [name, v] : result.best_point) {
      if (name == "hidden_dim") best_cfg.hidden_dim = static_cast<int>(v);
      else if (name == "n_layers") best_cfg.n_layers = static_cast<int>(v);
      else if (name == "d_model") best_cfg.d_model = static_cast<int>(v);
      else if (name == "n_heads") best_cfg.n_heads = static_cast<int>(v);
      else if (name == "ff_dim") best_cfg.ff_dim = static_cast<int>(v);
      else if (name == "dropout") best_cfg.dropout = v;
      else if (name == "patch_len") best_cfg.patch_len = static_cast<int>(v);
      else if (name == "stride") best_cfg.stride = static_cast<int>(v);
    }
    sidecar["patch"] = best_cfg.to_json();
  }
  json best_point = json::object();
  for (const auto& [name, v] : result.best_point) best_point[name] = v;
  sidecar["grid_point"] = best_point;

  save_checkpoint(result.best_params, sidecar, out_dir + "/best.ckpt");
  write_text_file(out_dir + "/best.ckpt.json", sidecar.dump(2) + "\n");
  std::printf("grid search: %zu trials, best trial %d (val loss %.6g)\n", grid.trial_count(),
              result.best_trial_id, result.best_train.best_val_loss);
  std::cout << "trials: " << out_dir << "/trials.csv\nbest checkpoint: " << out_dir
            << "/best.ckpt\n";
  return 0;
}

// --- synth ---

int cmd_synth(int years, std::uint64_t seed, int start_year, std::string out_dir) {
  SynthOptions opts;
  opts.n_years = years;
  opts.seed = seed;
  opts.start_year = start_year;
  out_dir = prepare_run_dir(std::move(out_dir), "synth");
  json config{{"years", years}, {"seed", seed}, {"start_year", start_year}};
  write_text_file(out_dir + "/manifest.json",
                  make_run_manifest("synth", config, {}, seed).dump(2) + "\n");
  write_synthetic_sources(generate_synthetic(opts), out_dir);
  std::cout << "synthetic sources written to " << out_dir
            << " (rain.csv, nino34.txt, iod.csv)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seasonal monsoon rainfall forecasting toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value config file; explicit flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);

  std::string out_dir;
  app.add_option("--out", out_dir, "output directory (default runs/<timestamp>-<command>)")
      ->configurable(true);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "parse and validate raw data sources");
  std::string rain_loc, nino_loc, iod_loc, cache_dir = "cache";
  double iod_pos = 0.4, iod_neg = -0.4;
  ingest->add_option("--rain", rain_loc, "rainfall CSV path or URL")->required();
  ingest->add_option("--nino", nino_loc, "NOAA monthly index text path or URL")->required();
  ingest->add_option("--iod", iod_loc, "IOD CSV path or URL")->required();
  ingest->add_option("--cache", cache_dir, "download cache directory");
  ingest->add_option("--iod-pos", iod_pos, "IOD positive threshold");
  ingest->add_option("--iod-neg", iod_neg, "IOD negative threshold");

  // train
  auto* train = app.add_subcommand("train", "train one forecaster and write a checkpoint");
  std::string store_dir, variant_s = "D4", model = "patchtst";
  int split_boundary = kDefaultSplitBoundary, lookback = 1;
  bool dump_dataset = false;
  CommonTrainFlags train_flags;
  train->add_option("--store", store_dir, "ingested store directory")->required();
  train->add_option("--variant", variant_s, "dataset variant D1..D4")
      ->check(CLI::IsMember({"D1", "D2", "D3", "D4"}));
  train->add_option("--model", model, "patchtst|lstm|cnn")
      ->check(CLI::IsMember({"patchtst", "lstm", "cnn"}));
  train->add_option("--split-boundary", split_boundary, "last training year");
  train->add_option("--lookback", lookback, "lookback years (sequence baselines)");
  train->add_flag("--dump-dataset", dump_dataset, "write the dataset CSV bundle");
  train_flags.attach(train);

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "run every model family and emit the comparison");
  std::string bench_store, only, rmse_convention = "printed";
  int bench_boundary = kDefaultSplitBoundary;
  CommonTrainFlags bench_flags;
  bench->add_option("--store", bench_store, "ingested store directory")->required();
  bench->add_option("--only", only, "restrict to one family: patchtst|lr|gbt|svr|lstm|cnn");
  bench->add_option("--split-boundary", bench_boundary, "last training year");
  bench->add_option("--rmse-convention", rmse_convention, "printed|conventional")
      ->check(CLI::IsMember({"printed", "conventional"}));
  bench_flags.attach(bench);

  // predict
  auto* predict = app.add_subcommand("predict", "predict one target season from a checkpoint");
  std::string predict_store, checkpoint, nino_forecast, iod_forecast;
  int predict_year = 0, predict_boundary = 0;
  predict->add_option("--store", predict_store, "ingested store directory")->required();
  predict->add_option("--year", predict_year, "target year")->required();
  predict->add_option("--checkpoint", checkpoint, "trained model checkpoint")->required();
  predict->add_option("--nino-forecast", nino_forecast, "forecast index months, NOAA text layout");
  predict->add_option("--iod-forecast", iod_forecast, "forecast IOD months, IOD CSV layout");
  predict->add_option("--split-boundary", predict_boundary,
                      "LPA reference period override (default: checkpoint value)");

  // gridsearch
  auto* grid = app.add_subcommand("gridsearch", "grid-search hyperparameters");
  std::string grid_store, grid_variant = "D4", grid_model = "patchtst", grid_file;
  int grid_boundary = kDefaultSplitBoundary, grid_lookback = 1;
  CommonTrainFlags grid_flags;
  grid->add_option("--store", grid_store, "ingested store directory")->required();
  grid->add_option("--grid", grid_file, "JSON grid file: {axis: [values...]}")->required();
  grid->add_option("--variant", grid_variant, "dataset variant D1..D4")
      ->check(CLI::IsMember({"D1", "D2", "D3", "D4"}));
  grid->add_option("--model", grid_model, "patchtst")->check(CLI::IsMember({"patchtst"}));
  grid->add_option("--split-boundary", grid_boundary, "last training year");
  grid->add_option("--lookback", grid_lookback, "lookback years");
  grid_flags.attach(grid);

  // synth
  auto* synth = app.add_subcommand("synth", "generate synthetic demo sources");
  int synth_years = 120, synth_start = 1901;
  std::uint64_t synth_seed = 0;
  synth->add_option("--years", synth_years, "number of seasons");
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--start-year", synth_start, "first season year");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (app.got_subcommand(ingest))
      return cmd_ingest(rain_loc, nino_loc, iod_loc, cache_dir, iod_pos, iod_neg, out_dir);
    if (app.got_subcommand(train))
      return cmd_train(store_dir, variant_s, model, train_flags, split_boundary, lookback,
                       dump_dataset, out_dir);
    if (app.got_subcommand(bench))
      return cmd_benchmark(bench_store, bench_flags, bench_boundary, only, rmse_convention,
                           out_dir);
    if (app.got_subcommand(predict))
      return cmd_predict(predict_store, predict_year, checkpoint, nino_forecast, iod_forecast,
                         predict_boundary, out_dir);
    if (app.got_subcommand(grid))
      return cmd_gridsearch(grid_store, grid_variant, grid_model, grid_file, grid_flags,
                            grid_boundary, grid_lookback, out_dir);
    if (app.got_subcommand(synth))
      return cmd_synth(synth_years, synth_seed, synth_start, out_dir);
  } catch (const MonsoonError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
