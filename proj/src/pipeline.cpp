#include "monsoon/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <thread>

#include "monsoon/checkpoint.hpp"
#include "monsoon/errors.hpp"
#include "monsoon/util.hpp"

namespace monsoon {

using nlohmann::json;

CategoricalIodSeries Store::iod_categories() const {
  return categorize_iod(iod_dmi, iod_pos_threshold, iod_neg_threshold);
}

Store ingest_sources(const IngestOptions& options) {
  Store store;
  store.iod_pos_threshold = options.iod_pos_threshold;
  store.iod_neg_threshold = options.iod_neg_threshold;
  {
    std::istringstream in(
        fetch_source({SourceKind::RainfallCsv, options.rain_location, options.cache_dir}));
    store.rain = parse_daily_rainfall_csv(in);
  }
  {
    std::istringstream in(
        fetch_source({SourceKind::NoaaIndexText, options.nino_location, options.cache_dir}));
    store.nino = parse_noaa_index_text(in);
  }
  {
    std::istringstream in(
        fetch_source({SourceKind::IodCsv, options.iod_location, options.cache_dir}));
    store.iod_dmi = parse_iod_csv(in);
  }
  return store;
}

void save_store(const Store& store, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::string rain = serialize_daily_rainfall_csv(store.rain);
  const std::string nino = serialize_noaa_index_text(store.nino);
  const std::string iod = serialize_iod_csv(store.iod_dmi);
  write_text_file(dir + "/rain.csv", rain);
  write_text_file(dir + "/nino34.txt", nino);
  write_text_file(dir + "/iod.csv", iod);
  json meta;
  meta["version"] = 1;
  meta["tool_version"] = kToolVersion;
  meta["iod_pos_threshold"] = store.iod_pos_threshold;
  meta["iod_neg_threshold"] = store.iod_neg_threshold;
  meta["fingerprints"] = {{"rain.csv", sha256_hex(rain)},
                          {"nino34.txt", sha256_hex(nino)},
                          {"iod.csv", sha256_hex(iod)}};
  write_text_file(dir + "/store.json", meta.dump(2) + "\n");
}

Store load_store(const std::string& dir) {
  const json meta = json::parse(read_text_file(dir + "/store.json"));
  Store store;
  store.iod_pos_threshold = meta.value("iod_pos_threshold", 0.4);
  store.iod_neg_threshold = meta.value("iod_neg_threshold", -0.4);
  {
    std::istringstream in(read_text_file(dir + "/rain.csv"));
    store.rain = parse_daily_rainfall_csv(in);
  }
  {
    std::istringstream in(read_text_file(dir + "/nino34.txt"));
    store.nino = parse_noaa_index_text(in);
  }
  {
    std::istringstream in(read_text_file(dir + "/iod.csv"));
    store.iod_dmi = parse_iod_csv(in);
  }
  return store;
}

std::vector<int> covered_years(const Store& store, DatasetVariant variant) {
  std::vector<int> out;
  const auto iod = store.iod_categories();
  for (int y : store.rain.years()) {
    bool ok = true;
    if (variant_uses_nino(variant)) {
      for (int k = 0; k < 13 && ok; ++k) {
        const int month = (4 + k) % 12 + 1;
        const int yy = k < 8 ? y - 1 : y;
        ok = store.nino.has(yy, month);
      }
    }
    if (variant_uses_iod(variant)) {
      for (int m = 1; m <= 12 && ok; ++m) ok = iod.has(y, m);
    }
    if (ok) out.push_back(y);
  }
  return out;
}

SeasonDataset dataset_from_store(const Store& store, DatasetVariant variant, int split_boundary) {
  return build_season_dataset(variant, store.rain, store.nino, store.iod_categories(),
                              covered_years(store, variant), split_boundary);
}

// --- sidecar plumbing ---

json scaler_to_json(const ScalerParams& params) {
  json j;
  for (const auto& [channel, s] : params.by_channel)
    j[channel_name(channel)] = {{"mean", s.mean}, {"std", s.stddev}};
  return j;
}

ScalerParams scaler_from_json(const json& j) {
  ScalerParams params;
  for (Channel c : {Channel::Rain, Channel::Nino34, Channel::Iod}) {
    if (j.contains(channel_name(c))) {
      const auto& e = j.at(channel_name(c));
      params.by_channel[c] = ChannelScaler{e.at("mean").get<double>(), e.at("std").get<double>()};
    }
  }
  return params;
}

std::string store_fingerprint(const Store& store) {
  return sha256_hex(serialize_daily_rainfall_csv(store.rain) +
                    serialize_noaa_index_text(store.nino) + serialize_iod_csv(store.iod_dmi));
}

// --- training runs ---

namespace {

TrainData window_batch_to_train_data(WindowedBatch&& batch) {
  TrainData data;
  data.steps = batch.window;
  data.channels = static_cast<int>(batch.channels.size());
  data.horizon = batch.horizon;
  data.samples.reserve(batch.samples.size());
  for (auto& s : batch.samples)
    data.samples.push_back(TrainSample{std::move(s.input), std::move(s.target), s.year});
  return data;
}

std::pair<double, double> train_total_scaler(const SeasonDataset& ds) {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : ds.years)
    if (r.split == Split::Train) {
      sum += r.seasonal_total;
      ++n;
    }
  if (n == 0) raise(ErrorCode::EmptyData, "no train-split years");
  const double mean = sum / n;
  double ss = 0.0;
  for (const auto& r : ds.years)
    if (r.split == Split::Train) ss += (r.seasonal_total - mean) * (r.seasonal_total - mean);
  double sd = std::sqrt(ss / n);
  if (sd < 1e-12) sd = 1.0;
  return {mean, sd};
}

TrainData filter_by_split(const TrainData& data, const SeasonDataset& ds, Split split) {
  TrainData out = data;
  out.samples.clear();
  for (const auto& s : data.samples)
    if (ds.at(s.year).split == split) out.samples.push_back(s);
  return out;
}

std::vector<double> model_predict_batch(TrainableModel& model, const TrainData& data) {
  std::vector<double> out;
  out.reserve(data.samples.size());
  constexpr std::size_t kBatch = 64;
  for (std::size_t i = 0; i < data.samples.size(); i += kBatch) {
    const std::size_t last = std::min(data.samples.size(), i + kBatch);
    Tape tape;
    const auto fr = model.forward(tape, pack_inputs(data, i, last), false, nullptr);
    const Tensor& v = tape.value(fr.output);
    for (std::int64_t k = 0; k < v.size(); ++k) out.push_back(v[k]);
  }
  return out;
}

}  // namespace

TrainRunOutput run_training(const Store& store, const TrainRunOptions& options) {
  const SeasonDataset raw = dataset_from_store(store, options.variant, options.split_boundary);
  const ScalerParams scaler = fit_scaler(raw);
  const SeasonDataset scaled = apply_scaler(scaler, raw);
  const int channels = static_cast<int>(raw.channels().size());

  TrainRunOutput out;
  json sidecar;
  sidecar["tool_version"] = kToolVersion;
  sidecar["model"] = options.model;
  sidecar["variant"] = variant_name(options.variant);
  sidecar["split_boundary"] = options.split_boundary;
  sidecar["scaler"] = scaler_to_json(scaler);
  sidecar["data_fingerprint"] = store_fingerprint(store);
  sidecar["seed"] = options.train.seed;

  if (options.model == "patchtst") {
    PatchConfig cfg = options.patch;
    cfg.n_channels = channels;
    cfg.validate();
    TrainData data = window_batch_to_train_data(
        make_windows(scaled, cfg.window, cfg.horizon, Split::Train));
    auto [train, val] = split_train_validation(data, options.train.validation_fraction);
    Rng init(mix_seed(options.train.seed, 0xA1));
    PatchForecaster model(cfg, init);
    out.result = train_model(model, train, val, options.train);
    out.params = model.params();
    sidecar["patch"] = cfg.to_json();
  } else if (options.model == "lstm" || options.model == "cnn") {
    const auto [tmean, tstd] = train_total_scaler(raw);
    const TrainData all = make_baseline_sequences(scaled, options.lookback, tmean, tstd);
    const TrainData train_years = filter_by_split(all, scaled, Split::Train);
    if (train_years.samples.empty()) raise(ErrorCode::EmptyData, "no training sequences");
    auto [train, val] = split_train_validation(train_years, options.train.validation_fraction);
    Rng init(mix_seed(options.train.seed, 0xB2));
    std::unique_ptr<TrainableModel> model;
    if (options.model == "lstm") {
      LstmBaselineConfig cfg = options.lstm;
      cfg.channels = channels;
      cfg.horizon = 1;
      sidecar["lstm"] = {{"hidden", cfg.hidden}, {"layers", cfg.layers}, {"dropout", cfg.dropout}};
      model = std::make_unique<LstmBaseline>(cfg, init);
    } else {
      CnnBaselineConfig cfg = options.cnn;
      cfg.channels = channels;
      cfg.horizon = 1;
      sidecar["cnn"] = {{"filters", cfg.filters},
                        {"kernel", cfg.kernel},
                        {"layers", cfg.layers},
                        {"dropout", cfg.dropout}};
      model = std::make_unique<CnnBaseline>(cfg, init);
    }
    out.result = train_model(*model, train, val, options.train);
    out.params = model->params();
    sidecar["lookback"] = options.lookback;
    sidecar["total_scaler"] = {{"mean", tmean}, {"std", tstd}};
  } else {
    throw std::invalid_argument("run_training: unknown model '" + options.model + "'");
  }
  out.sidecar = std::move(sidecar);
  return out;
}

// --- benchmark ---

std::vector<double> predict_season_totals(PatchForecaster& model, const ScalerParams& scaler,
                                          const SeasonDataset& raw_dataset,
                                          const std::vector<int>& target_years) {
  std::vector<double> totals;
  totals.reserve(target_years.size());
  const auto channels = raw_dataset.channels();
  for (int y : target_years) {
    const YearRecord& prior = raw_dataset.at(y - 1);
    const YearRecord& target = raw_dataset.at(y);
    RolloutInputs in;
    in.prior_rain = prior.rain_daily;
    in.prior_nino = prior.nino_daily;
    in.prior_iod = prior.iod_daily;
    in.target_nino = target.nino_daily;
    in.target_iod = target.iod_daily;
    totals.push_back(rollout_season(model, scaler, channels, in).total_mm);
  }
  return totals;
}

namespace {

struct TrialSpec {
  std::string model;
  DatasetVariant variant;
  std::optional<int> lookback;
};

struct PatchOutcome {
  bool valid = false;
  DatasetVariant variant = DatasetVariant::D1;
  std::vector<int> years;
  std::vector<double> obs, pred;
};

MetricReport run_one_trial(const Store& store, const BenchmarkOptions& opt, const TrialSpec& spec,
                           std::uint64_t trial_seed, PatchOutcome* patch_out) {
  MetricReport report;
  report.model = spec.model;
  report.variant = spec.variant;
  report.lookback = spec.lookback;

  const SeasonDataset raw = dataset_from_store(store, spec.variant, opt.split_boundary);
  const std::vector<int> test_years = raw.year_list(Split::Test);
  if (test_years.size() < 2)
    raise(ErrorCode::DegenerateN, "benchmark needs at least 2 test years");
  std::vector<double> obs;
  obs.reserve(test_years.size());
  for (int y : test_years) obs.push_back(raw.at(y).seasonal_total);

  std::vector<double> pred;
  if (spec.model == "patchtst") {
    const ScalerParams scaler = fit_scaler(raw);
    const SeasonDataset scaled = apply_scaler(scaler, raw);
    PatchConfig cfg = opt.patch;
    cfg.n_channels = static_cast<int>(raw.channels().size());
    cfg.validate();
    TrainData data = window_batch_to_train_data(
        make_windows(scaled, cfg.window, cfg.horizon, Split::Train));
    TrainConfig tc = opt.train;
    tc.seed = trial_seed;
    auto [train, val] = split_train_validation(data, tc.validation_fraction);
    Rng init(mix_seed(trial_seed, 0xA1));
    PatchForecaster model(cfg, init);
    train_model(model, train, val, tc);
    pred = predict_season_totals(model, scaler, raw, test_years);
    if (patch_out) {
      patch_out->valid = true;
      patch_out->variant = spec.variant;
      patch_out->years = test_years;
      patch_out->obs = obs;
      patch_out->pred = pred;
    }
  } else if (spec.model == "lr" || spec.model == "gbt" || spec.model == "svr") {
    const BaselineTable table = make_baseline_table(raw, *spec.lookback);
    const auto Xtr = table_features(table, Split::Train);
    const auto ytr = table_targets(table, Split::Train);
    const auto Xte = table_features(table, Split::Test);
    const auto yte = table_targets(table, Split::Test);
    if (Xtr.empty() || Xte.size() < 2)
      raise(ErrorCode::EmptyTable, "not enough rows for baseline split");
    obs = yte;
    pred.reserve(Xte.size());
    if (spec.model == "lr") {
      const OlsModel m = ols_fit(Xtr, ytr, opt.ols);
      for (const auto& x : Xte) pred.push_back(ols_predict(m, x));
    } else if (spec.model == "gbt") {
      const TreeEnsemble m = gbt_fit(Xtr, ytr, opt.gbt);
      for (const auto& x : Xte) pred.push_back(gbt_predict(m, x));
    } else {
      const SvrModel m = svr_fit(Xtr, ytr, opt.svr);
      for (const auto& x : Xte) pred.push_back(svr_predict(m, x));
    }
  } else if (spec.model == "lstm" || spec.model == "cnn") {
    const ScalerParams scaler = fit_scaler(raw);
    const SeasonDataset scaled = apply_scaler(scaler, raw);
    const auto [tmean, tstd] = train_total_scaler(raw);
    const TrainData all = make_baseline_sequences(scaled, *spec.lookback, tmean, tstd);
    const TrainData train_years = filter_by_split(all, scaled, Split::Train);
    TrainData test_data = filter_by_split(all, scaled, Split::Test);
    if (train_years.samples.empty() || test_data.samples.size() < 2)
      raise(ErrorCode::EmptyTable, "not enough sequences for baseline split");
    TrainConfig tc = opt.train;
    tc.seed = trial_seed;
    auto [train, val] = split_train_validation(train_years, tc.validation_fraction);
    Rng init(mix_seed(trial_seed, 0xB2));
    std::unique_ptr<TrainableModel> model;
    const int channels = static_cast<int>(raw.channels().size());
    if (spec.model == "lstm") {
      LstmBaselineConfig cfg = opt.lstm;
      cfg.channels = channels;
      cfg.horizon = 1;
      model = std::make_unique<LstmBaseline>(cfg, init);
    } else {
      CnnBaselineConfig cfg = opt.cnn;
      cfg.channels = channels;
      cfg.horizon = 1;
      model = std::make_unique<CnnBaseline>(cfg, init);
    }
    train_model(*model, train, val, tc);
    obs.clear();
    for (const auto& s : test_data.samples) obs.push_back(raw.at(s.year).seasonal_total);
    for (double v : model_predict_batch(*model, test_data)) pred.push_back(v * tstd + tmean);
  } else {
    throw std::invalid_argument("unknown benchmark model '" + spec.model + "'");
  }

  report.n = static_cast<int>(obs.size());
  report.spearman = spearman(obs, pred);
  report.rmse_percent = rmse_percent(obs, pred, opt.rmse);
  return report;
}

}  // namespace

BenchmarkOutput run_benchmark(const Store& store, const BenchmarkOptions& opt) {
  static const std::vector<std::string> kBaselineModels{"lr", "gbt", "svr", "lstm", "cnn"};
  std::vector<TrialSpec> specs;
  auto allow = [&](const std::string& m) { return opt.only.empty() || opt.only == m; };
  if (allow("patchtst"))
    for (DatasetVariant v : all_variants()) specs.push_back(TrialSpec{"patchtst", v, std::nullopt});
  for (const auto& m : kBaselineModels) {
    if (!allow(m)) continue;
    for (DatasetVariant v : all_variants())
      for (int lookback = 1; lookback <= 5; ++lookback)
        specs.push_back(TrialSpec{m, v, lookback});
  }
  if (specs.empty()) throw std::invalid_argument("benchmark: filter matches no model family");

  std::vector<MetricReport> reports(specs.size());
  std::vector<PatchOutcome> patch_outcomes(specs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= specs.size()) return;
      const std::uint64_t trial_seed = opt.train.seed + i;
      try {
        reports[i] = run_one_trial(store, opt, specs[i], trial_seed, &patch_outcomes[i]);
      } catch (const std::exception& e) {
        MetricReport r;
        r.model = specs[i].model;
        r.variant = specs[i].variant;
        r.lookback = specs[i].lookback;
        r.error = e.what();
        reports[i] = r;
      }
    }
  };
  const int jobs = std::max(1, opt.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  BenchmarkOutput out;
  out.table = build_comparison_table(reports);

  // anomaly series of the best-performing patch trial
  const PatchOutcome* best = nullptr;
  double best_rmse = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (!patch_outcomes[i].valid || !reports[i].ok()) continue;
    if (reports[i].rmse_percent < best_rmse) {
      best_rmse = reports[i].rmse_percent;
      best = &patch_outcomes[i];
    }
  }
  if (best) {
    std::vector<double> train_totals;
    for (int y : store.rain.years())
      if (y <= opt.split_boundary) train_totals.push_back(store.rain.seasonal_total(y));
    const double lpa = long_period_average(train_totals).lpa;
    out.best_patch_anomalies = anomaly_series(best->years, best->obs, best->pred, lpa);
    out.best_patch_model = std::string("patchtst ") + variant_name(best->variant);
  }
  return out;
}

// --- season prediction ---

namespace {

// months May(T)..May(T+1) for a target year
std::vector<std::pair<int, int>> nino_window_months(int year) {
  std::vector<std::pair<int, int>> out;
  for (int k = 0; k < 13; ++k)
    out.emplace_back(k < 8 ? year - 1 : year, (4 + k) % 12 + 1);
  return out;
}

std::vector<std::pair<int, int>> iod_window_months(int year) {
  std::vector<std::pair<int, int>> out;
  for (int m = 1; m <= 12; ++m) out.emplace_back(year, m);
  return out;
}

std::vector<double> window_values(const MonthlyIndexSeries& series,
                                  const std::vector<std::pair<int, int>>& months,
                                  std::vector<std::pair<int, int>>* missing) {
  std::vector<double> out;
  out.reserve(months.size());
  for (const auto& [y, m] : months) {
    const auto v = series.value(y, m);
    if (!v) {
      if (missing) missing->push_back({y, m});
      out.push_back(0.0);
    } else {
      out.push_back(*v);
    }
  }
  return out;
}

}  // namespace

PredictReport run_predict(const Store& store, const PredictOptions& options) {
  const Checkpoint ckpt = load_checkpoint(options.checkpoint_path);
  const json& sidecar = ckpt.config;
  if (sidecar.value("model", "") != std::string("patchtst"))
    raise(ErrorCode::VersionMismatch, "season prediction needs a patchtst checkpoint");
  const auto variant = variant_from_string(sidecar.at("variant").get<std::string>());
  if (!variant) raise(ErrorCode::VersionMismatch, "bad variant in checkpoint sidecar");
  const PatchConfig cfg = PatchConfig::from_json(sidecar.at("patch"));
  const ScalerParams scaler = scaler_from_json(sidecar.at("scaler"));
  const int boundary = options.split_boundary
                           ? *options.split_boundary
                           : sidecar.value("split_boundary", kDefaultSplitBoundary);

  Rng dummy(0);
  PatchForecaster model(cfg, dummy);
  load_into(model.params(), ckpt);

  const int year = options.year;
  if (!store.rain.has_year(year - 1)) {
    MonsoonError e(ErrorCode::CoverageGap,
                   "prior season " + std::to_string(year - 1) + " absent from rainfall store");
    e.year = year - 1;
    throw e;
  }

  // overlay forecast files; observed store values always win
  MonthlyIndexSeries nino = store.nino;
  MonthlyIndexSeries dmi = store.iod_dmi;
  std::vector<std::pair<int, int>> nino_forecast_used, iod_forecast_used;
  if (!options.nino_forecast_path.empty()) {
    std::istringstream in(read_text_file(options.nino_forecast_path));
    const MonthlyIndexSeries fc = parse_noaa_index_text(in, "nino34_forecast");
    for (const auto& [key, v] : fc.values)
      if (!nino.has(key.first, key.second)) {
        nino.values[key] = v;
        nino_forecast_used.push_back(key);
      }
  }
  if (!options.iod_forecast_path.empty()) {
    std::istringstream in(read_text_file(options.iod_forecast_path));
    const MonthlyIndexSeries fc = parse_iod_csv(in);
    for (const auto& [key, v] : fc.values)
      if (!dmi.has(key.first, key.second)) {
        dmi.values[key] = v;
        iod_forecast_used.push_back(key);
      }
  }
  const CategoricalIodSeries iod =
      categorize_iod(dmi, store.iod_pos_threshold, store.iod_neg_threshold);

  RolloutInputs inputs;
  inputs.prior_rain = store.rain.daily(year - 1);
  std::vector<std::pair<int, int>> missing;
  std::vector<std::pair<int, int>> needed_nino, needed_iod;
  if (variant_uses_nino(*variant)) {
    const auto prior_months = nino_window_months(year - 1);
    const auto target_months = nino_window_months(year);
    needed_nino = target_months;
    inputs.prior_nino = broadcast_monthly_to_daily(window_values(nino, prior_months, &missing));
    inputs.target_nino = broadcast_monthly_to_daily(window_values(nino, target_months, &missing));
  }
  if (variant_uses_iod(*variant)) {
    MonthlyIndexSeries cats;  // categories as a numeric series for the window helper
    for (const auto& [key, v] : iod.values) cats.values[key] = static_cast<double>(v);
    const auto prior_months = iod_window_months(year - 1);
    const auto target_months = iod_window_months(year);
    needed_iod = target_months;
    inputs.prior_iod = broadcast_monthly_to_daily(window_values(cats, prior_months, &missing));
    inputs.target_iod = broadcast_monthly_to_daily(window_values(cats, target_months, &missing));
  }
  if (!missing.empty()) {
    std::string keys;
    for (const auto& [y, m] : missing) {
      if (!keys.empty()) keys += ", ";
      keys += "(" + std::to_string(y) + ", " + std::to_string(m) + ")";
    }
    MonsoonError e(ErrorCode::MissingExogenous, "missing exogenous index months: " + keys);
    e.year = missing.front().first;
    e.month = missing.front().second;
    throw e;
  }

  PredictReport report;
  report.year = year;
  report.variant = *variant;
  report.model = "patchtst";
  report.encoder = encoder_name(cfg.encoder);
  report.window = cfg.window;
  const RolloutResult rolled = rollout_season(model, scaler,
      [&] {
        std::vector<Channel> ch{Channel::Rain};
        if (variant_uses_nino(*variant)) ch.push_back(Channel::Nino34);
        if (variant_uses_iod(*variant)) ch.push_back(Channel::Iod);
        return ch;
      }(),
      inputs);
  report.daily_mm = rolled.daily_mm;
  report.total_mm = rolled.total_mm;

  std::vector<double> reference_totals;
  int ref_first = 0, ref_last = 0;
  for (int y : store.rain.years()) {
    if (y > boundary) continue;
    if (ref_first == 0) ref_first = y;
    ref_last = y;
    reference_totals.push_back(store.rain.seasonal_total(y));
  }
  report.thresholds = long_period_average(reference_totals);
  report.reference_first = ref_first;
  report.reference_last = ref_last;
  report.tercile = classify_tercile(report.total_mm, report.thresholds.t1, report.thresholds.t2);
  report.anomaly_mm = report.total_mm - report.thresholds.lpa;

  auto keep_needed = [](std::vector<std::pair<int, int>>& used,
                        const std::vector<std::pair<int, int>>& needed) {
    std::vector<std::pair<int, int>> kept;
    for (const auto& k : used)
      if (std::find(needed.begin(), needed.end(), k) != needed.end()) kept.push_back(k);
    std::sort(kept.begin(), kept.end());
    used = std::move(kept);
  };
  // prior-year windows may also draw on forecast files, but flag only months
  // the target-year windows actually consumed
  auto needed_nino_all = needed_nino;
  for (const auto& k : nino_window_months(year - 1)) needed_nino_all.push_back(k);
  auto needed_iod_all = needed_iod;
  for (const auto& k : iod_window_months(year - 1)) needed_iod_all.push_back(k);
  keep_needed(nino_forecast_used, needed_nino_all);
  keep_needed(iod_forecast_used, needed_iod_all);
  report.forecast_nino_months = nino_forecast_used;
  report.forecast_iod_months = iod_forecast_used;
  return report;
}

std::string format_predict_report(const PredictReport& r) {
  char buf[128];
  std::string out;
  out += "seasonal rainfall forecast\n";
  out += "target year: " + std::to_string(r.year) + "\n";
  out += std::string("model: ") + r.model + " " + variant_name(r.variant) + " (" + r.encoder +
         "), window " + std::to_string(r.window) + "\n";
  out += "lead: issued >=3 months before June 1\n";
  std::snprintf(buf, sizeof(buf), "seasonal total: %.1f mm\n", r.total_mm);
  out += buf;
  std::snprintf(buf, sizeof(buf), "long-period average (%d-%d): %.1f mm\n", r.reference_first,
                r.reference_last, r.thresholds.lpa);
  out += buf;
  std::snprintf(buf, sizeof(buf), "anomaly: %+.1f mm\n", r.anomaly_mm);
  out += buf;
  std::snprintf(buf, sizeof(buf), "tercile class: %s (t1 %.1f mm, t2 %.1f mm)\n",
                tercile_name(r.tercile), r.thresholds.t1, r.thresholds.t2);
  out += buf;
  auto list_months = [&](const char* name, const std::vector<std::pair<int, int>>& months) {
    if (months.empty()) return;
    out += std::string("forecast-sourced ") + name + " months:";
    for (const auto& [y, m] : months) out += " " + format_year_month(y, m);
    out += "\n";
  };
  list_months("nino34", r.forecast_nino_months);
  list_months("iod", r.forecast_iod_months);
  return out;
}

// --- run manifests ---

json make_run_manifest(const std::string& command, const json& resolved_config,
                       const std::vector<std::pair<std::string, std::string>>& input_files,
                       std::uint64_t seed) {
  json manifest;
  manifest["command"] = command;
  manifest["tool_version"] = kToolVersion;
  manifest["timestamp_utc"] = iso_timestamp_utc();
  manifest["seed"] = seed;
  manifest["config"] = resolved_config;
  json inputs = json::object();
  for (const auto& [name, path] : input_files) {
    inputs[name] = {{"path", path}, {"sha256", sha256_file(path)}};
  }
  manifest["inputs"] = inputs;
  return manifest;
}

}  // namespace monsoon
