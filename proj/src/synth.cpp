#include "monsoon/synth.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>

#include "monsoon/rng.hpp"
#include "monsoon/util.hpp"

namespace monsoon {

SynthData generate_synthetic(const SynthOptions& opt) {
  if (opt.n_years < 2) throw std::invalid_argument("generate_synthetic: need at least 2 years");
  Rng rng(opt.seed);
  SynthData data;
  data.nino.name = "nino34";
  data.iod_dmi.name = "iod_dmi";

  // two years of margin before the first season cover every lookback window
  const int first = opt.start_year - 2;
  const int last = opt.start_year + opt.n_years - 1;
  constexpr double tau = 2.0 * std::numbers::pi;
  double ar_n = 0.0, ar_d = 0.0;
  int t = 0;
  for (int y = first; y <= last; ++y) {
    for (int m = 1; m <= 12; ++m, ++t) {
      ar_n = 0.8 * ar_n + 0.2 * rng.normal();
      ar_d = 0.8 * ar_d + 0.2 * rng.normal();
      const double nino = 1.2 * std::sin(tau * t / 41.0 + 0.7) +
                          0.35 * std::sin(tau * t / 7.3) + 0.15 * ar_n;
      const double dmi =
          0.5 * std::sin(tau * t / 23.0 + 1.3) + 0.25 * std::sin(tau * t / 5.1) + 0.1 * ar_d;
      data.nino.values[{y, m}] = nino;
      data.iod_dmi.values[{y, m}] = dmi;
    }
  }

  auto category = [&](int y, int m) {
    const double v = data.iod_dmi.values.at({y, m});
    if (v > opt.iod_pos_threshold) return 1.0;
    if (v < opt.iod_neg_threshold) return -1.0;
    return 0.0;
  };

  for (int y = opt.start_year; y < opt.start_year + opt.n_years; ++y) {
    std::vector<double> daily;
    daily.reserve(kSeasonDays);
    for (int m = 6; m <= 9; ++m) {
      // the level a season-ahead forecaster can recover: prior-year index
      // months (what the 13-month window exposes) plus current-year IOD state
      const double level = opt.base_daily_mm + opt.nino_coeff * data.nino.values.at({y - 1, m}) +
                           opt.iod_coeff * category(y, m);
      for (int d = 0; d < jjas_month_len(m); ++d) {
        const double v = level + opt.daily_noise_mm * rng.normal();
        daily.push_back(v > 0.0 ? v : 0.0);
      }
    }
    data.rain.set_year(y, std::move(daily));
  }
  return data;
}

void write_synthetic_sources(const SynthData& data, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_text_file(dir + "/rain.csv", serialize_daily_rainfall_csv(data.rain));
  write_text_file(dir + "/nino34.txt", serialize_noaa_index_text(data.nino));
  write_text_file(dir + "/iod.csv", serialize_iod_csv(data.iod_dmi));
}

}  // namespace monsoon
