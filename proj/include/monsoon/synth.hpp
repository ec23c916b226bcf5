#pragma once

#include <cstdint>
#include <string>

#include "monsoon/ingest.hpp"

namespace monsoon {

// Synthetic desk-scale data with a known teleconnection: the seasonal total
// is an affine function of the prior year's June-September index values and
// the target year's IOD categories, plus independent daily noise.
struct SynthOptions {
  int start_year = 1901;
  int n_years = 120;
  std::uint64_t seed = 0;
  double base_daily_mm = 7.5;
  double nino_coeff = 1.2;  // mm/day per index unit
  double iod_coeff = 0.8;   // mm/day per category unit
  double daily_noise_mm = 1.2;
  double iod_pos_threshold = 0.4;
  double iod_neg_threshold = -0.4;
};

struct SynthData {
  DailyRainfallSeries rain;
  MonthlyIndexSeries nino;
  MonthlyIndexSeries iod_dmi;
};

SynthData generate_synthetic(const SynthOptions& options);

// Writes rain.csv, nino34.txt and iod.csv in the ingest formats.
void write_synthetic_sources(const SynthData& data, const std::string& dir);

}  // namespace monsoon
