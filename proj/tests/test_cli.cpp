// End-to-end exercises of the command-line tool: spawns the real binary
// (path in MONSOON_BIN) against synthetic stores in a temp directory.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "monsoon/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

const std::string& binary() {
  static const std::string path = [] {
    const char* env = std::getenv("MONSOON_BIN");
    REQUIRE_MESSAGE(env != nullptr, "MONSOON_BIN must point at the monsoon binary");
    return std::string(env);
  }();
  return path;
}

RunResult run(const std::string& args) {
  const std::string cmd = binary() + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof(buf), pipe)) result.output.append(buf, n);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

// one shared scratch area with a ready-made store
const fs::path& scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "monsoon_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    auto synth = run("synth --years 20 --start-year 1990 --seed 1 --out " + (d / "srcs").string());
    REQUIRE_MESSAGE(synth.exit_code == 0, synth.output);
    auto ingest = run("ingest --rain " + (d / "srcs/rain.csv").string() + " --nino " +
                      (d / "srcs/nino34.txt").string() + " --iod " + (d / "srcs/iod.csv").string() +
                      " --out " + (d / "store").string());
    REQUIRE_MESSAGE(ingest.exit_code == 0, ingest.output);
    return d;
  }();
  return dir;
}

std::string store() { return (scratch() / "store").string(); }

const std::string kTinyModel =
    " --d-model 16 --heads 2 --layers 1 --ff-dim 24 --max-epochs 2 --batch 32";

}  // namespace

TEST_CASE("ingest: happy path prints a coverage report and writes the store") {
  const auto& d = scratch();
  CHECK(fs::exists(d / "store/rain.csv"));
  CHECK(fs::exists(d / "store/store.json"));
  CHECK(fs::exists(d / "store/manifest.json"));
  CHECK(fs::exists(d / "store/coverage.txt"));
}

TEST_CASE("ingest: a 121-day year exits 2 with an IncompleteYear diagnostic") {
  const auto& d = scratch();
  // drop the last line of the rainfall file
  std::string text = monsoon::read_text_file((d / "srcs/rain.csv").string());
  text = text.substr(0, text.rfind("\n", text.size() - 2) + 1);
  const std::string broken = (d / "broken_rain.csv").string();
  monsoon::write_text_file(broken, text);
  const auto r = run("ingest --rain " + broken + " --nino " + (d / "srcs/nino34.txt").string() +
                     " --iod " + (d / "srcs/iod.csv").string() + " --out " +
                     (d / "broken_store").string());
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("IncompleteYear") != std::string::npos);
}

TEST_CASE("train: checkpoint sidecar records the variant and window") {
  const auto& d = scratch();
  const auto r = run("train --store " + store() + " --variant D4 --model patchtst" + kTinyModel +
                     " --split-boundary 2005 --seed 3 --out " + (d / "train_d4").string());
  REQUIRE_MESSAGE(r.exit_code == 0, r.output);
  const json sidecar = json::parse(
      monsoon::read_text_file((d / "train_d4/model.ckpt.json").string()));
  CHECK(sidecar.at("variant") == "D4");
  CHECK(sidecar.at("patch").at("window") == 30);
  CHECK(fs::exists(d / "train_d4/loss_history.csv"));
  CHECK(fs::exists(d / "train_d4/manifest.json"));
  const json manifest = json::parse(
      monsoon::read_text_file((d / "train_d4/manifest.json").string()));
  CHECK(manifest.at("command") == "train");
  CHECK(manifest.at("inputs").contains("rain"));
}

TEST_CASE("train: identical seeds give identical loss CSVs and checkpoints") {
  const auto& d = scratch();
  const std::string flags = "train --store " + store() + " --variant D2 --model patchtst" +
                            kTinyModel + " --split-boundary 2005 --seed 7 --jobs 2 --out ";
  const auto r1 = run(flags + (d / "det_a").string());
  const auto r2 = run(flags + (d / "det_b").string());
  REQUIRE_MESSAGE(r1.exit_code == 0, r1.output);
  REQUIRE(r2.exit_code == 0);
  CHECK(monsoon::read_text_file((d / "det_a/loss_history.csv").string()) ==
        monsoon::read_text_file((d / "det_b/loss_history.csv").string()));
  CHECK(monsoon::read_text_file((d / "det_a/model.ckpt").string()) ==
        monsoon::read_text_file((d / "det_b/model.ckpt").string()));
}

TEST_CASE("train: unknown variant is a usage error") {
  const auto r = run("train --store " + store() + " --variant D9 --model patchtst");
  CHECK(r.exit_code == 1);
}

TEST_CASE("benchmark: --only patchtst yields exactly 4 result rows") {
  const auto& d = scratch();
  const auto r = run("benchmark --store " + store() + " --only patchtst" + kTinyModel +
                     " --split-boundary 2005 --seed 2 --jobs 2 --out " + (d / "bench").string());
  REQUIRE_MESSAGE(r.exit_code == 0, r.output);
  const std::string csv = monsoon::read_text_file((d / "bench/comparison.csv").string());
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "model,variant,lookback,spearman,rmse_percent");
  int rows = 0, patch_rows = 0, complete_rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    if (line.rfind("patchtst,", 0) == 0) ++patch_rows;
    // success rows carry both metric cells
    if (line.find(",,") == std::string::npos || line.rfind("patchtst,D", 0) != 0) ++complete_rows;
  }
  CHECK(rows == 4);
  CHECK(patch_rows == 4);
  CHECK(fs::exists(d / "bench/comparison.svg"));
  CHECK(fs::exists(d / "bench/anomalies.csv"));
}

TEST_CASE("predict: a rain-only checkpoint needs no forecast files") {
  const auto& d = scratch();
  const auto t = run("train --store " + store() + " --variant D1 --model patchtst" + kTinyModel +
                     " --split-boundary 2005 --seed 4 --out " + (d / "train_d1").string());
  REQUIRE_MESSAGE(t.exit_code == 0, t.output);
  const auto r = run("predict --store " + store() + " --year 2009 --checkpoint " +
                     (d / "train_d1/model.ckpt").string() + " --out " + (d / "pred_d1").string());
  REQUIRE_MESSAGE(r.exit_code == 0, r.output);
  CHECK(r.output.find("seasonal total:") != std::string::npos);
  CHECK(r.output.find("lead: issued >=3 months before June 1") != std::string::npos);
  CHECK(fs::exists(d / "pred_d1/report.json"));
  CHECK(fs::exists(d / "pred_d1/daily.csv"));
}

TEST_CASE("predict: missing exogenous months exit 4 and name the keys") {
  const auto& d = scratch();
  // the synthetic indices stop in December of the final year, so predicting
  // the year after the last season lacks Jan..May of the target year
  const auto r = run("predict --store " + store() + " --year 2010 --checkpoint " +
                     (d / "train_d4/model.ckpt").string() + " --out " + (d / "pred_d4").string());
  CHECK(r.exit_code == 4);
  CHECK(r.output.find("MissingExogenous") != std::string::npos);
  CHECK(r.output.find("(2010, 5)") != std::string::npos);
}

TEST_CASE("predict: forecast files fill the gap and are flagged in the report") {
  const auto& d = scratch();
  // synthesize a wider span with the same seed: identical history plus the
  // future months the store lacks, reused as forecast files
  const auto wide = run("synth --years 21 --start-year 1990 --seed 1 --out " +
                        (d / "wide").string());
  REQUIRE(wide.exit_code == 0);
  const auto r = run("predict --store " + store() + " --year 2010 --checkpoint " +
                     (d / "train_d4/model.ckpt").string() + " --nino-forecast " +
                     (d / "wide/nino34.txt").string() + " --iod-forecast " +
                     (d / "wide/iod.csv").string() + " --out " + (d / "pred_fc").string());
  REQUIRE_MESSAGE(r.exit_code == 0, r.output);
  CHECK(r.output.find("forecast-sourced nino34 months:") != std::string::npos);
  CHECK(r.output.find("2010-05") != std::string::npos);
}

TEST_CASE("gridsearch: trial CSV, best checkpoint config, empty axis rejection") {
  const auto& d = scratch();
  monsoon::write_text_file((d / "grid.json").string(), R"({"d_model": [16], "n_layers": [1, 2]})");
  const auto r = run("gridsearch --store " + store() + " --grid " + (d / "grid.json").string() +
                     " --variant D2" + kTinyModel + " --split-boundary 2005 --seed 6 --out " +
                     (d / "gs").string());
  REQUIRE_MESSAGE(r.exit_code == 0, r.output);
  const std::string csv = monsoon::read_text_file((d / "gs/trials.csv").string());
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + 2 trials
  CHECK(csv.rfind("trial_id,d_model,n_layers,best_val_loss,epochs,seconds,error", 0) == 0);

  // the best row's configuration matches the saved checkpoint sidecar
  const json sidecar = json::parse(monsoon::read_text_file((d / "gs/best.ckpt.json").string()));
  std::istringstream in(csv);
  std::string header, best_row;
  std::getline(in, header);
  std::getline(in, best_row);
  const auto fields = monsoon::split_string(best_row, ',');
  CHECK(sidecar.at("patch").at("d_model") == std::stoi(fields[1]));
  CHECK(sidecar.at("patch").at("n_layers") == std::stoi(fields[2]));

  monsoon::write_text_file((d / "empty_grid.json").string(), R"({"d_model": []})");
  const auto bad = run("gridsearch --store " + store() + " --grid " +
                       (d / "empty_grid.json").string() + " --variant D2 --out " +
                       (d / "gs_bad").string());
  CHECK(bad.exit_code == 1);
}

TEST_CASE("every command writes its manifest before other outputs") {
  const auto& d = scratch();
  for (const char* sub : {"train_d4", "bench", "pred_d1", "gs"}) {
    const json manifest = json::parse(
        monsoon::read_text_file((d / sub / "manifest.json").string()));
    CHECK(manifest.contains("timestamp_utc"));
    CHECK(manifest.contains("config"));
    CHECK(manifest.contains("tool_version"));
  }
}
