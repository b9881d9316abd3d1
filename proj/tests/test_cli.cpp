#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "wds/formats.hpp"
#include "wds/pipeline.hpp"
#include "wds/png_io.hpp"
#include "wds/scoring.hpp"
#include "wds/synth.hpp"

using namespace wds;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("wds_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs the installed binary with shell-quoted arguments already baked into
// `args`, capturing exit code and both streams.
RunResult run_cli(const TempDir& dir, const std::string& args) {
  const fs::path out_file = dir.path / "_stdout";
  const fs::path err_file = dir.path / "_stderr";
  const std::string cmd = std::string(WDSCORE_BIN) + " " + args + " > " +
                          out_file.string() + " 2> " + err_file.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_text_file(out_file);
  r.err = read_text_file(err_file);
  return r;
}

// Relative path -> file bytes for every regular file under root.
std::map<std::string, std::string> dir_contents(const fs::path& root) {
  std::map<std::string, std::string> contents;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) {
      contents[fs::relative(entry.path(), root).string()] =
          read_text_file(entry.path());
    }
  }
  return contents;
}

// A ready-made noisy dataset most tests score and evaluate.
std::string make_dataset(const fs::path& dir, std::uint64_t seed, int count,
                         double likelihood_noise, double rater_noise) {
  SynthSpec spec;
  spec.seed = seed;
  spec.image_count = count;
  spec.width = 48;
  spec.height = 48;
  spec.positive_fraction = 0.6;
  spec.area_lo = 0.01;
  spec.area_hi = 0.35;
  spec.likelihood_noise = likelihood_noise;
  spec.rater_noise = rater_noise;
  const ScoringParams params{0.44, 78.0, 0.05};
  write_dataset(dir, spec, params, generate_dataset(spec, params));
  return (dir / "manifest.json").string();
}

}  // namespace

TEST_CASE("synth is deterministic on disk") {
  TempDir dir("synthdet");
  const std::string flags =
      " --seed 9 --count 8 --width 48 --height 48 --rater-noise 0.4"
      " --likelihood-noise 0.2 --alpha 0.05";
  const RunResult a =
      run_cli(dir, "synth --out " + (dir.path / "a").string() + flags);
  REQUIRE(a.exit_code == 0);
  CHECK(a.err.find("wrote 8 images") != std::string::npos);
  const RunResult b =
      run_cli(dir, "synth --out " + (dir.path / "b").string() + flags);
  REQUIRE(b.exit_code == 0);

  const auto ca = dir_contents(dir.path / "a");
  const auto cb = dir_contents(dir.path / "b");
  REQUIRE(ca.size() == cb.size());
  CHECK(ca.size() == 3 * 8 + 1);  // annotation + likelihood + truth + manifest
  for (const auto& [rel, bytes] : ca) {
    REQUIRE(cb.count(rel) == 1);
    CHECK(cb.at(rel) == bytes);
  }
}

TEST_CASE("score output matches the library bit for bit") {
  TempDir dir("scorelib");
  const std::string manifest =
      make_dataset(dir.path / "data", 14, 10, 0.15, 0.0);

  const RunResult r = run_cli(
      dir, "score --manifest " + manifest + " --alpha 0.05 --output " +
               (dir.path / "scores.csv").string());
  REQUIRE(r.exit_code == 0);

  // Recompute in-process from the dataset files the CLI read.
  PipelineConfig config;  // defaults match the CLI's defaults
  std::vector<ImageScoreRow> rows;
  const json manifest_json = json::parse(read_text_file(manifest));
  for (const auto& entry : manifest_json.at("images")) {
    const LikelihoodMap map = read_likelihood_png(
        dir.path / "data" / entry.at("likelihood").get<std::string>());
    const WeightMap weights =
        gaussian_weights(map.width(), map.height(), config.params.sigma);
    rows.push_back(
        score_likelihood(entry.at("image_id").get<std::string>(), map,
                         weights, config)
            .row);
  }
  std::sort(rows.begin(), rows.end(),
            [](const ImageScoreRow& a, const ImageScoreRow& b) {
              return a.image_id < b.image_id;
            });
  CHECK(read_text_file(dir.path / "scores.csv") == score_csv(rows));
}

TEST_CASE("score --masks scores the truth masks directly") {
  TempDir dir("scoremasks");
  const std::string manifest =
      make_dataset(dir.path / "data", 15, 8, 0.3, 0.0);

  const RunResult r = run_cli(dir, "score --manifest " + manifest +
                                       " --masks --alpha 0.05 --output " +
                                       (dir.path / "scores.csv").string());
  REQUIRE(r.exit_code == 0);

  PipelineConfig config;
  std::vector<ImageScoreRow> rows;
  const json manifest_json = json::parse(read_text_file(manifest));
  for (const auto& entry : manifest_json.at("images")) {
    const BinaryMask truth = read_mask_png(
        dir.path / "data" / entry.at("truth").get<std::string>());
    const WeightMap weights =
        gaussian_weights(truth.width(), truth.height(), config.params.sigma);
    rows.push_back(score_segmentation(entry.at("image_id").get<std::string>(),
                                      truth, weights, config)
                       .row);
  }
  std::sort(rows.begin(), rows.end(),
            [](const ImageScoreRow& a, const ImageScoreRow& b) {
              return a.image_id < b.image_id;
            });
  CHECK(read_text_file(dir.path / "scores.csv") == score_csv(rows));
}

TEST_CASE("scoring an empty directory yields just the header") {
  TempDir dir("scoreempty");
  fs::create_directories(dir.path / "empty");
  const RunResult r = run_cli(
      dir, "score --input " + (dir.path / "empty").string() + " --alpha 0.05");
  CHECK(r.exit_code == 0);
  CHECK(r.out == "image_id,w,G,score\n");
}

TEST_CASE("alpha is required") {
  TempDir dir("noalpha");
  fs::create_directories(dir.path / "empty");
  const RunResult r =
      run_cli(dir, "score --input " + (dir.path / "empty").string());
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("alpha") != std::string::npos);
}

TEST_CASE("unreadable inputs exit 1 with a diagnostic") {
  TempDir dir("badinput");
  fs::create_directories(dir.path / "in");
  write_text_file(dir.path / "in" / "broken.png", "not a png");
  const RunResult r = run_cli(
      dir, "score --input " + (dir.path / "in").string() + " --alpha 0.05");
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("error:") != std::string::npos);
  CHECK(r.err.find("broken.png") != std::string::npos);
}

TEST_CASE("usage errors exit 2") {
  TempDir dir("usage");
  CHECK(run_cli(dir, "score --no-such-flag").exit_code == 2);
  CHECK(run_cli(dir, "fit").exit_code == 2);  // missing required --train
  CHECK(run_cli(dir, "").exit_code == 2);     // subcommand required
  CHECK(run_cli(dir, "eval --scores a --manifest b --beta 0").exit_code ==
        2);
}

TEST_CASE("fit writes a params file the other commands accept") {
  TempDir dir("fitchain");
  // Hand-built training set: nested squares with targets from known params.
  fs::create_directories(dir.path / "masks");
  const ScoringParams truth{0.44, 78.0, 0.05};
  const WeightMap weights = gaussian_weights(32, 32, truth.sigma);
  std::string jsonl;
  for (int side = 4; side <= 28; side += 4) {
    BinaryMask mask(32, 32);
    const int lo = (32 - side) / 2;
    for (int y = lo; y < lo + side; ++y) {
      for (int x = lo; x < lo + side; ++x) mask.set(x, y, 1);
    }
    const std::string name = "m" + std::to_string(side) + ".png";
    write_mask_png(dir.path / "masks" / name, mask);
    const double target = score_from_area(weighted_area(mask, weights), truth);
    jsonl += json{{"image_id", name},
                  {"mask_path", "masks/" + name},
                  {"human_score", target}}
                 .dump() +
             "\n";
  }
  write_text_file(dir.path / "train.jsonl", jsonl);

  const RunResult r = run_cli(
      dir, "fit --train " + (dir.path / "train.jsonl").string() +
               " --lambda-grid 20 160 8 --sigma-grid 0.2 1.0 5"
               " --alpha-grid 0 0.3 4 --refine-sweeps 500 --output " +
               (dir.path / "fit.json").string());
  REQUIRE(r.exit_code == 0);
  CHECK(r.err.find("fit: mse=") != std::string::npos);

  const json fit = json::parse(read_text_file(dir.path / "fit.json"));
  CHECK(fit.at("converged") == true);
  CHECK(fit.at("mse").get<double>() < 1e-4);
  const ScoringParams fitted = read_params_file(dir.path / "fit.json");
  CHECK(fitted.lambda > 0.0);

  // The fit JSON doubles as --params for score.
  fs::create_directories(dir.path / "empty");
  const RunResult score = run_cli(
      dir, "score --input " + (dir.path / "empty").string() + " --params " +
               (dir.path / "fit.json").string());
  CHECK(score.exit_code == 0);
}

TEST_CASE("strict fit with no refinement budget exits 3") {
  TempDir dir("strict");
  fs::create_directories(dir.path / "masks");
  std::string jsonl;
  for (int k = 1; k <= 4; ++k) {
    BinaryMask mask(16, 16);
    for (int y = 0; y < 4 * k; ++y) {
      for (int x = 0; x < 4 * k; ++x) mask.set(x, y, 1);
    }
    const std::string name = "m" + std::to_string(k) + ".png";
    write_mask_png(dir.path / "masks" / name, mask);
    jsonl += json{{"image_id", name},
                  {"mask_path", "masks/" + name},
                  {"responses", json::array({k - 1, k - 1, k - 1})}}
                 .dump() +
             "\n";
  }
  write_text_file(dir.path / "train.jsonl", jsonl);

  const std::string base = "fit --train " +
                           (dir.path / "train.jsonl").string() +
                           " --lambda-grid 20 160 4 --sigma-grid 0.2 1.0 3"
                           " --alpha-grid 0 0.3 3 --refine-sweeps 0";
  CHECK(run_cli(dir, base).exit_code == 0);
  const RunResult strict = run_cli(dir, base + " --strict");
  CHECK(strict.exit_code == 3);
  CHECK(strict.err.find("converged=no") != std::string::npos);
}

TEST_CASE("malformed training data exits 1 with the line number") {
  TempDir dir("badjsonl");
  write_text_file(dir.path / "train.jsonl",
                  R"({"image_id": "a", "mask_path": "a.png", "responses": [1]})"
                  "\n{oops\n");
  const RunResult r = run_cli(
      dir, "fit --train " + (dir.path / "train.jsonl").string());
  CHECK(r.exit_code == 1);
  CHECK(r.err.find(":2:") != std::string::npos);
}

TEST_CASE("noiseless chain evaluates perfectly") {
  TempDir dir("evalchain");
  const std::string manifest =
      make_dataset(dir.path / "data", 16, 30, 0.0, 0.0);

  // count-threshold 0 makes w = 1 exactly when any watermark pixel
  // survives, which on noiseless data reproduces the truth outcome.
  const RunResult score = run_cli(
      dir, "score --manifest " + manifest +
               " --alpha 0.05 --count-threshold 0 --save-masks " +
               (dir.path / "pred").string() + " --output " +
               (dir.path / "scores.csv").string());
  REQUIRE(score.exit_code == 0);

  const RunResult eval = run_cli(
      dir, "eval --scores " + (dir.path / "scores.csv").string() +
               " --manifest " + manifest + " --pred-masks " +
               (dir.path / "pred").string() + " --output " +
               (dir.path / "metrics.json").string() + " --ranking " +
               (dir.path / "ranking.csv").string());
  REQUIRE(eval.exit_code == 0);

  const json metrics = json::parse(read_text_file(dir.path / "metrics.json"));
  CHECK(metrics.at("image").at("ifp") == 0);
  CHECK(metrics.at("image").at("ifn") == 0);
  CHECK(metrics.at("image").at("precision") == 1.0);
  CHECK(metrics.at("image").at("recall") == 1.0);
  CHECK(metrics.at("image").at("e_precision") == 1.0);
  CHECK(metrics.at("pixel").at("fp") == 0);
  CHECK(metrics.at("pixel").at("fn") == 0);
  CHECK(metrics.at("pixel").at("watermark").at("iou") == 1.0);
  CHECK(metrics.at("pixel").at("mean_iou") == 1.0);

  const std::string ranking = read_text_file(dir.path / "ranking.csv");
  CHECK(ranking.substr(0, 7) == ",3,2,1\n");
}

TEST_CASE("eval rejects a score CSV that does not match the manifest") {
  TempDir dir("evalmismatch");
  const std::string manifest =
      make_dataset(dir.path / "data", 17, 6, 0.0, 0.0);
  write_text_file(dir.path / "scores.csv",
                  "image_id,w,G,score\nimg_000000,1,0.5,0.5\n");
  const RunResult r = run_cli(
      dir, "eval --scores " + (dir.path / "scores.csv").string() +
               " --manifest " + manifest);
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("disagree") != std::string::npos);

  write_text_file(dir.path / "scores.csv", "id,w\nimg_000000,1\n");
  CHECK(run_cli(dir, "eval --scores " + (dir.path / "scores.csv").string() +
                         " --manifest " + manifest)
            .err.find("unexpected CSV header") != std::string::npos);
}

TEST_CASE("thread count does not change any output byte") {
  TempDir dir("threads");
  const std::string manifest =
      make_dataset(dir.path / "data", 18, 12, 0.25, 0.3);
  const RunResult one = run_cli(
      dir, "--threads 1 score --manifest " + manifest +
               " --alpha 0.05 --output " + (dir.path / "one.csv").string());
  const RunResult four = run_cli(
      dir, "--threads 4 score --manifest " + manifest +
               " --alpha 0.05 --output " + (dir.path / "four.csv").string());
  REQUIRE(one.exit_code == 0);
  REQUIRE(four.exit_code == 0);
  CHECK(read_text_file(dir.path / "one.csv") ==
        read_text_file(dir.path / "four.csv"));

  const RunResult synth_one = run_cli(
      dir, "--threads 1 synth --out " + (dir.path / "s1").string() +
               " --seed 4 --count 6 --width 40 --height 40 --alpha 0.05");
  const RunResult synth_four = run_cli(
      dir, "--threads 4 synth --out " + (dir.path / "s4").string() +
               " --seed 4 --count 6 --width 40 --height 40 --alpha 0.05");
  REQUIRE(synth_one.exit_code == 0);
  REQUIRE(synth_four.exit_code == 0);
  const auto c1 = dir_contents(dir.path / "s1");
  const auto c4 = dir_contents(dir.path / "s4");
  REQUIRE(c1.size() == c4.size());
  for (const auto& [rel, bytes] : c1) CHECK(c4.at(rel) == bytes);
}

TEST_CASE("config file supplies defaults, flags override") {
  TempDir dir("config");
  const std::string manifest =
      make_dataset(dir.path / "data", 19, 8, 0.2, 0.0);
  write_text_file(dir.path / "wds.ini",
                  "[score]\nalpha=0.05\ncount-threshold=0\n");

  // Config alone satisfies the alpha requirement.
  const RunResult from_config = run_cli(
      dir, "--config " + (dir.path / "wds.ini").string() + " score --manifest " +
               manifest + " --output " + (dir.path / "cfg.csv").string());
  REQUIRE(from_config.exit_code == 0);

  // An explicit flag beats the config value: with config + flag the output
  // equals the flag-only run, not the config-only run.
  const RunResult flag_only = run_cli(
      dir, "score --manifest " + manifest +
               " --alpha 0.4 --count-threshold 0 --output " +
               (dir.path / "flag.csv").string());
  const RunResult both = run_cli(
      dir, "--config " + (dir.path / "wds.ini").string() + " score --manifest " +
               manifest + " --alpha 0.4 --output " +
               (dir.path / "both.csv").string());
  REQUIRE(flag_only.exit_code == 0);
  REQUIRE(both.exit_code == 0);
  CHECK(read_text_file(dir.path / "both.csv") ==
        read_text_file(dir.path / "flag.csv"));
  CHECK(read_text_file(dir.path / "both.csv") !=
        read_text_file(dir.path / "cfg.csv"));
}

TEST_CASE("synth validates its spec through exit code 2") {
  TempDir dir("synthbad");
  const RunResult r = run_cli(
      dir, "synth --out " + (dir.path / "d").string() +
               " --seed 1 --count 2 --width 8 --height 8"
               " --area-range 0.001 0.001 --alpha 0.05");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("config error") != std::string::npos);
  CHECK(r.err.find("infeasible") != std::string::npos);
}

TEST_CASE("score accepts exactly one input source") {
  TempDir dir("bothinputs");
  const std::string manifest =
      make_dataset(dir.path / "data", 20, 2, 0.0, 0.0);
  fs::create_directories(dir.path / "in");
  const RunResult r = run_cli(
      dir, "score --manifest " + manifest + " --input " +
               (dir.path / "in").string() + " --alpha 0.05");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("exactly one of") != std::string::npos);
}
