// wdscore: score watermark masks, fit scoring parameters, evaluate
// predictions, and generate synthetic datasets. One subcommand per pipeline
// stage; all interfaces are files, so every run is reproducible.

#include <omp.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wds/fitting.hpp"
#include "wds/formats.hpp"
#include "wds/mask.hpp"
#include "wds/metrics.hpp"
#include "wds/pipeline.hpp"
#include "wds/png_io.hpp"
#include "wds/scoring.hpp"
#include "wds/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Shared option plumbing
// ---------------------------------------------------------------------------

// Scoring parameters come from a fit JSON and/or explicit flags; flags win.
// lambda and sigma have quotable defaults, alpha does not, so alpha must be
// given explicitly one way or the other.
struct ParamFlags {
  std::string params_file;
  double lambda = 78.0;
  double sigma = 0.44;
  double alpha = 0.0;
  CLI::Option* lambda_opt = nullptr;
  CLI::Option* sigma_opt = nullptr;
  CLI::Option* alpha_opt = nullptr;
};

void add_param_flags(CLI::App* cmd, ParamFlags* pf) {
  cmd->add_option("--params", pf->params_file,
                  "JSON file with lambda/sigma/alpha (e.g. fit output)");
  pf->lambda_opt = cmd->add_option("--lambda", pf->lambda, "Sigmoid steepness")
                       ->capture_default_str();
  pf->sigma_opt =
      cmd->add_option("--sigma", pf->sigma,
                      "Gaussian sigma, normalized image units")
          ->capture_default_str();
  pf->alpha_opt = cmd->add_option(
      "--alpha", pf->alpha,
      "Sigmoid bias; required unless --params supplies it");
}

wds::ScoringParams resolve_params(const ParamFlags& pf) {
  wds::ScoringParams p{pf.sigma, pf.lambda, 0.0};
  bool have_alpha = false;
  if (!pf.params_file.empty()) {
    try {
      p = wds::read_params_file(pf.params_file);
    } catch (const std::exception& e) {
      throw wds::ConfigError(e.what());
    }
    have_alpha = true;
  }
  if (pf.lambda_opt->count() > 0) p.lambda = pf.lambda;
  if (pf.sigma_opt->count() > 0) p.sigma = pf.sigma;
  if (pf.alpha_opt->count() > 0) {
    p.alpha = pf.alpha;
    have_alpha = true;
  }
  if (!have_alpha) {
    throw wds::ConfigError(
        "alpha has no published default; pass --alpha or a --params file");
  }
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw wds::ConfigError(e.what());
  }
  return p;
}

void emit(const std::string& content, const std::string& path) {
  if (path.empty()) {
    std::cout << content;
  } else {
    wds::write_text_file(path, content);
  }
}

// ---------------------------------------------------------------------------
// Manifest + score CSV parsing (CLI-side consumers of the emitted formats)
// ---------------------------------------------------------------------------

struct ManifestImage {
  std::string id;
  fs::path likelihood;
  fs::path truth;
  int level = 0;
  double oracle_score = 0.0;
};

std::vector<ManifestImage> read_manifest(const fs::path& path) {
  json j;
  try {
    j = json::parse(wds::read_text_file(path));
    const fs::path base = path.parent_path();
    std::vector<ManifestImage> images;
    for (const auto& ji : j.at("images")) {
      ManifestImage m;
      m.id = ji.at("image_id").get<std::string>();
      m.likelihood = base / ji.at("likelihood").get<std::string>();
      m.truth = base / ji.at("truth").get<std::string>();
      m.level = ji.at("level").get<int>();
      m.oracle_score = ji.at("oracle_score").get<double>();
      images.push_back(std::move(m));
    }
    std::sort(images.begin(), images.end(),
              [](const ManifestImage& a, const ManifestImage& b) {
                return a.id < b.id;
              });
    return images;
  } catch (const json::exception& e) {
    throw std::runtime_error("failed to parse manifest " + path.string() +
                             ": " + e.what());
  }
}

struct ScoreRowLite {
  int w = 0;
  double g = 0.0;
  double score = 0.0;
};

std::map<std::string, ScoreRowLite> parse_score_csv(const std::string& text,
                                                    const std::string& name) {
  std::istringstream in(text);
  std::string line;
  auto strip_cr = [](std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  };
  if (!std::getline(in, line)) {
    throw std::runtime_error(name + ": empty score CSV");
  }
  strip_cr(line);
  if (line != "image_id,w,G,score") {
    throw std::runtime_error(name + ": unexpected CSV header: " + line);
  }
  std::map<std::string, ScoreRowLite> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const std::string where = name + ":" + std::to_string(line_no);
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 4) {
      throw std::runtime_error(where + ": expected 4 fields");
    }
    try {
      ScoreRowLite row{std::stoi(fields[1]), std::stod(fields[2]),
                       std::stod(fields[3])};
      if (!rows.emplace(fields[0], row).second) {
        throw std::runtime_error(where + ": duplicate image_id " + fields[0]);
      }
    } catch (const std::invalid_argument&) {
      throw std::runtime_error(where + ": malformed numeric field");
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

struct ScoreOptions {
  std::string input_dir;
  std::string manifest;
  bool masks = false;
  double threshold = 0.75;
  double count_threshold = 0.001;
  ParamFlags params;
  std::string output;
  std::string save_masks;
};

int run_score(const ScoreOptions& opt) {
  wds::PipelineConfig config;
  config.likelihood_threshold = opt.threshold;
  config.count_threshold = opt.count_threshold;
  config.params = resolve_params(opt.params);
  config.validate();
  if (opt.input_dir.empty() == opt.manifest.empty()) {
    throw wds::ConfigError("score needs exactly one of --input or --manifest");
  }

  std::vector<std::pair<std::string, fs::path>> inputs;
  if (!opt.manifest.empty()) {
    for (const ManifestImage& m : read_manifest(opt.manifest)) {
      inputs.emplace_back(m.id, opt.masks ? m.truth : m.likelihood);
    }
  } else {
    if (!fs::is_directory(opt.input_dir)) {
      throw std::runtime_error("not a directory: " + opt.input_dir);
    }
    for (const auto& entry : fs::directory_iterator(opt.input_dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".png") {
        inputs.emplace_back(entry.path().stem().string(), entry.path());
      }
    }
    std::sort(inputs.begin(), inputs.end());
  }

  if (!opt.save_masks.empty()) fs::create_directories(opt.save_masks);

  const int n = static_cast<int>(inputs.size());
  std::vector<wds::ImageScoreRow> rows(inputs.size());
  std::vector<std::string> errors(inputs.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      const auto& [id, path] = inputs[i];
      wds::PipelineResult result;
      if (opt.masks) {
        const wds::BinaryMask s = wds::read_mask_png(path);
        const wds::WeightMap weights =
            wds::gaussian_weights(s.width(), s.height(), config.params.sigma);
        result = wds::score_segmentation(id, s, weights, config);
      } else {
        const wds::LikelihoodMap map = wds::read_likelihood_png(path);
        const wds::WeightMap weights = wds::gaussian_weights(
            map.width(), map.height(), config.params.sigma);
        result = wds::score_likelihood(id, map, weights, config);
      }
      if (!opt.save_masks.empty()) {
        wds::write_mask_png(fs::path(opt.save_masks) / (id + ".png"),
                            result.label);
      }
      rows[i] = std::move(result.row);
    } catch (const std::exception& e) {
      errors[i] = inputs[i].second.string() + ": " + e.what();
    }
  }
  bool failed = false;
  for (const std::string& err : errors) {
    if (!err.empty()) {
      failed = true;
      std::cerr << "error: " << err << "\n";
    }
  }
  if (failed) return 1;
  emit(wds::score_csv(rows), opt.output);
  return 0;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct FitOptions {
  std::string train;
  std::vector<double> lambda_grid;
  std::vector<double> sigma_grid;
  std::vector<double> alpha_grid;
  int refine_sweeps = 2000;
  double tolerance = 1e-6;
  bool strict = false;
  std::string output;
};

void apply_axis(const std::vector<double>& values, wds::GridAxis* axis) {
  if (values.empty()) return;
  axis->lo = values[0];
  axis->hi = values[1];
  axis->steps = static_cast<int>(values[2]);
}

int run_fit(const FitOptions& opt) {
  wds::FitConfig fc;
  apply_axis(opt.lambda_grid, &fc.lambda);
  apply_axis(opt.sigma_grid, &fc.sigma);
  apply_axis(opt.alpha_grid, &fc.alpha);
  fc.refine_sweeps = opt.refine_sweeps;
  fc.tolerance = opt.tolerance;
  try {
    fc.validate();
  } catch (const std::invalid_argument& e) {
    throw wds::ConfigError(e.what());
  }

  const std::vector<wds::ScoredExample> data =
      wds::load_training_data(opt.train);
  const wds::FitResult result = wds::fit_params(data, fc);
  emit(wds::fit_result_to_json(result).dump(2) + "\n", opt.output);
  std::cerr << "fit: mse=" << result.mse << " lambda=" << result.params.lambda
            << " sigma=" << result.params.sigma
            << " alpha=" << result.params.alpha
            << " converged=" << (result.converged ? "yes" : "no") << "\n";
  if (opt.strict && !result.converged) return 3;
  return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalOptions {
  std::string scores;
  std::string manifest;
  std::string pred_masks;
  double beta = 0.1;
  std::string output;
  std::string ranking;
};

int run_eval(const EvalOptions& opt) {
  if (!(opt.beta > 0.0 && opt.beta < 1.0)) {
    throw wds::ConfigError("beta must be in (0, 1)");
  }
  const std::vector<ManifestImage> images = read_manifest(opt.manifest);
  const std::map<std::string, ScoreRowLite> rows =
      parse_score_csv(wds::read_text_file(opt.scores), opt.scores);
  if (rows.size() != images.size()) {
    throw std::runtime_error("score CSV and manifest disagree: " +
                             std::to_string(rows.size()) + " rows vs " +
                             std::to_string(images.size()) + " images");
  }
  for (const ManifestImage& m : images) {
    if (!rows.count(m.id)) {
      throw std::runtime_error("no score row for image " + m.id);
    }
  }

  const int n = static_cast<int>(images.size());
  std::vector<wds::ImageOutcome> outcomes(images.size());
  std::vector<wds::ScoredItem> items(images.size());
  std::vector<wds::PixelConfusion> partial(images.size());
  std::vector<std::string> errors(images.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      const ManifestImage& m = images[i];
      const ScoreRowLite& row = rows.at(m.id);
      const wds::BinaryMask truth = wds::read_mask_png(m.truth);
      outcomes[i] = {row.w == 1, !truth.is_empty()};
      items[i] = {row.score, m.level};
      if (!opt.pred_masks.empty()) {
        const wds::BinaryMask pred =
            wds::read_mask_png(fs::path(opt.pred_masks) / (m.id + ".png"));
        partial[i] = wds::pixel_confusion(pred, truth);
      }
    } catch (const std::exception& e) {
      errors[i] = images[i].id + ": " + e.what();
    }
  }
  bool failed = false;
  for (const std::string& err : errors) {
    if (!err.empty()) {
      failed = true;
      std::cerr << "error: " << err << "\n";
    }
  }
  if (failed) return 1;

  wds::PixelConfusion pixel;
  for (const wds::PixelConfusion& p : partial) pixel += p;
  const wds::ImageConfusion image = wds::image_confusion(outcomes);

  std::set<int> levels;
  for (const wds::ScoredItem& item : items) levels.insert(item.level);
  wds::RankingTable table;
  if (levels.size() >= 2) table = wds::pairwise_ranking_table(items);

  emit(wds::metrics_report(pixel, image, opt.beta).dump(2) + "\n", opt.output);
  emit(wds::ranking_csv(table), opt.ranking);
  return 0;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthOptions {
  std::string spec_file;
  std::string out_dir;
  ParamFlags params;
  std::uint64_t seed = 0;
  int count = 0;
  int width = 0;
  int height = 0;
  double positive_fraction = 0.5;
  std::vector<double> area_range;
  std::string placement = "uniform";
  double likelihood_noise = 0.0;
  double rater_noise = 0.0;
  CLI::App* cmd = nullptr;
};

int run_synth(const SynthOptions& opt) {
  wds::SynthSpec spec;
  if (!opt.spec_file.empty()) {
    try {
      spec = wds::read_synth_spec_file(opt.spec_file);
    } catch (const std::invalid_argument& e) {
      throw wds::ConfigError(e.what());
    }
  }
  const auto set = [&](const char* flag) {
    return opt.cmd->count(flag) > 0;
  };
  if (set("--seed")) spec.seed = opt.seed;
  if (set("--count")) spec.image_count = opt.count;
  if (set("--width")) spec.width = opt.width;
  if (set("--height")) spec.height = opt.height;
  if (set("--positive-fraction")) spec.positive_fraction = opt.positive_fraction;
  if (set("--area-range")) {
    spec.area_lo = opt.area_range[0];
    spec.area_hi = opt.area_range[1];
  }
  if (set("--placement")) {
    if (opt.placement == "uniform") {
      spec.placement = wds::Placement::kUniform;
    } else if (opt.placement == "center-biased") {
      spec.placement = wds::Placement::kCenterBiased;
    } else {
      throw wds::ConfigError("unknown placement: " + opt.placement);
    }
  }
  if (set("--likelihood-noise")) spec.likelihood_noise = opt.likelihood_noise;
  if (set("--rater-noise")) spec.rater_noise = opt.rater_noise;
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw wds::ConfigError(e.what());
  }
  const wds::ScoringParams params = resolve_params(opt.params);

  const std::vector<wds::SynthImage> images =
      wds::generate_dataset(spec, params);
  wds::write_dataset(opt.out_dir, spec, params, images);
  std::cerr << "synth: wrote " << images.size() << " images to " << opt.out_dir
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"watermark distraction scoring pipeline"};
  app.set_config("--config", "",
                 "Key-value config file (INI/TOML); flags take precedence");
  int threads = 0;
  app.add_option("--threads", threads,
                 "OpenMP worker count (default: runtime choice)");
  app.require_subcommand(1);

  ScoreOptions score_opt;
  CLI::App* score = app.add_subcommand(
      "score", "Score likelihood maps or masks to a CSV of (w, G, score)");
  score->add_option("--input", score_opt.input_dir,
                    "Directory of PNG inputs; image_id = file stem");
  score->add_option("--manifest", score_opt.manifest,
                    "Dataset manifest.json to score instead of a directory");
  score->add_flag("--masks", score_opt.masks,
                  "Inputs are binary masks, not likelihood maps");
  score->add_option("--threshold", score_opt.threshold,
                    "Likelihood threshold p")
      ->capture_default_str();
  score->add_option("--count-threshold", score_opt.count_threshold,
                    "Image-positive pixel fraction t")
      ->capture_default_str();
  add_param_flags(score, &score_opt.params);
  score->add_option("--output", score_opt.output,
                    "CSV path (default: stdout)");
  score->add_option("--save-masks", score_opt.save_masks,
                    "Directory for final label masks (for eval --pred-masks)");

  FitOptions fit_opt;
  CLI::App* fit = app.add_subcommand(
      "fit", "Fit lambda/sigma/alpha to human scores by grid + refinement");
  fit->add_option("--train", fit_opt.train,
                  "Training JSONL of mask paths and rater responses")
      ->required();
  fit->add_option("--lambda-grid", fit_opt.lambda_grid,
                  "Grid LO HI STEPS for lambda")
      ->expected(3);
  fit->add_option("--sigma-grid", fit_opt.sigma_grid,
                  "Grid LO HI STEPS for sigma")
      ->expected(3);
  fit->add_option("--alpha-grid", fit_opt.alpha_grid,
                  "Grid LO HI STEPS for alpha")
      ->expected(3);
  fit->add_option("--refine-sweeps", fit_opt.refine_sweeps,
                  "Coordinate-descent sweep budget")
      ->capture_default_str();
  fit->add_option("--tolerance", fit_opt.tolerance,
                  "Convergence tolerance on the objective")
      ->capture_default_str();
  fit->add_flag("--strict", fit_opt.strict,
                "Exit 3 if the fit did not converge");
  fit->add_option("--output", fit_opt.output, "JSON path (default: stdout)");

  EvalOptions eval_opt;
  CLI::App* eval = app.add_subcommand(
      "eval", "Evaluate a score CSV against a dataset manifest");
  eval->add_option("--scores", eval_opt.scores, "Score CSV from `score`")
      ->required();
  eval->add_option("--manifest", eval_opt.manifest, "Dataset manifest.json")
      ->required();
  eval->add_option("--pred-masks", eval_opt.pred_masks,
                   "Directory of predicted label masks for pixel metrics");
  eval->add_option("--beta", eval_opt.beta,
                   "True watermarked fraction for e_precision")
      ->capture_default_str();
  eval->add_option("--output", eval_opt.output,
                   "Metrics JSON path (default: stdout)");
  eval->add_option("--ranking", eval_opt.ranking,
                   "Ranking CSV path (default: stdout)");

  SynthOptions synth_opt;
  CLI::App* synth = app.add_subcommand(
      "synth", "Generate a deterministic synthetic dataset");
  synth_opt.cmd = synth;
  synth->add_option("--spec", synth_opt.spec_file, "Synth spec JSON");
  synth->add_option("--out", synth_opt.out_dir, "Output dataset directory")
      ->required();
  synth->add_option("--seed", synth_opt.seed, "RNG seed");
  synth->add_option("--count", synth_opt.count, "Number of images");
  synth->add_option("--width", synth_opt.width, "Image width");
  synth->add_option("--height", synth_opt.height, "Image height");
  synth->add_option("--positive-fraction", synth_opt.positive_fraction,
                    "Fraction of watermarked images");
  synth->add_option("--area-range", synth_opt.area_range,
                    "Per-shape area fraction LO HI")
      ->expected(2);
  synth->add_option("--placement", synth_opt.placement,
                    "Shape placement: uniform | center-biased");
  synth->add_option("--likelihood-noise", synth_opt.likelihood_noise,
                    "Stddev of per-pixel likelihood noise");
  synth->add_option("--rater-noise", synth_opt.rater_noise,
                    "Stddev of rater response noise");
  add_param_flags(synth, &synth_opt.params);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (score->parsed()) return run_score(score_opt);
    if (fit->parsed()) return run_fit(fit_opt);
    if (eval->parsed()) return run_eval(eval_opt);
    if (synth->parsed()) return run_synth(synth_opt);
  } catch (const wds::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
