#include "wds/formats.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <utility>

#include "wds/png_io.hpp"

namespace wds {

namespace {

using nlohmann::json;

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

json optional_number(const std::optional<double>& v) {
  if (v) return *v;
  return nullptr;
}

json ratio_or_null(std::int64_t num, std::int64_t den) {
  if (den <= 0) return nullptr;
  return static_cast<double>(num) / static_cast<double>(den);
}

json params_to_json(const ScoringParams& params) {
  return json{{"lambda", params.lambda},
              {"sigma", params.sigma},
              {"alpha", params.alpha}};
}

json pixel_block(const PixelConfusion& c) {
  const PixelConfusion bg = swap_classes(c);
  const PixelRatios fgr = pixel_metrics(c);
  const PixelRatios bgr = pixel_metrics(bg);
  json block{{"tp", c.tp},
             {"fp", c.fp},
             {"fn", c.fn},
             {"tn", c.tn},
             {"watermark",
              {{"precision", optional_number(fgr.precision)},
               {"recall", optional_number(fgr.recall)},
               {"iou", optional_number(fgr.iou)}}},
             {"background",
              {{"precision", optional_number(bgr.precision)},
               {"recall", optional_number(bgr.recall)},
               {"iou", optional_number(bgr.iou)}}}};
  if (fgr.iou && bgr.iou && c.total() > 0) {
    const double wm_freq =
        static_cast<double>(c.tp + c.fn) / static_cast<double>(c.total());
    block["mean_iou"] = mean_iou(*fgr.iou, *bgr.iou);
    block["weighted_mean_iou"] =
        mean_iou(*fgr.iou, *bgr.iou, wm_freq, 1.0 - wm_freq);
  } else {
    block["mean_iou"] = nullptr;
    block["weighted_mean_iou"] = nullptr;
  }
  return block;
}

json image_block(const ImageConfusion& c, double beta) {
  return json{{"itp", c.itp},
              {"ifp", c.ifp},
              {"ifn", c.ifn},
              {"itn", c.itn},
              {"precision", ratio_or_null(c.itp, c.itp + c.ifp)},
              {"recall", ratio_or_null(c.itp, c.itp + c.ifn)},
              {"beta", beta},
              {"e_precision", optional_number(e_precision(c.itp, c.ifp, beta))}};
}

}  // namespace

// ----------------------------------------------------------------------------
// Annotations
// ----------------------------------------------------------------------------

AnnotationSet annotation_from_json(const json& j) {
  AnnotationSet ann;
  try {
    ann.image_id = j.at("image_id").get<std::string>();
    ann.width = j.at("width").get<int>();
    ann.height = j.at("height").get<int>();
    for (const auto& jpoly : j.at("polygons")) {
      Polygon poly;
      for (const auto& jv : jpoly) {
        if (!jv.is_array() || jv.size() != 2) {
          throw std::invalid_argument(
              "invalid annotation: vertex must be a [x, y] pair");
        }
        poly.push_back(Vertex{jv[0].get<double>(), jv[1].get<double>()});
      }
      ann.polygons.push_back(std::move(poly));
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("invalid annotation: ") + e.what());
  }
  ann.validate();
  return ann;
}

json annotation_to_json(const AnnotationSet& ann) {
  json jpolys = json::array();
  for (const Polygon& poly : ann.polygons) {
    json jpoly = json::array();
    for (const Vertex& v : poly) jpoly.push_back(json::array({v.x, v.y}));
    jpolys.push_back(std::move(jpoly));
  }
  return json{{"image_id", ann.image_id},
              {"width", ann.width},
              {"height", ann.height},
              {"polygons", std::move(jpolys)}};
}

AnnotationSet read_annotation_file(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw std::runtime_error("failed to parse " + path.string() + ": " +
                             e.what());
  }
  return annotation_from_json(j);
}

void write_annotation_file(const std::filesystem::path& path,
                           const AnnotationSet& ann) {
  write_text_file(path, annotation_to_json(ann).dump(2) + "\n");
}

// ----------------------------------------------------------------------------
// Training data
// ----------------------------------------------------------------------------

std::vector<TrainingRecord> read_training_jsonl(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<TrainingRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error(where + ": " + e.what());
    }
    try {
      TrainingRecord rec;
      rec.image_id = j.at("image_id").get<std::string>();
      rec.mask_path = j.at("mask_path").get<std::string>();
      if (j.contains("responses")) {
        rec.responses = j.at("responses").get<std::vector<int>>();
      }
      if (j.contains("human_score")) {
        rec.human_score = j.at("human_score").get<double>();
      }
      if (rec.responses.empty() && !rec.human_score) {
        throw std::invalid_argument(
            "record needs either responses or human_score");
      }
      records.push_back(std::move(rec));
    } catch (const json::exception& e) {
      throw std::runtime_error(where + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(where + ": " + e.what());
    }
  }
  return records;
}

std::vector<ScoredExample> load_training_data(
    const std::filesystem::path& jsonl_path) {
  const std::vector<TrainingRecord> records = read_training_jsonl(jsonl_path);
  const std::filesystem::path base = jsonl_path.parent_path();
  std::vector<ScoredExample> data;
  data.reserve(records.size());
  for (const TrainingRecord& rec : records) {
    std::filesystem::path mask_path(rec.mask_path);
    if (mask_path.is_relative()) mask_path = base / mask_path;
    ScoredExample ex;
    ex.label = read_mask_png(mask_path);
    if (rec.human_score) {
      if (!(*rec.human_score >= 0.0 && *rec.human_score <= 1.0)) {
        throw std::invalid_argument("human_score outside [0, 1] for image " +
                                    rec.image_id);
      }
      ex.human_score = *rec.human_score;
    } else {
      ex.human_score = normalize_rater_scores(rec.responses);
    }
    data.push_back(std::move(ex));
  }
  return data;
}

// ----------------------------------------------------------------------------
// Fit output
// ----------------------------------------------------------------------------

json fit_result_to_json(const FitResult& result) {
  json j = params_to_json(result.params);
  j["mse"] = result.mse;
  j["converged"] = result.converged;
  return j;
}

ScoringParams scoring_params_from_json(const json& j) {
  ScoringParams params;
  try {
    params.lambda = j.at("lambda").get<double>();
    params.sigma = j.at("sigma").get<double>();
    params.alpha = j.at("alpha").get<double>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("invalid params: ") + e.what());
  }
  params.validate();
  return params;
}

ScoringParams read_params_file(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw std::runtime_error("failed to parse " + path.string() + ": " +
                             e.what());
  }
  return scoring_params_from_json(j);
}

// ----------------------------------------------------------------------------
// Report rendering
// ----------------------------------------------------------------------------

std::string score_csv(std::span<const ImageScoreRow> rows) {
  std::string out = "image_id,w,G,score\n";
  for (const ImageScoreRow& r : rows) {
    out += r.image_id;
    out += ',';
    out += std::to_string(r.w);
    out += ',';
    out += format_fixed(r.g, 6);
    out += ',';
    out += format_fixed(r.score, 6);
    out += '\n';
  }
  return out;
}

std::string ranking_csv(const RankingTable& table) {
  std::string out = ",3,2,1\n";
  for (int lower = 0; lower <= 2; ++lower) {
    out += std::to_string(lower);
    for (int higher = 3; higher >= 1; --higher) {
      out += ',';
      const auto it = table.cells.find({higher, lower});
      if (higher > lower && it != table.cells.end()) {
        out += format_fixed(it->second.percentage, 2);
      } else {
        out += "N/A";
      }
    }
    out += '\n';
  }
  return out;
}

json metrics_report(const PixelConfusion& pixel, const ImageConfusion& image,
                    double beta) {
  return json{{"pixel", pixel_block(pixel)}, {"image", image_block(image, beta)}};
}

// ----------------------------------------------------------------------------
// Synthetic datasets on disk
// ----------------------------------------------------------------------------

json synth_spec_to_json(const SynthSpec& spec) {
  return json{{"seed", spec.seed},
              {"image_count", spec.image_count},
              {"width", spec.width},
              {"height", spec.height},
              {"positive_fraction", spec.positive_fraction},
              {"area_range", json::array({spec.area_lo, spec.area_hi})},
              {"placement", spec.placement == Placement::kCenterBiased
                                ? "center-biased"
                                : "uniform"},
              {"likelihood_noise", spec.likelihood_noise},
              {"rater_noise", spec.rater_noise}};
}

SynthSpec synth_spec_from_json(const json& j) {
  SynthSpec spec;
  try {
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.image_count = j.at("image_count").get<int>();
    spec.width = j.at("width").get<int>();
    spec.height = j.at("height").get<int>();
    if (j.contains("positive_fraction")) {
      spec.positive_fraction = j.at("positive_fraction").get<double>();
    }
    if (j.contains("area_range")) {
      const auto& range = j.at("area_range");
      if (!range.is_array() || range.size() != 2) {
        throw std::invalid_argument("area_range must be [lo, hi]");
      }
      spec.area_lo = range[0].get<double>();
      spec.area_hi = range[1].get<double>();
    }
    if (j.contains("placement")) {
      const std::string p = j.at("placement").get<std::string>();
      if (p == "uniform") {
        spec.placement = Placement::kUniform;
      } else if (p == "center-biased") {
        spec.placement = Placement::kCenterBiased;
      } else {
        throw std::invalid_argument("unknown placement: " + p);
      }
    }
    if (j.contains("likelihood_noise")) {
      spec.likelihood_noise = j.at("likelihood_noise").get<double>();
    }
    if (j.contains("rater_noise")) {
      spec.rater_noise = j.at("rater_noise").get<double>();
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("invalid synth spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

SynthSpec read_synth_spec_file(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw std::runtime_error("failed to parse " + path.string() + ": " +
                             e.what());
  }
  return synth_spec_from_json(j);
}

json write_dataset(const std::filesystem::path& dir, const SynthSpec& spec,
                   const ScoringParams& params,
                   std::span<const SynthImage> images) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "annotations");
  fs::create_directories(dir / "likelihood");
  fs::create_directories(dir / "truth");

  json jimages = json::array();
  for (const SynthImage& img : images) {
    const std::string& id = img.annotation.image_id;
    const std::string ann_rel = "annotations/" + id + ".json";
    const std::string lik_rel = "likelihood/" + id + ".png";
    const std::string truth_rel = "truth/" + id + ".png";
    write_annotation_file(dir / ann_rel, img.annotation);
    write_likelihood_png(dir / lik_rel, img.likelihood);
    write_mask_png(dir / truth_rel, img.truth);
    jimages.push_back(json{{"image_id", id},
                           {"annotation", ann_rel},
                           {"likelihood", lik_rel},
                           {"truth", truth_rel},
                           {"responses", img.responses},
                           {"oracle_score", img.oracle_score},
                           {"level", img.level}});
  }
  json manifest{{"spec", synth_spec_to_json(spec)},
                {"params", params_to_json(params)},
                {"images", std::move(jimages)}};
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

// ----------------------------------------------------------------------------
// File helpers
// ----------------------------------------------------------------------------

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  return content;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("failed to write " + path.string());
}

}  // namespace wds
