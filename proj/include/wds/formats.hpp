#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "wds/fitting.hpp"
#include "wds/mask.hpp"
#include "wds/metrics.hpp"
#include "wds/pipeline.hpp"
#include "wds/synth.hpp"

namespace wds {

// ----------------------------------------------------------------------------
// Annotations: one JSON object per image,
// {"image_id": str, "width": int, "height": int,
//  "polygons": [[[x, y], ...], ...]}; an empty polygon list marks a
// negative image.
// ----------------------------------------------------------------------------

AnnotationSet annotation_from_json(const nlohmann::json& j);
nlohmann::json annotation_to_json(const AnnotationSet& ann);

AnnotationSet read_annotation_file(const std::filesystem::path& path);
void write_annotation_file(const std::filesystem::path& path,
                           const AnnotationSet& ann);

// ----------------------------------------------------------------------------
// Training data: JSON lines, each
// {"image_id": str, "mask_path": str, "responses": [int, int, int]}
// or {"image_id": str, "mask_path": str, "human_score": real}.
// ----------------------------------------------------------------------------

struct TrainingRecord {
  std::string image_id;
  std::string mask_path;
  std::vector<int> responses;        // empty when human_score given directly
  std::optional<double> human_score;
};

/// Parse errors carry the 1-based line number.
std::vector<TrainingRecord> read_training_jsonl(
    const std::filesystem::path& path);

/// Reads the records' mask PNGs (paths resolved against the JSONL file's
/// directory) and collapses rater responses to a normalized score.
std::vector<ScoredExample> load_training_data(
    const std::filesystem::path& jsonl_path);

// ----------------------------------------------------------------------------
// Fit output: {"lambda": .., "sigma": .., "alpha": .., "mse": ..,
//              "converged": ..}
// ----------------------------------------------------------------------------

nlohmann::json fit_result_to_json(const FitResult& result);
ScoringParams scoring_params_from_json(const nlohmann::json& j);
ScoringParams read_params_file(const std::filesystem::path& path);

// ----------------------------------------------------------------------------
// Report rendering
// ----------------------------------------------------------------------------

/// "image_id,w,G,score" header; G and score with 6 decimals, '.' decimal
/// point regardless of locale. Rows are rendered in the given order.
std::string score_csv(std::span<const ImageScoreRow> rows);

/// Ranking table in the layout of the published tables: columns are the
/// higher levels 3,2,1, rows the lower levels 0,1,2, empty cells "N/A".
std::string ranking_csv(const RankingTable& table);

/// Full metric report: pixel counts and ratios for both classes, mean IOUs
/// (unweighted and frequency-weighted by truth pixel prevalence), image
/// counts and ratios, and e_precision at the given beta. Undefined ratios
/// serialize as null.
nlohmann::json metrics_report(const PixelConfusion& pixel,
                              const ImageConfusion& image, double beta);

// ----------------------------------------------------------------------------
// Synthetic datasets on disk
// ----------------------------------------------------------------------------

nlohmann::json synth_spec_to_json(const SynthSpec& spec);
SynthSpec synth_spec_from_json(const nlohmann::json& j);
SynthSpec read_synth_spec_file(const std::filesystem::path& path);

/// Writes annotations/, likelihood/, truth/ and manifest.json under dir.
/// The manifest lists relative paths, rater responses, oracle scores and
/// levels for every image, plus the generating spec and params. Returns the
/// manifest.
nlohmann::json write_dataset(const std::filesystem::path& dir,
                             const SynthSpec& spec,
                             const ScoringParams& params,
                             std::span<const SynthImage> images);

// Small file helpers shared by the CLI and tests.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

}  // namespace wds
