#pragma once

#include <stdexcept>
#include <string>

#include "wds/mask.hpp"
#include "wds/scoring.hpp"

namespace wds {

/// Invalid configuration (as opposed to unreadable or malformed input);
/// the CLI maps this to its own exit code.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// End-to-end scoring configuration. likelihood_threshold and
/// count_threshold default to the published operating point; the scoring
/// params default to the published sigma and lambda with a placeholder bias,
/// which the CLI refuses to use unless set explicitly or loaded from a fit.
struct PipelineConfig {
  double likelihood_threshold = 0.75;
  double count_threshold = 0.001;  // fraction of image pixels
  ScoringParams params{0.44, 78.0, 0.05};

  void validate() const;
};

struct ImageScoreRow {
  std::string image_id;
  int w = 0;
  double g = 0.0;
  double score = 0.0;
};

/// threshold -> classify -> hybrid combine -> score, plus the final label
/// map for downstream pixel metrics.
struct PipelineResult {
  ImageScoreRow row;
  BinaryMask label;  // L = w * S
};

PipelineResult score_likelihood(const std::string& image_id,
                                const LikelihoodMap& map,
                                const WeightMap& weights,
                                const PipelineConfig& config);

/// Same pipeline with the segmentation mask S supplied directly instead of
/// being thresholded from a likelihood map.
PipelineResult score_segmentation(const std::string& image_id,
                                  const BinaryMask& s,
                                  const WeightMap& weights,
                                  const PipelineConfig& config);

}  // namespace wds
