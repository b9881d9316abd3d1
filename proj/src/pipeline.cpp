#include "wds/pipeline.hpp"

namespace wds {

void PipelineConfig::validate() const {
  if (!(likelihood_threshold >= 0.0 && likelihood_threshold <= 1.0)) {
    throw ConfigError("likelihood threshold outside [0, 1]");
  }
  if (!(count_threshold >= 0.0 && count_threshold < 1.0)) {
    throw ConfigError("count threshold outside [0, 1)");
  }
  try {
    params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

PipelineResult score_likelihood(const std::string& image_id,
                                const LikelihoodMap& map,
                                const WeightMap& weights,
                                const PipelineConfig& config) {
  return score_segmentation(
      image_id, threshold_likelihood(map, config.likelihood_threshold), weights,
      config);
}

PipelineResult score_segmentation(const std::string& image_id,
                                  const BinaryMask& s, const WeightMap& weights,
                                  const PipelineConfig& config) {
  config.validate();
  const ImageDecision decision = classify_image(s, config.count_threshold);
  PipelineResult result;
  result.label = hybrid_combine(decision, s);
  result.row.image_id = image_id;
  result.row.w = decision.w;
  result.row.g = weighted_area(result.label, weights);
  result.row.score = result.label.is_empty()
                         ? 0.0
                         : score_from_area(result.row.g, config.params);
  return result;
}

}  // namespace wds
