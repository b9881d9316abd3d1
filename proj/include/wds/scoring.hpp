#pragma once

#include <vector>

#include "wds/mask.hpp"

namespace wds {

/// Fitted scoring constants. sigma is in normalized image units (each axis
/// mapped to [-0.5, 0.5]), lambda is the sigmoid steepness and alpha the
/// sigmoid bias in weighted-area units.
struct ScoringParams {
  double sigma = 0.0;
  double lambda = 0.0;
  double alpha = 0.0;

  /// Throws std::invalid_argument unless sigma > 0, lambda > 0 and
  /// 0 <= alpha <= 1.
  void validate() const;
};

/// Normalized Gaussian location weights for one image size; weights sum to 1
/// so the weighted area of any mask lands in [0, 1].
struct WeightMap {
  int width = 0;
  int height = 0;
  std::vector<double> weights;

  double at(int x, int y) const {
    return weights[static_cast<std::size_t>(y) * width + x];
  }
};

/// Unnormalized isotropic Gaussian kernel exp(-(x^2 + y^2) / (2 sigma^2)) in
/// normalized image coordinates.
double gaussian_at(double x, double y, double sigma);

/// Weight map for a width x height image: pixel (i, j) gets the kernel value
/// at x = (i + 0.5)/width - 0.5, y = (j + 0.5)/height - 0.5, then the map is
/// normalized to sum to 1. Built by mirroring the top-left quadrant, so the
/// 4-fold symmetry holds exactly, not merely within rounding.
WeightMap gaussian_weights(int width, int height, double sigma);

/// G = sum of weights over the mask's one-pixels; in [0, 1] by normalization.
double weighted_area(const BinaryMask& label, const WeightMap& weights);

/// Sigmoid response 1 / (1 + exp(-lambda (g - alpha))). Evaluated in the
/// overflow-free branch form, finite for any magnitude of lambda (g - alpha).
double score_from_area(double g, const ScoringParams& params);

/// Distraction score of a label map. An all-zero mask scores exactly 0; the
/// bare sigmoid cannot produce 0 and score 0 is reserved for images without
/// watermarks.
double distraction_score(const BinaryMask& label, const WeightMap& weights,
                         const ScoringParams& params);

/// Convenience overload computing the weight map for the label's dimensions.
double distraction_score(const BinaryMask& label, const ScoringParams& params);

}  // namespace wds
