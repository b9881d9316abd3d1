#include "wds/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wds/numeric.hpp"

namespace wds {

void ScoringParams::validate() const {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must be in [0, 1]");
  }
}

double gaussian_at(double x, double y, double sigma) {
  return std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
}

WeightMap gaussian_weights(int width, int height, double sigma) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("invalid dimensions for weight map");
  }
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");

  WeightMap map;
  map.width = width;
  map.height = height;
  map.weights.resize(static_cast<std::size_t>(width) * height);

  // Fill the top-left quadrant from the kernel formula and mirror the rest,
  // so the 4-fold symmetry is exact rather than within rounding.
  const int half_w = (width + 1) / 2;
  const int half_h = (height + 1) / 2;
#pragma omp parallel for schedule(static) if (half_h > 64)
  for (int j = 0; j < half_h; ++j) {
    const double y = (j + 0.5) / height - 0.5;
    double* row = map.weights.data() + static_cast<std::size_t>(j) * width;
    for (int i = 0; i < half_w; ++i) {
      const double x = (i + 0.5) / width - 0.5;
      row[i] = gaussian_at(x, y, sigma);
    }
    for (int i = half_w; i < width; ++i) row[i] = row[width - 1 - i];
  }
#pragma omp parallel for schedule(static) if (height - half_h > 64)
  for (int j = half_h; j < height; ++j) {
    const double* src =
        map.weights.data() + static_cast<std::size_t>(height - 1 - j) * width;
    double* dst = map.weights.data() + static_cast<std::size_t>(j) * width;
    std::copy(src, src + width, dst);
  }

  const double total = blocked_sum(map.weights);
  const double inv_total = 1.0 / total;
  const std::size_t n = map.weights.size();
#pragma omp parallel for schedule(static) if (n > 65536)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    map.weights[i] *= inv_total;
  }
  return map;
}

double weighted_area(const BinaryMask& label, const WeightMap& weights) {
  if (label.width() != weights.width || label.height() != weights.height) {
    throw std::invalid_argument("label and weight map dimensions differ");
  }
  return blocked_masked_sum(weights.weights, label.values());
}

double score_from_area(double g, const ScoringParams& params) {
  const double z = params.lambda * (g - params.alpha);
  // exp is only ever taken of a non-positive argument.
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double distraction_score(const BinaryMask& label, const WeightMap& weights,
                         const ScoringParams& params) {
  params.validate();
  if (label.is_empty()) return 0.0;
  return score_from_area(weighted_area(label, weights), params);
}

double distraction_score(const BinaryMask& label, const ScoringParams& params) {
  params.validate();
  if (label.is_empty()) return 0.0;
  const WeightMap weights =
      gaussian_weights(label.width(), label.height(), params.sigma);
  return score_from_area(weighted_area(label, weights), params);
}

}  // namespace wds
