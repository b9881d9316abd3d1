#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "wds/mask.hpp"
#include "wds/metrics.hpp"
#include "wds/scoring.hpp"

namespace wds {

enum class Placement {
  kUniform,       // shape centers uniform over the image
  kCenterBiased,  // triangular density peaked at the image center
};

/// Recipe for a deterministic synthetic dataset. Everything downstream of
/// the seed is reproducible bit-for-bit; see rng.hpp for the generator.
struct SynthSpec {
  std::uint64_t seed = 0;
  int image_count = 0;
  int width = 0;
  int height = 0;
  double positive_fraction = 0.5;
  double area_lo = 0.01;  // nominal per-shape area as fraction of the image
  double area_hi = 0.2;
  Placement placement = Placement::kUniform;
  double likelihood_noise = 0.0;  // stddev of per-pixel noise on likelihoods
  double rater_noise = 0.0;       // stddev of noise on simulated responses

  void validate() const;
};

/// One generated image: annotation polygons, the likelihood map a model
/// would have produced, the exact truth mask, and three simulated rater
/// responses. The truth mask is the rasterization of the annotation, so the
/// two round-trip exactly. level is the rounded mean response, used as the
/// ground-truth bucket for ranking evaluation.
struct SynthImage {
  AnnotationSet annotation;
  LikelihoodMap likelihood;
  BinaryMask truth;
  std::array<int, 3> responses{};
  double oracle_score = 0.0;  // noiseless model score of the truth mask
  int level = 0;
};

/// Deterministic given spec.seed. Positive images receive 1-3 rectangular or
/// elliptical shapes with nominal areas drawn from the configured range;
/// shapes may overhang the image edge and are clipped by rasterization.
/// Responses simulate three raters: round(3 * score + noise) clamped to
/// [0, 3].
std::vector<SynthImage> generate_dataset(const SynthSpec& spec,
                                         const ScoringParams& params);

/// Monte-Carlo check of the e_precision closed form: samples `population`
/// images with positive fraction beta, applies the balanced-set recall and
/// false-positive rates as Bernoulli outcomes, and returns the empirical
/// precision among predicted positives. Deterministic per seed and
/// independent of thread count.
double sparse_eval_simulation(const ImageConfusion& confusion, double beta,
                              std::int64_t population, std::uint64_t seed);

}  // namespace wds
