#include "wds/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "wds/rng.hpp"

namespace wds {

void SynthSpec::validate() const {
  if (image_count < 0) throw std::invalid_argument("negative image count");
  if (width < 1 || height < 1) {
    throw std::invalid_argument("invalid dimensions: " + std::to_string(width) +
                                "x" + std::to_string(height));
  }
  if (!(positive_fraction >= 0.0 && positive_fraction <= 1.0)) {
    throw std::invalid_argument("positive fraction outside [0, 1]");
  }
  if (!(area_lo > 0.0 && area_lo <= area_hi && area_hi <= 1.0)) {
    throw std::invalid_argument("watermark area range must lie within (0, 1]");
  }
  if (area_lo * width * height < 1.0) {
    throw std::invalid_argument(
        "watermark area range infeasible for image size: smallest shape "
        "covers less than one pixel");
  }
  if (likelihood_noise < 0.0 || rater_noise < 0.0) {
    throw std::invalid_argument("negative noise level");
  }
}

namespace {

// Unit 24-gon used for elliptical shapes. A literal table instead of
// cos/sin calls keeps generated vertices bit-identical across libm
// implementations.
constexpr int kEllipseVertices = 24;
constexpr double kEllipseUnit[kEllipseVertices][2] = {
    {1.0, 0.0},
    {0.9659258262890683, 0.25881904510252074},
    {0.8660254037844387, 0.49999999999999994},
    {0.7071067811865476, 0.7071067811865476},
    {0.5000000000000001, 0.8660254037844386},
    {0.25881904510252074, 0.9659258262890683},
    {0.0, 1.0},
    {-0.25881904510252074, 0.9659258262890683},
    {-0.4999999999999998, 0.8660254037844387},
    {-0.7071067811865476, 0.7071067811865476},
    {-0.8660254037844387, 0.49999999999999994},
    {-0.9659258262890683, 0.25881904510252074},
    {-1.0, 0.0},
    {-0.9659258262890683, -0.25881904510252074},
    {-0.8660254037844387, -0.49999999999999994},
    {-0.7071067811865476, -0.7071067811865476},
    {-0.5000000000000001, -0.8660254037844386},
    {-0.25881904510252074, -0.9659258262890683},
    {0.0, -1.0},
    {0.25881904510252074, -0.9659258262890683},
    {0.4999999999999998, -0.8660254037844387},
    {0.7071067811865476, -0.7071067811865476},
    {0.8660254037844387, -0.49999999999999994},
    {0.9659258262890683, -0.25881904510252074},
};

constexpr double kPi = 3.14159265358979323846;

std::string image_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "img_%06d", index);
  return buf;
}

double sample_center(SplitMix64& rng, Placement placement) {
  if (placement == Placement::kCenterBiased) {
    return 0.5 * (rng.next_unit() + rng.next_unit());
  }
  return rng.next_unit();
}

// Shapes are centered anywhere in the image and may overhang its edges;
// rasterization clips them. A larger area draw with the same stream state
// scales the shape about the same center, so truth masks grow monotonically
// with area.
Polygon sample_shape(SplitMix64& rng, const SynthSpec& spec) {
  const bool ellipse = rng.next_bool();
  const double area = rng.next_range(spec.area_lo, spec.area_hi);
  const double aspect = rng.next_range(0.5, 2.0);
  const double cx = sample_center(rng, spec.placement) * spec.width;
  const double cy = sample_center(rng, spec.placement) * spec.height;

  Polygon poly;
  if (ellipse) {
    const double rx = std::sqrt(area * aspect / kPi) * spec.width;
    const double ry = std::sqrt(area / (aspect * kPi)) * spec.height;
    poly.reserve(kEllipseVertices);
    for (const auto& unit : kEllipseUnit) {
      poly.push_back(Vertex{cx + rx * unit[0], cy + ry * unit[1]});
    }
  } else {
    const double hw = 0.5 * std::sqrt(area * aspect) * spec.width;
    const double hh = 0.5 * std::sqrt(area / aspect) * spec.height;
    poly = {Vertex{cx - hw, cy - hh}, Vertex{cx + hw, cy - hh},
            Vertex{cx + hw, cy + hh}, Vertex{cx - hw, cy + hh}};
  }
  return poly;
}

SynthImage generate_image(const SynthSpec& spec, const ScoringParams& params,
                          const WeightMap& weights, int index) {
  SplitMix64 rng(derive_stream(spec.seed, static_cast<std::uint64_t>(index)));
  SynthImage img;
  img.annotation.image_id = image_name(index);
  img.annotation.width = spec.width;
  img.annotation.height = spec.height;

  const bool positive = rng.next_unit() < spec.positive_fraction;
  if (positive) {
    const int shapes = rng.next_int(1, 3);
    for (int s = 0; s < shapes; ++s) {
      img.annotation.polygons.push_back(sample_shape(rng, spec));
    }
  }
  img.truth = rasterize_polygons(img.annotation);

  LikelihoodMap likelihood(spec.width, spec.height);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      double v = static_cast<double>(img.truth.at(x, y));
      if (spec.likelihood_noise > 0.0) {
        v += spec.likelihood_noise * rng.next_gaussian();
      }
      likelihood.set(x, y, std::clamp(v, 0.0, 1.0));
    }
  }
  img.likelihood = std::move(likelihood);

  img.oracle_score = distraction_score(img.truth, weights, params);
  std::int64_t response_sum = 0;
  for (int r = 0; r < 3; ++r) {
    double raw = 3.0 * img.oracle_score;
    if (spec.rater_noise > 0.0) raw += spec.rater_noise * rng.next_gaussian();
    const long response = std::clamp(std::lround(raw), 0L, 3L);
    img.responses[r] = static_cast<int>(response);
    response_sum += response;
  }
  img.level = static_cast<int>(
      std::lround(static_cast<double>(response_sum) / 3.0));
  return img;
}

}  // namespace

std::vector<SynthImage> generate_dataset(const SynthSpec& spec,
                                         const ScoringParams& params) {
  spec.validate();
  params.validate();
  const WeightMap weights =
      gaussian_weights(spec.width, spec.height, params.sigma);
  std::vector<SynthImage> images(spec.image_count);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < spec.image_count; ++i) {
    images[i] = generate_image(spec, params, weights, i);
  }
  return images;
}

double sparse_eval_simulation(const ImageConfusion& confusion, double beta,
                              std::int64_t population, std::uint64_t seed) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("beta must be in (0, 1)");
  }
  if (population < 1) throw std::invalid_argument("population must be >= 1");
  if (confusion.itp + confusion.ifn <= 0 || confusion.ifp + confusion.itn <= 0) {
    throw std::invalid_argument(
        "confusion rates undefined: need both positives and negatives");
  }
  const double recall_rate =
      static_cast<double>(confusion.itp) /
      static_cast<double>(confusion.itp + confusion.ifn);
  const double false_positive_rate =
      static_cast<double>(confusion.ifp) /
      static_cast<double>(confusion.ifp + confusion.itn);

  // Fixed chunking gives one RNG stream per chunk, so totals do not depend
  // on the thread count.
  constexpr std::int64_t kChunk = 1 << 16;
  const std::int64_t chunks = (population + kChunk - 1) / kChunk;
  std::int64_t true_hits = 0;
  std::int64_t false_hits = 0;
#pragma omp parallel for schedule(static) reduction(+ : true_hits, false_hits)
  for (std::int64_t c = 0; c < chunks; ++c) {
    SplitMix64 rng(derive_stream(seed, static_cast<std::uint64_t>(c)));
    const std::int64_t end = std::min(population, (c + 1) * kChunk);
    for (std::int64_t i = c * kChunk; i < end; ++i) {
      const bool positive = rng.next_unit() < beta;
      const double accept = positive ? recall_rate : false_positive_rate;
      const bool predicted = rng.next_unit() < accept;
      if (predicted) {
        if (positive)
          ++true_hits;
        else
          ++false_hits;
      }
    }
  }
  const std::int64_t predicted = true_hits + false_hits;
  if (predicted == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(true_hits) / static_cast<double>(predicted);
}

}  // namespace wds
