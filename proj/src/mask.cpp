#include "wds/mask.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace wds {

namespace {

void check_dims(int width, int height) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("invalid dimensions: " + std::to_string(width) +
                                "x" + std::to_string(height));
  }
}

std::size_t expected_count(int width, int height) {
  return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
}

}  // namespace

// ----------------------------------------------------------------------------
// LikelihoodMap
// ----------------------------------------------------------------------------

LikelihoodMap::LikelihoodMap(int width, int height)
    : width_(width), height_(height) {
  check_dims(width, height);
  values_.assign(expected_count(width, height), 0.0);
}

LikelihoodMap::LikelihoodMap(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  check_dims(width, height);
  if (values_.size() != expected_count(width, height)) {
    throw std::invalid_argument("likelihood map value count does not match dimensions");
  }
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("likelihood value outside [0, 1]");
    }
  }
}

void LikelihoodMap::set(int x, int y, double v) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument("likelihood value outside [0, 1]");
  }
  values_[static_cast<std::size_t>(y) * width_ + x] = v;
}

// ----------------------------------------------------------------------------
// BinaryMask
// ----------------------------------------------------------------------------

BinaryMask::BinaryMask(int width, int height) : width_(width), height_(height) {
  check_dims(width, height);
  values_.assign(expected_count(width, height), 0);
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> values)
    : width_(width), height_(height), values_(std::move(values)) {
  check_dims(width, height);
  if (values_.size() != expected_count(width, height)) {
    throw std::invalid_argument("mask value count does not match dimensions");
  }
  for (std::uint8_t v : values_) {
    if (v > 1) throw std::invalid_argument("mask value outside {0, 1}");
  }
}

void BinaryMask::set(int x, int y, std::uint8_t v) {
  if (v > 1) throw std::invalid_argument("mask value outside {0, 1}");
  values_[static_cast<std::size_t>(y) * width_ + x] = v;
}

std::int64_t BinaryMask::one_count() const {
  std::int64_t count = 0;
  const std::size_t n = values_.size();
#pragma omp parallel for schedule(static) reduction(+ : count) if (n > 65536)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    count += values_[i];
  }
  return count;
}

// ----------------------------------------------------------------------------
// AnnotationSet
// ----------------------------------------------------------------------------

void AnnotationSet::validate() const {
  check_dims(width, height);
  for (const Polygon& poly : polygons) {
    if (poly.size() < 3) {
      throw std::invalid_argument(
          "invalid annotation: polygon with fewer than 3 vertices");
    }
  }
}

// ----------------------------------------------------------------------------
// Operations
// ----------------------------------------------------------------------------

BinaryMask rasterize_polygons(const AnnotationSet& ann) {
  ann.validate();
  BinaryMask out(ann.width, ann.height);
  if (ann.polygons.empty()) return out;

  const int w = ann.width;
  const int h = ann.height;

  // Even-odd scanline fill, sampled at pixel centers. Rows are independent.
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    const double yc = y + 0.5;
    std::uint8_t* row = out.row(y);
    std::vector<double> crossings;
    for (const Polygon& poly : ann.polygons) {
      crossings.clear();
      const std::size_t n = poly.size();
      for (std::size_t i = 0; i < n; ++i) {
        const Vertex& a = poly[i];
        const Vertex& b = poly[(i + 1) % n];
        // Half-open rule: an edge covers [min(y), max(y)); horizontal edges
        // contribute nothing. Keeps vertices on the scanline counted once.
        if ((a.y <= yc && b.y > yc) || (b.y <= yc && a.y > yc)) {
          const double t = (yc - a.y) / (b.y - a.y);
          crossings.push_back(a.x + t * (b.x - a.x));
        }
      }
      std::sort(crossings.begin(), crossings.end());
      for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
        // Centers x + 0.5 in [crossings[k], crossings[k+1]).
        int x0 = static_cast<int>(std::ceil(crossings[k] - 0.5));
        int x1 = static_cast<int>(std::ceil(crossings[k + 1] - 0.5)) - 1;
        x0 = std::max(x0, 0);
        x1 = std::min(x1, w - 1);
        for (int x = x0; x <= x1; ++x) row[x] = 1;
      }
    }
  }
  return out;
}

BinaryMask threshold_likelihood(const LikelihoodMap& map, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("likelihood threshold outside [0, 1]");
  }
  BinaryMask out(map.width(), map.height());
  const std::vector<double>& in = map.values();
  const std::size_t n = in.size();
  std::uint8_t* dst = out.row(0);
#pragma omp parallel for schedule(static) if (n > 65536)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    dst[i] = in[i] >= p ? 1 : 0;
  }
  return out;
}

ImageDecision classify_image(const BinaryMask& mask, double t_frac) {
  if (!(t_frac >= 0.0 && t_frac <= 1.0)) {
    throw std::invalid_argument("count threshold fraction outside [0, 1]");
  }
  ImageDecision decision;
  decision.watermark_pixel_count = mask.one_count();
  decision.threshold_used = static_cast<std::int64_t>(
      std::floor(t_frac * static_cast<double>(mask.pixel_count())));
  decision.w = decision.watermark_pixel_count > decision.threshold_used ? 1 : 0;
  return decision;
}

BinaryMask hybrid_combine(const ImageDecision& decision, const BinaryMask& s) {
  if (decision.w == 0) return BinaryMask(s.width(), s.height());
  return s;
}

}  // namespace wds
