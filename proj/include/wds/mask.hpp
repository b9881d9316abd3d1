#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wds {

// ----------------------------------------------------------------------------
// Domain types
// ----------------------------------------------------------------------------

/// Per-pixel watermark likelihoods in [0, 1], row-major.
class LikelihoodMap {
 public:
  LikelihoodMap() = default;
  LikelihoodMap(int width, int height);
  LikelihoodMap(int width, int height, std::vector<double> values);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }

  double at(int x, int y) const {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }
  void set(int x, int y, double v);

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

/// Per-pixel {0, 1} watermark labels, row-major, one byte per pixel.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height);
  BinaryMask(int width, int height, std::vector<std::uint8_t> values);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return values_.size(); }
  const std::vector<std::uint8_t>& values() const { return values_; }

  std::uint8_t at(int x, int y) const {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }
  void set(int x, int y, std::uint8_t v);

  std::int64_t one_count() const;
  bool is_empty() const { return one_count() == 0; }

  bool operator==(const BinaryMask& other) const = default;

  std::uint8_t* row(int y) {
    return values_.data() + static_cast<std::size_t>(y) * width_;
  }
  const std::uint8_t* row(int y) const {
    return values_.data() + static_cast<std::size_t>(y) * width_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> values_;
};

struct Vertex {
  double x = 0.0;
  double y = 0.0;
};

using Polygon = std::vector<Vertex>;

/// Polygon outlines of the watermark regions in one image. An empty polygon
/// list is a valid annotation and means "no watermark".
struct AnnotationSet {
  std::string image_id;
  int width = 0;
  int height = 0;
  std::vector<Polygon> polygons;

  /// Throws std::invalid_argument on non-positive dimensions or a polygon
  /// with fewer than 3 vertices.
  void validate() const;
};

/// Whole-image binary decision produced by thresholding the watermark pixel
/// count. Invariant: w == 1 iff watermark_pixel_count > threshold_used.
struct ImageDecision {
  int w = 0;
  std::int64_t watermark_pixel_count = 0;
  std::int64_t threshold_used = 0;
};

// ----------------------------------------------------------------------------
// Operations
// ----------------------------------------------------------------------------

/// Scanline fill of the annotation polygons at the annotation's dimensions.
/// A pixel is 1 iff its center lies inside any polygon under the even-odd
/// rule; overlapping polygons stay binary. Degenerate (zero-area) polygons
/// rasterize to nothing.
BinaryMask rasterize_polygons(const AnnotationSet& ann);

/// Pixel is 1 iff its likelihood >= p, so p = 0 selects everything and
/// p = 1 only saturated pixels.
BinaryMask threshold_likelihood(const LikelihoodMap& map, double p);

/// Image-level decision: positive iff the watermark pixel count strictly
/// exceeds floor(t_frac * width * height).
ImageDecision classify_image(const BinaryMask& mask, double t_frac);

/// L = w * S: all-zero when the image decision is negative, S unchanged
/// otherwise.
BinaryMask hybrid_combine(const ImageDecision& decision, const BinaryMask& s);

}  // namespace wds
