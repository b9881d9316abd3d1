#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <utility>

#include "wds/mask.hpp"

namespace wds {

// ----------------------------------------------------------------------------
// Pixel-level metrics
// ----------------------------------------------------------------------------

struct PixelConfusion {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  std::int64_t total() const { return tp + fp + fn + tn; }

  PixelConfusion& operator+=(const PixelConfusion& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }

  bool operator==(const PixelConfusion&) const = default;
};

/// Ratios derived from a confusion; a ratio with zero denominator is
/// undefined and reported as nullopt rather than coerced to 0 or 1.
struct PixelRatios {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> iou;
};

PixelConfusion pixel_confusion(const BinaryMask& pred, const BinaryMask& truth);

PixelRatios pixel_metrics(const PixelConfusion& c);

/// Confusion of the complementary (background) class: background positives
/// are the pixels labelled 0.
PixelConfusion swap_classes(const PixelConfusion& c);

/// Arithmetic mean of the two per-class IOUs.
double mean_iou(double watermark_iou, double background_iou);

/// Frequency-weighted mean; weights must be non-negative and sum to 1.
double mean_iou(double watermark_iou, double background_iou,
                double watermark_freq, double background_freq);

// ----------------------------------------------------------------------------
// Image-level metrics
// ----------------------------------------------------------------------------

struct ImageConfusion {
  std::int64_t itp = 0;
  std::int64_t ifp = 0;
  std::int64_t ifn = 0;
  std::int64_t itn = 0;

  bool operator==(const ImageConfusion&) const = default;
};

struct ImageOutcome {
  bool predicted_positive = false;
  bool has_watermark = false;
};

ImageConfusion image_confusion(std::span<const ImageOutcome> outcomes);

/// Precision extrapolated from balanced-set counts to a population with true
/// positive fraction beta: beta*itp / (beta*itp + (1-beta)*ifp). Requires
/// 0 < beta < 1; undefined (nullopt) when itp = ifp = 0.
std::optional<double> e_precision(std::int64_t itp, std::int64_t ifp,
                                  double beta);

// ----------------------------------------------------------------------------
// Pairwise ranking
// ----------------------------------------------------------------------------

struct ScoredItem {
  double score = 0.0;
  int level = 0;  // ground-truth distraction level in {0, 1, 2, 3}
};

struct RankingCell {
  std::int64_t correct = 0;
  std::int64_t total = 0;
  double percentage = 0.0;
};

/// Accuracy per ordered level pair (higher, lower); only pairs with
/// higher > lower and at least one cross pair appear.
struct RankingTable {
  std::map<std::pair<int, int>, RankingCell> cells;
};

/// For every cross-level pair, the higher-level item must have a strictly
/// greater predicted score; exact ties count as incorrect. Throws unless the
/// (filtered) items span at least two levels.
RankingTable pairwise_ranking_table(std::span<const ScoredItem> items);
RankingTable pairwise_ranking_table(std::span<const ScoredItem> items,
                                    const std::set<int>& include_levels);

}  // namespace wds
