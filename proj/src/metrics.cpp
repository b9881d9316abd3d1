#include "wds/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace wds {

PixelConfusion pixel_confusion(const BinaryMask& pred,
                               const BinaryMask& truth) {
  if (pred.width() != truth.width() || pred.height() != truth.height()) {
    throw std::invalid_argument("prediction and truth dimensions differ");
  }
  const std::uint8_t* p = pred.values().data();
  const std::uint8_t* t = truth.values().data();
  const std::int64_t n = static_cast<std::int64_t>(pred.pixel_count());

  std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
#pragma omp parallel for schedule(static) reduction(+ : tp, fp, fn, tn) \
    if (n > 65536)
  for (std::int64_t i = 0; i < n; ++i) {
    tp += p[i] & t[i];
    fp += p[i] & (1 - t[i]);
    fn += (1 - p[i]) & t[i];
    tn += (1 - p[i]) & (1 - t[i]);
  }
  return PixelConfusion{tp, fp, fn, tn};
}

PixelRatios pixel_metrics(const PixelConfusion& c) {
  PixelRatios r;
  if (c.tp + c.fp > 0) {
    r.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  }
  if (c.tp + c.fn > 0) {
    r.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  }
  if (c.tp + c.fp + c.fn > 0) {
    r.iou =
        static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp + c.fn);
  }
  return r;
}

PixelConfusion swap_classes(const PixelConfusion& c) {
  return PixelConfusion{c.tn, c.fn, c.fp, c.tp};
}

double mean_iou(double watermark_iou, double background_iou) {
  if (!(watermark_iou >= 0.0 && watermark_iou <= 1.0) ||
      !(background_iou >= 0.0 && background_iou <= 1.0)) {
    throw std::invalid_argument("class IOU outside [0, 1]");
  }
  return 0.5 * (watermark_iou + background_iou);
}

double mean_iou(double watermark_iou, double background_iou,
                double watermark_freq, double background_freq) {
  if (!(watermark_iou >= 0.0 && watermark_iou <= 1.0) ||
      !(background_iou >= 0.0 && background_iou <= 1.0)) {
    throw std::invalid_argument("class IOU outside [0, 1]");
  }
  if (watermark_freq < 0.0 || background_freq < 0.0 ||
      std::abs(watermark_freq + background_freq - 1.0) > 1e-9) {
    throw std::invalid_argument(
        "class weights must be non-negative and sum to 1");
  }
  return watermark_freq * watermark_iou + background_freq * background_iou;
}

ImageConfusion image_confusion(std::span<const ImageOutcome> outcomes) {
  ImageConfusion c;
  for (const ImageOutcome& o : outcomes) {
    if (o.predicted_positive && o.has_watermark)
      ++c.itp;
    else if (o.predicted_positive && !o.has_watermark)
      ++c.ifp;
    else if (!o.predicted_positive && o.has_watermark)
      ++c.ifn;
    else
      ++c.itn;
  }
  return c;
}

std::optional<double> e_precision(std::int64_t itp, std::int64_t ifp,
                                  double beta) {
  if (itp < 0 || ifp < 0) throw std::invalid_argument("negative image counts");
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("beta must be in (0, 1)");
  }
  if (itp == 0 && ifp == 0) return std::nullopt;
  const double num = beta * static_cast<double>(itp);
  const double den = num + (1.0 - beta) * static_cast<double>(ifp);
  return num / den;
}

RankingTable pairwise_ranking_table(std::span<const ScoredItem> items) {
  return pairwise_ranking_table(items, std::set<int>{0, 1, 2, 3});
}

RankingTable pairwise_ranking_table(std::span<const ScoredItem> items,
                                    const std::set<int>& include_levels) {
  // Sorted per-level score lists; a pair is correct when the higher-level
  // item's score is strictly greater, so per item the correct count is the
  // number of lower-level scores strictly below it.
  std::map<int, std::vector<double>> by_level;
  for (const ScoredItem& item : items) {
    if (item.level < 0 || item.level > 3) {
      throw std::invalid_argument("ground-truth level outside {0, 1, 2, 3}");
    }
    if (include_levels.contains(item.level)) {
      by_level[item.level].push_back(item.score);
    }
  }
  if (by_level.size() < 2) {
    throw std::invalid_argument("ranking needs items from at least two levels");
  }
  for (auto& [level, scores] : by_level) {
    std::sort(scores.begin(), scores.end());
  }

  RankingTable table;
  for (const auto& [hi_level, hi_scores] : by_level) {
    for (const auto& [lo_level, lo_scores] : by_level) {
      if (hi_level <= lo_level) continue;
      std::int64_t correct = 0;
      const std::int64_t n = static_cast<std::int64_t>(hi_scores.size());
#pragma omp parallel for schedule(static) reduction(+ : correct) \
    if (n > 4096)
      for (std::int64_t i = 0; i < n; ++i) {
        correct += std::lower_bound(lo_scores.begin(), lo_scores.end(),
                                    hi_scores[i]) -
                   lo_scores.begin();
      }
      RankingCell cell;
      cell.correct = correct;
      cell.total = static_cast<std::int64_t>(hi_scores.size()) *
                   static_cast<std::int64_t>(lo_scores.size());
      cell.percentage = 100.0 * static_cast<double>(cell.correct) /
                        static_cast<double>(cell.total);
      table.cells[{hi_level, lo_level}] = cell;
    }
  }
  return table;
}

}  // namespace wds
