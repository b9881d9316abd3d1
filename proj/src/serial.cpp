#include "wds/serial.hpp"

#include <cmath>
#include <stdexcept>

namespace wds::serial {

WeightMap gaussian_weights(int width, int height, double sigma) {
  if (width < 1 || height < 1 || !(sigma > 0.0)) {
    throw std::invalid_argument("invalid weight map parameters");
  }
  WeightMap map;
  map.width = width;
  map.height = height;
  map.weights.resize(static_cast<std::size_t>(width) * height);
  // Same mirrored construction as the parallel kernel (the exact-symmetry
  // contract), but with a plain left-to-right normalization sum.
  const int half_w = (width + 1) / 2;
  const int half_h = (height + 1) / 2;
  for (int j = 0; j < height; ++j) {
    const int jj = j < half_h ? j : height - 1 - j;
    const double y = (jj + 0.5) / height - 0.5;
    for (int i = 0; i < width; ++i) {
      const int ii = i < half_w ? i : width - 1 - i;
      const double x = (ii + 0.5) / width - 0.5;
      map.weights[static_cast<std::size_t>(j) * width + i] =
          std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
    }
  }
  double total = 0.0;
  for (double w : map.weights) total += w;
  for (double& w : map.weights) w /= total;
  return map;
}

double weighted_area(const BinaryMask& label, const WeightMap& weights) {
  if (label.width() != weights.width || label.height() != weights.height) {
    throw std::invalid_argument("label and weight map dimensions differ");
  }
  double g = 0.0;
  for (std::size_t i = 0; i < weights.weights.size(); ++i) {
    if (label.values()[i]) g += weights.weights[i];
  }
  return g;
}

bool point_in_polygons(const std::vector<Polygon>& polygons, double x,
                       double y) {
  for (const Polygon& poly : polygons) {
    int crossings = 0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vertex& a = poly[i];
      const Vertex& b = poly[(i + 1) % n];
      // Same half-open edge rule as the scanline path; a crossing counts
      // when it lies strictly to the right of the query point.
      if ((a.y <= y && b.y > y) || (b.y <= y && a.y > y)) {
        const double t = (y - a.y) / (b.y - a.y);
        const double xi = a.x + t * (b.x - a.x);
        if (x < xi) ++crossings;
      }
    }
    if (crossings % 2 == 1) return true;
  }
  return false;
}

BinaryMask rasterize_polygons(const AnnotationSet& ann) {
  ann.validate();
  BinaryMask out(ann.width, ann.height);
  for (int y = 0; y < ann.height; ++y) {
    for (int x = 0; x < ann.width; ++x) {
      if (point_in_polygons(ann.polygons, x + 0.5, y + 0.5)) out.set(x, y, 1);
    }
  }
  return out;
}

PixelConfusion pixel_confusion(const BinaryMask& pred,
                               const BinaryMask& truth) {
  if (pred.width() != truth.width() || pred.height() != truth.height()) {
    throw std::invalid_argument("prediction and truth dimensions differ");
  }
  PixelConfusion c;
  for (std::size_t i = 0; i < pred.values().size(); ++i) {
    const bool p = pred.values()[i] != 0;
    const bool t = truth.values()[i] != 0;
    if (p && t)
      ++c.tp;
    else if (p && !t)
      ++c.fp;
    else if (!p && t)
      ++c.fn;
    else
      ++c.tn;
  }
  return c;
}

RankingTable pairwise_ranking_table(std::span<const ScoredItem> items,
                                    const std::set<int>& include_levels) {
  std::vector<ScoredItem> kept;
  for (const ScoredItem& item : items) {
    if (include_levels.contains(item.level)) kept.push_back(item);
  }
  std::set<int> levels;
  for (const ScoredItem& item : kept) levels.insert(item.level);
  if (levels.size() < 2) {
    throw std::invalid_argument("ranking needs items from at least two levels");
  }
  RankingTable table;
  for (const ScoredItem& hi : kept) {
    for (const ScoredItem& lo : kept) {
      if (hi.level <= lo.level) continue;
      RankingCell& cell = table.cells[{hi.level, lo.level}];
      ++cell.total;
      if (hi.score > lo.score) ++cell.correct;
    }
  }
  for (auto& [key, cell] : table.cells) {
    cell.percentage = 100.0 * static_cast<double>(cell.correct) /
                      static_cast<double>(cell.total);
  }
  return table;
}

double mse_objective(const ScoringParams& params,
                     const std::vector<ScoredExample>& data) {
  if (data.empty()) throw std::invalid_argument("empty dataset");
  params.validate();
  double total = 0.0;
  for (const ScoredExample& ex : data) {
    double predicted = 0.0;
    if (!ex.label.is_empty()) {
      const WeightMap weights = serial::gaussian_weights(
          ex.label.width(), ex.label.height(), params.sigma);
      predicted =
          score_from_area(serial::weighted_area(ex.label, weights), params);
    }
    const double err = predicted - ex.human_score;
    total += err * err;
  }
  return total / static_cast<double>(data.size());
}

}  // namespace wds::serial
