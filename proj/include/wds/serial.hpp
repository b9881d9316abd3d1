#pragma once

#include <set>
#include <span>
#include <vector>

#include "wds/fitting.hpp"
#include "wds/mask.hpp"
#include "wds/metrics.hpp"
#include "wds/scoring.hpp"

// Serial reference implementations of the parallel kernels. These stay
// deliberately naive (plain loops, left-to-right sums, brute-force geometry)
// so the tests can cross-check the OpenMP paths against an independent
// route, and the bench target can compare throughput.
namespace wds::serial {

WeightMap gaussian_weights(int width, int height, double sigma);

double weighted_area(const BinaryMask& label, const WeightMap& weights);

/// Crossing-number point-in-polygon test against every pixel center; the
/// rasterization oracle.
BinaryMask rasterize_polygons(const AnnotationSet& ann);

bool point_in_polygons(const std::vector<Polygon>& polygons, double x,
                       double y);

PixelConfusion pixel_confusion(const BinaryMask& pred, const BinaryMask& truth);

/// All-pairs double loop over cross-level pairs.
RankingTable pairwise_ranking_table(std::span<const ScoredItem> items,
                                    const std::set<int>& include_levels);

double mse_objective(const ScoringParams& params,
                     const std::vector<ScoredExample>& data);

}  // namespace wds::serial
