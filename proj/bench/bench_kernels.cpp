// Throughput comparison of the OpenMP kernels against their serial
// reference implementations. The serial versions exist for correctness
// cross-checks; this target shows what the parallel paths buy and catches
// regressions that would quietly fall back to serial speeds.

#include <benchmark/benchmark.h>

#include <vector>

#include "wds/mask.hpp"
#include "wds/metrics.hpp"
#include "wds/rng.hpp"
#include "wds/scoring.hpp"
#include "wds/serial.hpp"

namespace {

using namespace wds;

BinaryMask make_mask(int dim, double density) {
  SplitMix64 rng(7);
  BinaryMask mask(dim, dim);
  for (int y = 0; y < dim; ++y) {
    for (int x = 0; x < dim; ++x) {
      mask.set(x, y, rng.next_unit() < density ? 1 : 0);
    }
  }
  return mask;
}

AnnotationSet make_annotation(int dim) {
  SplitMix64 rng(8);
  AnnotationSet ann;
  ann.image_id = "bench";
  ann.width = dim;
  ann.height = dim;
  for (int p = 0; p < 4; ++p) {
    const double cx = rng.next_range(0.0, dim), cy = rng.next_range(0.0, dim);
    const double hw = rng.next_range(dim * 0.05, dim * 0.25);
    const double hh = rng.next_range(dim * 0.05, dim * 0.25);
    ann.polygons.push_back({Vertex{cx - hw, cy - hh}, Vertex{cx + hw, cy - hh},
                            Vertex{cx + hw, cy + hh},
                            Vertex{cx - hw, cy + hh}});
  }
  return ann;
}

void BM_GaussianWeights(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(gaussian_weights(dim, dim, 0.44));
  }
  state.SetItemsProcessed(state.iterations() * dim * dim);
}

void BM_GaussianWeightsSerial(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(serial::gaussian_weights(dim, dim, 0.44));
  }
  state.SetItemsProcessed(state.iterations() * dim * dim);
}

void BM_WeightedArea(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const BinaryMask mask = make_mask(dim, 0.3);
  const WeightMap weights = gaussian_weights(dim, dim, 0.44);
  for (auto _ : state) {
    benchmark::DoNotOptimize(weighted_area(mask, weights));
  }
  state.SetItemsProcessed(state.iterations() * dim * dim);
}

void BM_WeightedAreaSerial(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const BinaryMask mask = make_mask(dim, 0.3);
  const WeightMap weights = gaussian_weights(dim, dim, 0.44);
  for (auto _ : state) {
    benchmark::DoNotOptimize(serial::weighted_area(mask, weights));
  }
  state.SetItemsProcessed(state.iterations() * dim * dim);
}

void BM_PixelConfusion(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const BinaryMask pred = make_mask(dim, 0.3);
  const BinaryMask truth = make_mask(dim, 0.25);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pixel_confusion(pred, truth));
  }
  state.SetItemsProcessed(state.iterations() * dim * dim);
}

void BM_PixelConfusionSerial(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const BinaryMask pred = make_mask(dim, 0.3);
  const BinaryMask truth = make_mask(dim, 0.25);
  for (auto _ : state) {
    benchmark::DoNotOptimize(serial::pixel_confusion(pred, truth));
  }
  state.SetItemsProcessed(state.iterations() * dim * dim);
}

void BM_Rasterize(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const AnnotationSet ann = make_annotation(dim);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rasterize_polygons(ann));
  }
  state.SetItemsProcessed(state.iterations() * dim * dim);
}

void BM_RasterizeSerial(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const AnnotationSet ann = make_annotation(dim);
  for (auto _ : state) {
    benchmark::DoNotOptimize(serial::rasterize_polygons(ann));
  }
  state.SetItemsProcessed(state.iterations() * dim * dim);
}

}  // namespace

BENCHMARK(BM_GaussianWeights)->Arg(256)->Arg(1024);
BENCHMARK(BM_GaussianWeightsSerial)->Arg(256)->Arg(1024);
BENCHMARK(BM_WeightedArea)->Arg(256)->Arg(1024);
BENCHMARK(BM_WeightedAreaSerial)->Arg(256)->Arg(1024);
BENCHMARK(BM_PixelConfusion)->Arg(256)->Arg(1024);
BENCHMARK(BM_PixelConfusionSerial)->Arg(256)->Arg(1024);
BENCHMARK(BM_Rasterize)->Arg(256)->Arg(1024);
BENCHMARK(BM_RasterizeSerial)->Arg(256)->Arg(1024);

BENCHMARK_MAIN();
