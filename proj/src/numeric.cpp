#include "wds/numeric.hpp"

#include <vector>

namespace wds {

namespace {

// n is small enough that the blocked machinery would be pure overhead.
double serial_sum(const double* xs, std::size_t n) {
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += xs[i];
  return total;
}

}  // namespace

double blocked_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n <= kReductionBlock) return serial_sum(values.data(), n);

  const std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
  std::vector<double> partial(blocks);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(blocks); ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kReductionBlock;
    const std::size_t end = std::min(begin + kReductionBlock, n);
    partial[b] = serial_sum(values.data() + begin, end - begin);
  }
  return serial_sum(partial.data(), blocks);
}

double blocked_masked_sum(std::span<const double> weights,
                          std::span<const std::uint8_t> labels) {
  const std::size_t n = weights.size();
  const auto block = [&](std::size_t begin, std::size_t end) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      if (labels[i]) s += weights[i];
    }
    return s;
  };
  if (n <= kReductionBlock) return block(0, n);

  const std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
  std::vector<double> partial(blocks);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(blocks); ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kReductionBlock;
    partial[b] = block(begin, std::min(begin + kReductionBlock, n));
  }
  double total = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) total += partial[b];
  return total;
}

}  // namespace wds
