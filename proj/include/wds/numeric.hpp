#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace wds {

// Fixed block size for deterministic parallel reductions. Each block is
// accumulated left-to-right and block totals are combined in block order,
// so the result is bit-identical for any thread count, including one.
inline constexpr std::size_t kReductionBlock = 4096;

double blocked_sum(std::span<const double> values);

// Sum of weights[i] over pixels where label[i] != 0, same blocking scheme.
double blocked_masked_sum(std::span<const double> weights,
                          std::span<const std::uint8_t> labels);

}  // namespace wds
