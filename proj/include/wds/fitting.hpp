#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "wds/mask.hpp"
#include "wds/scoring.hpp"

namespace wds {

/// One training example: a ground-truth label map and the averaged,
/// normalized human score in [0, 1].
struct ScoredExample {
  BinaryMask label;
  double human_score = 0.0;
};

/// Inclusive uniform grid over [lo, hi] with `steps` points.
struct GridAxis {
  double lo = 0.0;
  double hi = 0.0;
  int steps = 0;

  double value(int k) const {
    return steps < 2 ? lo : lo + (hi - lo) * k / (steps - 1);
  }
  double spacing() const { return steps < 2 ? 0.0 : (hi - lo) / (steps - 1); }
};

struct FitConfig {
  GridAxis lambda{1.0, 200.0, 40};
  GridAxis sigma{0.05, 2.0, 40};
  GridAxis alpha{0.0, 0.5, 26};
  int refine_sweeps = 2000;    // budget for the coordinate-descent phase
  double tolerance = 1e-6;     // objective improvement below which we stop
  std::uint64_t seed = 0;      // kept in the interface; grid + descent is
                               // fully deterministic and never draws from it

  void validate() const;
};

struct FitResult {
  ScoringParams params;
  double mse = 0.0;
  std::int64_t evaluations = 0;
  bool converged = false;
};

/// Raised when the data cannot constrain the fit: empty dataset, no
/// non-empty mask, or all human scores identical.
class DegenerateDataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Mean of integer rater responses in {0,..,3}, normalized to [0, 1].
double normalize_rater_scores(const std::vector<int>& responses);

/// Mean over examples of (distraction_score(label) - human_score)^2, with
/// the same empty-mask override used everywhere in scoring.
double mse_objective(const ScoringParams& params,
                     const std::vector<ScoredExample>& data);

/// Coarse grid search over (lambda, sigma, alpha) followed by coordinate
/// descent with shrinking steps, clamped to the grid boxes. Deterministic:
/// identical data and config give a bit-identical result. The returned mse
/// never exceeds the best grid point, so grid_oracle() bounds it from above.
FitResult fit_params(const std::vector<ScoredExample>& data,
                     const FitConfig& config = {});

/// Exhaustive evaluation of every grid point; brute-force verifier for
/// fit_params. Ties resolve to the lowest flat grid index.
FitResult grid_oracle(const std::vector<ScoredExample>& data,
                      const FitConfig& config = {});

}  // namespace wds
