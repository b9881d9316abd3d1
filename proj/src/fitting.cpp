#include "wds/fitting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <utility>

#include "wds/numeric.hpp"

namespace wds {

void FitConfig::validate() const {
  const auto check_axis = [](const GridAxis& axis, const char* name) {
    if (axis.steps < 2 || !(axis.hi > axis.lo)) {
      throw std::invalid_argument(std::string("invalid grid axis for ") + name);
    }
  };
  check_axis(lambda, "lambda");
  check_axis(sigma, "sigma");
  check_axis(alpha, "alpha");
  if (!(lambda.lo > 0.0)) throw std::invalid_argument("lambda grid must be positive");
  if (!(sigma.lo > 0.0)) throw std::invalid_argument("sigma grid must be positive");
  if (alpha.lo < 0.0 || alpha.hi > 1.0) {
    throw std::invalid_argument("alpha grid must stay within [0, 1]");
  }
  if (refine_sweeps < 0) throw std::invalid_argument("negative refinement budget");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be > 0");
}

double normalize_rater_scores(const std::vector<int>& responses) {
  if (responses.empty()) {
    throw std::invalid_argument("empty rater response list");
  }
  std::int64_t sum = 0;
  for (int r : responses) {
    if (r < 0 || r > 3) {
      throw std::invalid_argument("rater response outside [0, 3]");
    }
    sum += r;
  }
  return static_cast<double>(sum) /
         (3.0 * static_cast<double>(responses.size()));
}

namespace {

void check_examples(const std::vector<ScoredExample>& data) {
  for (const ScoredExample& ex : data) {
    if (!(ex.human_score >= 0.0 && ex.human_score <= 1.0)) {
      throw std::invalid_argument("human score outside [0, 1]");
    }
  }
}

// Weighted areas of every example's label at one sigma; weight maps are
// shared across examples of the same size. This is the cache that makes the
// grid tractable: for a fixed sigma the (lambda, alpha) sweep never touches
// pixels again.
std::vector<double> areas_for_sigma(const std::vector<ScoredExample>& data,
                                    double sigma) {
  std::map<std::pair<int, int>, WeightMap> maps;
  for (const ScoredExample& ex : data) {
    const auto key = std::make_pair(ex.label.width(), ex.label.height());
    if (!maps.contains(key)) {
      maps.emplace(key, gaussian_weights(key.first, key.second, sigma));
    }
  }
  std::vector<double> areas(data.size());
  const std::int64_t n = static_cast<std::int64_t>(data.size());
#pragma omp parallel for schedule(static) if (n > 8)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto key =
        std::make_pair(data[i].label.width(), data[i].label.height());
    areas[i] = weighted_area(data[i].label, maps.at(key));
  }
  return areas;
}

double stable_sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Mean squared error from cached areas. Blocked fixed-order accumulation so
// the value is identical whether this runs inside a parallel grid sweep or
// standalone.
double mse_from_areas(std::span<const double> areas,
                      std::span<const std::uint8_t> empty,
                      std::span<const double> human, double lambda,
                      double alpha) {
  const std::size_t n = areas.size();
  const auto block = [&](std::size_t begin, std::size_t end) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double predicted =
          empty[i] ? 0.0 : stable_sigmoid(lambda * (areas[i] - alpha));
      const double err = predicted - human[i];
      s += err * err;
    }
    return s;
  };
  double total = 0.0;
  if (n <= kReductionBlock) {
    total = block(0, n);
  } else {
    const std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
    std::vector<double> partial(blocks);
#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < static_cast<std::int64_t>(blocks); ++b) {
      const std::size_t begin = static_cast<std::size_t>(b) * kReductionBlock;
      partial[b] = block(begin, std::min(begin + kReductionBlock, n));
    }
    for (double p : partial) total += p;
  }
  return total / static_cast<double>(n);
}

struct Prepared {
  std::vector<std::uint8_t> empty;
  std::vector<double> human;
};

Prepared prepare(const std::vector<ScoredExample>& data) {
  Prepared prep;
  prep.empty.resize(data.size());
  prep.human.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    prep.empty[i] = data[i].label.is_empty() ? 1 : 0;
    prep.human[i] = data[i].human_score;
  }
  return prep;
}

struct GridBest {
  ScoringParams params;
  double mse = 0.0;
  std::int64_t evaluations = 0;
};

// Exhaustive scan in (sigma, lambda, alpha) index order; strict-less update
// resolves ties to the lowest flat index. fit_params and grid_oracle share
// this so oracle dominance holds exactly, not within a tolerance.
GridBest grid_scan(const std::vector<ScoredExample>& data,
                   const Prepared& prep, const FitConfig& config) {
  GridBest best;
  best.mse = std::numeric_limits<double>::infinity();
  const int ls = config.lambda.steps;
  const int as = config.alpha.steps;
  std::vector<double> mses(static_cast<std::size_t>(ls) * as);
  for (int si = 0; si < config.sigma.steps; ++si) {
    const double sigma = config.sigma.value(si);
    const std::vector<double> areas = areas_for_sigma(data, sigma);
#pragma omp parallel for schedule(static)
    for (std::int64_t flat = 0; flat < static_cast<std::int64_t>(mses.size());
         ++flat) {
      const double lambda = config.lambda.value(static_cast<int>(flat) / as);
      const double alpha = config.alpha.value(static_cast<int>(flat) % as);
      mses[flat] = mse_from_areas(areas, prep.empty, prep.human, lambda, alpha);
    }
    for (std::size_t flat = 0; flat < mses.size(); ++flat) {
      if (mses[flat] < best.mse) {
        best.mse = mses[flat];
        best.params = ScoringParams{sigma,
                                    config.lambda.value(static_cast<int>(flat) / as),
                                    config.alpha.value(static_cast<int>(flat) % as)};
      }
    }
    best.evaluations += static_cast<std::int64_t>(mses.size());
  }
  return best;
}

void check_fit_preconditions(const std::vector<ScoredExample>& data) {
  if (data.empty()) throw DegenerateDataError("empty dataset");
  check_examples(data);
  bool any_nonempty = false;
  std::set<double> distinct;
  for (const ScoredExample& ex : data) {
    if (!ex.label.is_empty()) any_nonempty = true;
    distinct.insert(ex.human_score);
  }
  if (!any_nonempty) {
    throw DegenerateDataError("every label mask is empty");
  }
  if (distinct.size() < 2) {
    throw DegenerateDataError("need at least two distinct human scores");
  }
}

}  // namespace

double mse_objective(const ScoringParams& params,
                     const std::vector<ScoredExample>& data) {
  if (data.empty()) throw std::invalid_argument("empty dataset");
  params.validate();
  check_examples(data);
  const Prepared prep = prepare(data);
  const std::vector<double> areas = areas_for_sigma(data, params.sigma);
  return mse_from_areas(areas, prep.empty, prep.human, params.lambda,
                        params.alpha);
}

FitResult grid_oracle(const std::vector<ScoredExample>& data,
                      const FitConfig& config) {
  config.validate();
  check_fit_preconditions(data);
  const Prepared prep = prepare(data);
  const GridBest best = grid_scan(data, prep, config);
  FitResult result;
  result.params = best.params;
  result.mse = best.mse;
  result.evaluations = best.evaluations;
  result.converged = true;
  return result;
}

FitResult fit_params(const std::vector<ScoredExample>& data,
                     const FitConfig& config) {
  config.validate();
  check_fit_preconditions(data);
  const Prepared prep = prepare(data);

  GridBest best = grid_scan(data, prep, config);
  std::int64_t evaluations = best.evaluations;

  // Coordinate descent with shrinking steps, clamped to the grid boxes.
  // Coordinates are (sigma, lambda, alpha) in that fixed order; sigma moves
  // recompute the cached areas only when accepted.
  std::array<double, 3> x = {best.params.sigma, best.params.lambda,
                             best.params.alpha};
  const std::array<double, 3> lo = {config.sigma.lo, config.lambda.lo,
                                    config.alpha.lo};
  const std::array<double, 3> hi = {config.sigma.hi, config.lambda.hi,
                                    config.alpha.hi};
  const std::array<double, 3> initial_step = {config.sigma.spacing(),
                                              config.lambda.spacing(),
                                              config.alpha.spacing()};
  std::array<double, 3> step = initial_step;

  std::vector<double> areas = areas_for_sigma(data, x[0]);
  std::vector<double> trial_areas;
  double fbest = best.mse;
  double round_gain = 0.0;  // objective decrease since the last halving
  bool converged = false;
  int sweeps = 0;

  const auto eval_coord = [&](int c, double value) {
    if (c == 0) {
      trial_areas = areas_for_sigma(data, value);
      return mse_from_areas(trial_areas, prep.empty, prep.human, x[1], x[2]);
    }
    const double lambda = c == 1 ? value : x[1];
    const double alpha = c == 2 ? value : x[2];
    return mse_from_areas(areas, prep.empty, prep.human, lambda, alpha);
  };

  while (sweeps < config.refine_sweeps) {
    ++sweeps;
    bool moved = false;
    for (int c = 0; c < 3; ++c) {
      for (double sign : {1.0, -1.0}) {
        const double candidate =
            std::clamp(x[c] + sign * step[c], lo[c], hi[c]);
        if (candidate == x[c]) continue;
        const double f = eval_coord(c, candidate);
        ++evaluations;
        if (f < fbest) {
          round_gain += fbest - f;
          fbest = f;
          x[c] = candidate;
          if (c == 0) areas.swap(trial_areas);
          // Greedy continuation: flat ridges (e.g. lambda under quantized
          // targets) are walked within one sweep instead of one step per
          // sweep. Strict decrease on a bounded lattice, so this terminates.
          while (true) {
            const double next = std::clamp(x[c] + sign * step[c], lo[c], hi[c]);
            if (next == x[c]) break;
            const double fn = eval_coord(c, next);
            ++evaluations;
            if (!(fn < fbest)) break;
            round_gain += fbest - fn;
            fbest = fn;
            x[c] = next;
            if (c == 0) areas.swap(trial_areas);
          }
          moved = true;
          break;
        }
      }
    }
    if (!moved) {
      // Ten halvings refine each coordinate to ~1e-3 of its grid spacing,
      // well below what the objective can resolve; after that, stop as soon
      // as a whole round gains less than the tolerance.
      constexpr double kStepShrink = 1.0 / 1024.0;
      const bool steps_fine = step[0] <= initial_step[0] * kStepShrink &&
                              step[1] <= initial_step[1] * kStepShrink &&
                              step[2] <= initial_step[2] * kStepShrink;
      if (steps_fine && round_gain < config.tolerance) {
        converged = true;
        break;
      }
      for (double& s : step) s *= 0.5;
      round_gain = 0.0;
    }
  }

  FitResult result;
  result.params = ScoringParams{x[0], x[1], x[2]};
  result.mse = fbest;
  result.evaluations = evaluations;
  result.converged = converged;
  return result;
}

}  // namespace wds
