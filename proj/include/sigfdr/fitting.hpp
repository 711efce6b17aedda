// Producing threshold models from data: plug-in of externally estimated
// (eta0, sigma), or marginal maximum likelihood over (s, sigma) with the null
// scale estimated from the data (empirical null).

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>

#include "sigfdr/models.hpp"
#include "sigfdr/numerics.hpp"

namespace sigfdr {

/// Unusable input data (wrong scale, too few observations, bad options).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class FitMode { Plugin, Mle };

std::string_view to_string(FitMode mode);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct FitOptions {
  Interval sigma_bounds{0.05, 20.0};
  /// Defaults per kind when unset: BUM (1e-6, 1], HND [1e-4, 50].
  std::optional<Interval> s_bounds;
  int grid_points = 25;
  OptimizerSpec optimizer{};

  Interval s_bounds_for(ModelKind kind) const;
  void validate(ModelKind kind) const;
};

struct FitResult {
  ModelKind model_kind = ModelKind::Hnd;
  FitMode mode = FitMode::Mle;
  double s_hat = 0.0;
  double sigma_hat = 1.0;
  double eta0_hat = 1.0;
  std::optional<double> log_likelihood;
  bool converged = false;
  bool at_boundary = false;
  std::size_t n_obs = 0;
  int iterations = 0;

  ThresholdModel model() const;
};

struct FitOutput {
  FitResult result;
  FdrTable table;
};

/// Marginal log-likelihood of z-scores,
///   sum_i log( eta0 * phi(z_i / sigma) / sigma / fdr(y(z_i)) ),
/// with log fdr evaluated analytically. Permutation invariant.
double log_likelihood(ModelKind kind, double s, double sigma,
                      const StatisticBatch& batch);
double log_likelihood(const ThresholdModel& model, const StatisticBatch& batch);

/// Build the model from externally supplied (eta0, sigma) and score the
/// batch. HND converts eta0 to s by root finding; BUM uses s = eta0.
FitOutput plugin_fit(ModelKind kind, double eta0, double sigma,
                     const StatisticBatch& batch);

/// Empirical-null maximum likelihood: coarse grid over (s, sigma), then
/// Nelder-Mead on (logit s | log(s - s_min), log sigma) from the best cell.
/// Estimates within 1e-6 of a bound are snapped to it and flagged.
FitOutput mle_fit(ModelKind kind, const StatisticBatch& batch,
                  const FitOptions& opts = {});

}  // namespace sigfdr
