// Simulation study: per repetition, fit each method, score the batch and
// compare the estimated fdr / Fdr with the truth of the generating mixture.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sigfdr/fitting.hpp"
#include "sigfdr/simulate.hpp"

namespace sigfdr {

enum class MethodMode { Plugin, Mle, Truth };

struct MethodSpec {
  std::string name;
  ModelKind kind = ModelKind::Hnd;
  MethodMode mode = MethodMode::Mle;
  // plug-in parameters, used only when mode == Plugin
  double eta0 = 0.0;
  double sigma = 0.0;

  static MethodSpec native(ModelKind kind);
  static MethodSpec plugin(ModelKind kind, double eta0, double sigma);
  /// Pseudo-method that reports the generating truth; its errors are zero.
  static MethodSpec truth();

  void validate() const;
};

/// Method names: hnd-native, bum-native, hnd-plugin, bum-plugin, truth.
/// Plug-in methods take the scenario's true (eta0, null_sd).
MethodSpec parse_method(const std::string& name,
                        const SimulationScenario& scenario);

struct RepResult {
  bool failed = false;
  std::string error;
  double mae_fdr = 0.0;
  double mae_Fdr = 0.0;
  double mse_fdr = 0.0;
  double mse_Fdr = 0.0;
  double eta0_hat = 0.0;
  double sigma_hat = 0.0;
  bool converged = true;
  bool at_boundary = false;
};

struct Quantiles {
  double q05 = 0.0;
  double q25 = 0.0;
  double q50 = 0.0;
  double q75 = 0.0;
  double q95 = 0.0;
};

/// Linear-interpolation sample quantiles (type 7). Empty input gives NaN.
double quantile(std::vector<double> values, double level);
Quantiles summarize(const std::vector<double>& values);

struct MethodSummary {
  MethodSpec method;
  std::vector<RepResult> reps;  // indexed by repetition, length B
  std::size_t n_failed = 0;
  Quantiles mae_fdr;
  Quantiles mae_Fdr;
  Quantiles mse_fdr;
  Quantiles mse_Fdr;
  Quantiles eta0_hat;
  Quantiles sigma_hat;
};

struct EvalSummary {
  SimulationScenario scenario;
  std::vector<MethodSummary> methods;

  const MethodSummary& method(const std::string& name) const;
};

struct StudyOptions {
  FitOptions fit{};
  /// Worker threads; 0 picks the hardware concurrency.
  unsigned threads = 0;
};

/// Evaluate one method on one batch.
RepResult evaluate_method(const MethodSpec& method, const TruthOracle& oracle,
                          const StatisticBatch& batch,
                          const FitOptions& fit = {});

/// Run every method on every repetition. Fit failures mark the repetition
/// failed for that method and are excluded from the quantiles.
EvalSummary run_study(const SimulationScenario& scenario,
                      const std::vector<MethodSpec>& methods,
                      const StudyOptions& options = {});

struct ParamBias {
  std::string method;
  double eta0_bias = 0.0;
  double sigma_bias = 0.0;
};

/// Signed median biases (median eta0_hat - eta0, median sigma_hat - null_sd).
std::vector<ParamBias> param_bias(const EvalSummary& summary,
                                  const SimulationScenario& truth);

}  // namespace sigfdr
