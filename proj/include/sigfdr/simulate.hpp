// Synthetic z-score batches from a normal null plus symmetric uniform
// alternatives, with the exact fdr / Fdr of the generating mixture.

#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <string>

#include "sigfdr/models.hpp"

namespace sigfdr {

struct SimulationScenario {
  std::string name = "custom";
  double eta0_true = 0.8;
  double null_sd = 2.0;
  double alt_lo = 5.0;
  double alt_hi = 10.0;
  std::size_t m = 200;
  std::size_t B = 100;
  std::uint64_t seed = 1;

  /// N(0, 4) null, alternatives U(-10, -5) and U(5, 10), eta0 = 0.8.
  static SimulationScenario separated();
  /// As separated() but with alternatives U(-10, -2) and U(2, 10).
  static SimulationScenario overlapping();
  static SimulationScenario preset(const std::string& name);

  void validate() const;
};

/// Parse "key = value" lines (keys eta0, null_sd, alt_lo, alt_hi, m, B,
/// seed; '#' starts a comment). Unset keys keep the separated preset.
SimulationScenario parse_scenario(std::istream& in);
SimulationScenario load_scenario(const std::string& path);

/// Counter-based generator: the k-th output of stream (seed, stream) is
/// splitmix64(key + (k + 1) * 0x9e3779b97f4a7c15) with
/// key = splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019), where
/// splitmix64 is the finalizer of Steele, Lea and Flood. Uniforms use the
/// top 53 bits offset by half a unit, so they lie strictly inside (0, 1).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next();
  double uniform();
  /// Standard normal by inversion of one uniform.
  double normal();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Exact truth for a scenario on the folded scale t = |z|.
class TruthOracle {
 public:
  explicit TruthOracle(SimulationScenario scenario);

  const SimulationScenario& scenario() const { return scenario_; }

  /// 2 phi(t / sd) / sd for t >= 0.
  double null_density(double t) const;
  /// 1 / (alt_hi - alt_lo) on [alt_lo, alt_hi], else 0.
  double alt_density(double t) const;
  double null_sf(double t) const;
  double alt_sf(double t) const;
  /// CDF of |Z| under the mixture.
  double mixture_cdf(double t) const;

  double local_fdr(double z) const;
  double tail_fdr(double z) const;

 private:
  SimulationScenario scenario_;
};

/// Batch for one repetition; a deterministic function of (seed, rep).
/// Each observation consumes two uniforms: the first picks the component
/// (and, rescaled, the side of an alternative draw), the second the value.
StatisticBatch generate(const SimulationScenario& scenario, std::size_t rep);

/// z-scores drawn from the HND marginal itself: a truncated half-normal on
/// [0, s] with probability eta0 (2 Phi(s) - 1), otherwise s + Exp(rate s);
/// scaled by sigma with a random sign.
StatisticBatch sample_hnd(const HndModel& model, std::size_t m,
                          std::uint64_t seed, std::uint64_t stream = 0);

}  // namespace sigfdr
