// Threshold-curve models for local and tail-area false discovery rates.
//
// A model is a null density on a native statistic y >= 0 together with a
// parametric, non-increasing local fdr curve. The marginal density follows
// as f(y) = eta0 * f0(y) / fdr(y), and eta0 is fixed by requiring f to
// integrate to one. Two families are provided:
//
//   BUM  y in [0, 1], uniform null, fdr(y) = s / (s + a (1-s) (1-y)^(a-1))
//        with a fixed shape constant a = 0.001; eta0 = s.
//   HND  y in [0, inf), half-normal null, fdr(y) = 1 for y <= s and
//        exp(-(y-s)^2 / 2) beyond; eta0 is a closed-form function of s.
//
// Both carry a null scale sigma that is applied when z-scores are folded
// onto the native scale.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sigfdr/numerics.hpp"

namespace sigfdr {

/// Internal-consistency failure, e.g. a probability well outside [0, 1].
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Domain error attributed to one row of a batch. row() is zero-based; the
/// message counts rows from one.
class RowDomainError : public DomainError {
 public:
  RowDomainError(std::size_t row, const std::string& what)
      : DomainError("row " + std::to_string(row + 1) + ": " + what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

enum class ModelKind { Bum, Hnd };
enum class StatisticScale { PValue, ZScore, NativeY };

std::string_view to_string(ModelKind kind);
std::string_view to_string(StatisticScale scale);

/// Statistic on the model's native scale. log_sf = log(1 - F0(y)) is kept
/// alongside y because both fdr curves depend on the null tail, which
/// cannot be recovered from y once 1 - y underflows.
struct NativeStat {
  double y = 0.0;
  double log_sf = 0.0;
};

class BumModel {
 public:
  static constexpr double kShape = 0.001;

  explicit BumModel(double s, double sigma = 1.0);

  double s() const { return s_; }
  double sigma() const { return sigma_; }
  double eta0() const { return s_; }

 private:
  double s_;
  double sigma_;
};

class HndModel {
 public:
  static constexpr double kMinS = 1e-4;

  explicit HndModel(double s, double sigma = 1.0);

  double s() const { return s_; }
  double sigma() const { return sigma_; }
  double eta0() const { return eta0_; }

 private:
  double s_;
  double sigma_;
  double eta0_;
};

using ThresholdModel = std::variant<BumModel, HndModel>;

ThresholdModel make_model(ModelKind kind, double s, double sigma);
ModelKind kind_of(const ThresholdModel& model);
double s_of(const ThresholdModel& model);
double sigma_of(const ThresholdModel& model);
double eta0_of(const ThresholdModel& model);

/// Densities and distribution functions at one native y.
struct Densities {
  double f0 = 0.0;
  double fa = 0.0;
  double f = 0.0;
  double F0 = 0.0;
  double Fa = 0.0;
  double F = 0.0;
};

struct StatisticBatch {
  std::vector<double> values;
  StatisticScale scale = StatisticScale::ZScore;
};

struct FdrRow {
  double raw = 0.0;
  double y = 0.0;
  double fdr = 1.0;
  double Fdr = 1.0;

  friend bool operator==(const FdrRow&, const FdrRow&) = default;
};

/// Per-observation results in input order. fdr and Fdr lie in [0, 1], are
/// non-increasing in y, and Fdr <= fdr row by row.
struct FdrTable {
  std::vector<FdrRow> rows;

  friend bool operator==(const FdrTable&, const FdrTable&) = default;
};

/// Snap values within 1e-9 outside [0, 1] onto the interval; anything
/// further out (or NaN) throws ConsistencyError.
double clamp_probability(double value, const char* what);

// ---------------------------------------------------------------------------
// Scale transformations

/// Two-sided p-values map to y = 1 - p (BUM) or y = Phi^-1(1 - p/2) (HND).
/// z-scores are folded and scaled, |z| / sigma, then mapped through the null
/// distribution for BUM (y = 2 Phi(|z|/sigma) - 1). Native y is range
/// checked and passed through.
NativeStat to_native(double x, StatisticScale scale, const ThresholdModel& model);
double to_native_y(double x, StatisticScale scale, const ThresholdModel& model);

NativeStat bum_native(double y);
NativeStat hnd_native(double y);

// ---------------------------------------------------------------------------
// BUM

double bum_local_fdr(const BumModel& model, double y);
double bum_tail_fdr(const BumModel& model, double y);
Densities bum_densities(const BumModel& model, double y);

// ---------------------------------------------------------------------------
// HND

double hnd_local_fdr(const HndModel& model, double y);
double hnd_tail_fdr(const HndModel& model, double y);
Densities hnd_densities(const HndModel& model, double y);

/// eta0 = 1 / (2 Phi(s) - 1 + sqrt(2/pi) exp(-s^2/2) / s).
double hnd_eta0_from_s(double s);

/// Inverse of hnd_eta0_from_s by Brent's method over [kMinS, 50]. Throws
/// DomainError naming the attainable range when eta0 is outside it.
double hnd_s_from_eta0(double eta0);

/// Smallest attainable eta0, i.e. hnd_eta0_from_s(HndModel::kMinS).
double hnd_min_eta0();

// ---------------------------------------------------------------------------
// Generic evaluation on NativeStat

double local_fdr(const ThresholdModel& model, const NativeStat& stat);
double tail_fdr(const ThresholdModel& model, const NativeStat& stat);

/// log fdr computed analytically, never as log(exp(...)).
double log_local_fdr(const ThresholdModel& model, const NativeStat& stat);

Densities densities(const ThresholdModel& model, const NativeStat& stat);

/// Convert every statistic to native y and evaluate fdr and Fdr. Domain
/// errors are rethrown as RowDomainError carrying the row index.
FdrTable score_batch(const ThresholdModel& model, const StatisticBatch& batch);

}  // namespace sigfdr
