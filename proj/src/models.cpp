#include "sigfdr/models.hpp"

#include <cmath>

namespace sigfdr {

namespace {

constexpr double kLog2 = 0.69314718055994530941723212145817657;
constexpr double kHalfLogPiOver2 = 0.22579135264472743236309761494744107;

double logaddexp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  if (a == kInf || b == kInf) return kInf;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

// log(2 * (1 - Phi(y))), the upper tail of the standard half-normal.
double log_half_normal_sf(double y) {
  if (y == kInf) return -kInf;
  if (y < 35.0) return std::log(std::erfc(y / kSqrt2));
  return kLog2 + log_norm_sf(y);
}

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw DomainError("sigma must be positive and finite");
  }
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::Bum ? "bum" : "hnd";
}

std::string_view to_string(StatisticScale scale) {
  switch (scale) {
    case StatisticScale::PValue:
      return "p";
    case StatisticScale::ZScore:
      return "z";
    case StatisticScale::NativeY:
      return "y";
  }
  return "?";
}

BumModel::BumModel(double s, double sigma) : s_(s), sigma_(sigma) {
  if (!(s > 0.0 && s <= 1.0)) {
    throw DomainError("BUM parameter s must lie in (0, 1]");
  }
  check_sigma(sigma);
}

HndModel::HndModel(double s, double sigma) : s_(s), sigma_(sigma) {
  if (!(s >= kMinS) || !std::isfinite(s)) {
    throw DomainError("HND parameter s must be finite and >= 1e-4");
  }
  check_sigma(sigma);
  eta0_ = hnd_eta0_from_s(s);
}

ThresholdModel make_model(ModelKind kind, double s, double sigma) {
  if (kind == ModelKind::Bum) return BumModel(s, sigma);
  return HndModel(s, sigma);
}

ModelKind kind_of(const ThresholdModel& model) {
  return std::holds_alternative<BumModel>(model) ? ModelKind::Bum
                                                 : ModelKind::Hnd;
}

double s_of(const ThresholdModel& model) {
  return std::visit([](const auto& m) { return m.s(); }, model);
}

double sigma_of(const ThresholdModel& model) {
  return std::visit([](const auto& m) { return m.sigma(); }, model);
}

double eta0_of(const ThresholdModel& model) {
  return std::visit([](const auto& m) { return m.eta0(); }, model);
}

double clamp_probability(double value, const char* what) {
  constexpr double kSlack = 1e-9;
  if (value >= 0.0 && value <= 1.0) return value;
  if (value >= -kSlack && value < 0.0) return 0.0;
  if (value > 1.0 && value <= 1.0 + kSlack) return 1.0;
  throw ConsistencyError(std::string(what) + " = " + std::to_string(value) +
                         " is not a probability");
}

// ---------------------------------------------------------------------------

NativeStat bum_native(double y) {
  if (!(y >= 0.0 && y <= 1.0)) {
    throw DomainError("BUM statistic y must lie in [0, 1]");
  }
  return {y, std::log1p(-y)};
}

NativeStat hnd_native(double y) {
  if (!(y >= 0.0)) throw DomainError("HND statistic y must be >= 0");
  return {y, log_half_normal_sf(y)};
}

NativeStat to_native(double x, StatisticScale scale,
                     const ThresholdModel& model) {
  const bool bum = kind_of(model) == ModelKind::Bum;
  switch (scale) {
    case StatisticScale::PValue: {
      if (!(x >= 0.0 && x <= 1.0)) {
        throw DomainError("p-value must lie in [0, 1]");
      }
      const double log_p = std::log(x);
      if (bum) return {1.0 - x, log_p};
      if (x == 0.0) return {kInf, -kInf};
      if (x == 1.0) return {0.0, 0.0};
      return {norm_isf(0.5 * x), log_p};
    }
    case StatisticScale::ZScore: {
      if (!std::isfinite(x)) throw DomainError("z-score must be finite");
      const double u = std::abs(x) / sigma_of(model);
      const double log_sf = log_half_normal_sf(u);
      if (bum) return {std::erf(u / kSqrt2), log_sf};
      return {u, log_sf};
    }
    case StatisticScale::NativeY:
      return bum ? bum_native(x) : hnd_native(x);
  }
  throw DomainError("unknown statistic scale");
}

double to_native_y(double x, StatisticScale scale, const ThresholdModel& model) {
  return to_native(x, scale, model).y;
}

// ---------------------------------------------------------------------------
// BUM

namespace {

constexpr double kA = BumModel::kShape;

double bum_fdr_native(const BumModel& m, const NativeStat& t) {
  const double s = m.s();
  if (s == 1.0) return 1.0;
  const double tail = std::exp((kA - 1.0) * t.log_sf);  // (1-y)^(a-1)
  return clamp_probability(s / (s + kA * (1.0 - s) * tail), "BUM fdr");
}

double bum_Fdr_native(const BumModel& m, const NativeStat& t) {
  const double s = m.s();
  if (s == 1.0) return 1.0;
  // s / (s + (1-s)(1-y)^(a-1)) with the y = 0 case exact
  const double excess = std::expm1((kA - 1.0) * t.log_sf);
  return clamp_probability(s / (1.0 + (1.0 - s) * excess), "BUM Fdr");
}

double bum_log_fdr_native(const BumModel& m, const NativeStat& t) {
  const double s = m.s();
  if (s == 1.0) return 0.0;
  const double log_s = std::log(s);
  const double log_alt = std::log(kA * (1.0 - s)) + (kA - 1.0) * t.log_sf;
  return log_s - logaddexp(log_s, log_alt);
}

Densities bum_densities_native(const BumModel& m, const NativeStat& t) {
  const double eta0 = m.eta0();
  const double tail = std::exp((kA - 1.0) * t.log_sf);
  Densities d;
  d.f0 = 1.0;
  d.F0 = t.y;
  d.fa = kA * tail;
  d.Fa = -std::expm1(kA * t.log_sf);
  d.f = eta0 + (1.0 - eta0) * d.fa;
  d.F = eta0 * t.y + (1.0 - eta0) * d.Fa;
  return d;
}

}  // namespace

double bum_local_fdr(const BumModel& model, double y) {
  return bum_fdr_native(model, bum_native(y));
}

double bum_tail_fdr(const BumModel& model, double y) {
  return bum_Fdr_native(model, bum_native(y));
}

Densities bum_densities(const BumModel& model, double y) {
  return bum_densities_native(model, bum_native(y));
}

// ---------------------------------------------------------------------------
// HND

double hnd_eta0_from_s(double s) {
  if (!(s >= HndModel::kMinS)) {
    throw DomainError("HND parameter s must be >= 1e-4");
  }
  const double inv = std::erf(s / kSqrt2) +
                     kSqrt2OverPi * std::exp(-0.5 * s * s - std::log(s));
  return 1.0 / inv;
}

double hnd_min_eta0() { return hnd_eta0_from_s(HndModel::kMinS); }

double hnd_s_from_eta0(double eta0) {
  constexpr double kMaxS = 50.0;
  const double lo = hnd_min_eta0();
  if (!(eta0 > lo && eta0 < 1.0) || !(eta0 < hnd_eta0_from_s(kMaxS))) {
    throw DomainError("HND eta0 must lie in the attainable range (" +
                      std::to_string(lo) + ", 1); got " +
                      std::to_string(eta0));
  }
  return brent_root([eta0](double s) { return hnd_eta0_from_s(s) - eta0; },
                    HndModel::kMinS, kMaxS);
}

namespace {

double hnd_fdr_native(const HndModel& m, const NativeStat& t) {
  if (t.y <= m.s()) return 1.0;
  const double d = t.y - m.s();
  return std::exp(-0.5 * d * d);
}

double hnd_log_fdr_native(const HndModel& m, const NativeStat& t) {
  if (t.y <= m.s()) return 0.0;
  const double d = t.y - m.s();
  return -0.5 * d * d;
}

double hnd_Fdr_native(const HndModel& m, const NativeStat& t) {
  if (t.y == kInf) return 0.0;
  const double s = m.s();
  const double eta0 = m.eta0();
  if (t.y <= s) {
    const double sf = std::exp(t.log_sf);
    return clamp_probability(eta0 * sf / (1.0 - eta0 * (1.0 - sf)), "HND Fdr");
  }
  // 1 - F(y) = eta0 sqrt(2/pi) exp(s^2/2 - s y) / s above the threshold
  const double log_Fdr =
      t.log_sf + std::log(s) + kHalfLogPiOver2 + s * t.y - 0.5 * s * s;
  return clamp_probability(std::exp(log_Fdr), "HND Fdr");
}

Densities hnd_densities_native(const HndModel& m, const NativeStat& t) {
  const double s = m.s();
  const double eta0 = m.eta0();
  const double y = t.y;
  Densities d;
  d.f0 = kSqrt2OverPi * std::exp(-0.5 * y * y);
  d.F0 = std::erf(y / kSqrt2);
  if (y <= s) {
    d.f = eta0 * d.f0;
    d.fa = 0.0;
    d.F = eta0 * d.F0;
  } else {
    const double decay = kSqrt2OverPi * std::exp(0.5 * s * s - y * s);
    d.f = eta0 * decay;
    d.fa = eta0 / (1.0 - eta0) * (decay - d.f0);
    // exp(s^2/2) (exp(-s^2) - exp(-s y)), rearranged to avoid overflow
    const double upper =
        kSqrt2OverPi / s * (std::exp(-0.5 * s * s) - std::exp(0.5 * s * s - s * y));
    d.F = eta0 * (std::erf(s / kSqrt2) + upper);
  }
  d.Fa = eta0 < 1.0 ? (d.F - eta0 * d.F0) / (1.0 - eta0) : 0.0;
  return d;
}

}  // namespace

double hnd_local_fdr(const HndModel& model, double y) {
  return hnd_fdr_native(model, hnd_native(y));
}

double hnd_tail_fdr(const HndModel& model, double y) {
  return hnd_Fdr_native(model, hnd_native(y));
}

Densities hnd_densities(const HndModel& model, double y) {
  return hnd_densities_native(model, hnd_native(y));
}

// ---------------------------------------------------------------------------

double local_fdr(const ThresholdModel& model, const NativeStat& stat) {
  if (const auto* bum = std::get_if<BumModel>(&model)) {
    return bum_fdr_native(*bum, stat);
  }
  return hnd_fdr_native(std::get<HndModel>(model), stat);
}

double tail_fdr(const ThresholdModel& model, const NativeStat& stat) {
  if (const auto* bum = std::get_if<BumModel>(&model)) {
    return bum_Fdr_native(*bum, stat);
  }
  return hnd_Fdr_native(std::get<HndModel>(model), stat);
}

double log_local_fdr(const ThresholdModel& model, const NativeStat& stat) {
  if (const auto* bum = std::get_if<BumModel>(&model)) {
    return bum_log_fdr_native(*bum, stat);
  }
  return hnd_log_fdr_native(std::get<HndModel>(model), stat);
}

Densities densities(const ThresholdModel& model, const NativeStat& stat) {
  if (const auto* bum = std::get_if<BumModel>(&model)) {
    return bum_densities_native(*bum, stat);
  }
  return hnd_densities_native(std::get<HndModel>(model), stat);
}

FdrTable score_batch(const ThresholdModel& model, const StatisticBatch& batch) {
  if (batch.values.empty()) throw DomainError("score_batch: empty batch");
  FdrTable table;
  table.rows.reserve(batch.values.size());
  for (std::size_t i = 0; i < batch.values.size(); ++i) {
    const double x = batch.values[i];
    try {
      const NativeStat stat = to_native(x, batch.scale, model);
      table.rows.push_back(
          {x, stat.y, local_fdr(model, stat), tail_fdr(model, stat)});
    } catch (const DomainError& e) {
      throw RowDomainError(i, e.what());
    }
  }
  return table;
}

}  // namespace sigfdr
