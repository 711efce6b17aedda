#include "sigfdr/fitting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace sigfdr {

std::string_view to_string(FitMode mode) {
  return mode == FitMode::Plugin ? "plugin" : "mle";
}

Interval FitOptions::s_bounds_for(ModelKind kind) const {
  if (s_bounds) return *s_bounds;
  if (kind == ModelKind::Bum) return {1e-6, 1.0};
  return {HndModel::kMinS, 50.0};
}

void FitOptions::validate(ModelKind kind) const {
  const Interval s = s_bounds_for(kind);
  if (!(sigma_bounds.lo > 0.0 && sigma_bounds.lo < sigma_bounds.hi)) {
    throw InputError("sigma bounds must be positive and ordered");
  }
  if (!(s.lo > 0.0 && s.lo < s.hi)) {
    throw InputError("s bounds must be positive and ordered");
  }
  if (kind == ModelKind::Bum && s.hi > 1.0) {
    throw InputError("BUM s bounds must lie within (0, 1]");
  }
  if (kind == ModelKind::Hnd && s.lo < HndModel::kMinS) {
    throw InputError("HND s bounds must start at or above 1e-4");
  }
  if (grid_points < 2) throw InputError("grid_points must be >= 2");
  optimizer.validate();
}

ThresholdModel FitResult::model() const {
  return make_model(model_kind, s_hat, sigma_hat);
}

namespace {

void require_z_scores(const StatisticBatch& batch) {
  if (batch.scale != StatisticScale::ZScore) {
    throw InputError("likelihood is defined on z-scores");
  }
  for (std::size_t i = 0; i < batch.values.size(); ++i) {
    if (!std::isfinite(batch.values[i])) {
      throw RowDomainError(i, "z-score must be finite");
    }
  }
}

// Likelihood over one fixed batch; caches |z| and sum z^2.
class Likelihood {
 public:
  Likelihood(ModelKind kind, const StatisticBatch& batch) : kind_(kind) {
    require_z_scores(batch);
    abs_z_.reserve(batch.values.size());
    for (double z : batch.values) {
      abs_z_.push_back(std::abs(z));
      sum_sq_ += z * z;
    }
  }

  double operator()(double s, double sigma) const {
    const ThresholdModel model = make_model(kind_, s, sigma);
    const double n = static_cast<double>(abs_z_.size());
    double ll = n * (std::log(eta0_of(model)) - std::log(sigma) - kLogSqrt2Pi) -
                0.5 * sum_sq_ / (sigma * sigma);
    double log_fdr_sum = 0.0;
    if (kind_ == ModelKind::Hnd) {
      for (double z : abs_z_) {
        const double d = z / sigma - s;
        if (d > 0.0) log_fdr_sum -= 0.5 * d * d;
      }
    } else {
      for (double z : abs_z_) {
        const NativeStat stat = to_native(z, StatisticScale::ZScore, model);
        log_fdr_sum += log_local_fdr(model, stat);
      }
    }
    return ll - log_fdr_sum;
  }

 private:
  ModelKind kind_;
  std::vector<double> abs_z_;
  double sum_sq_ = 0.0;
};

double logit(double p) { return std::log(p / (1.0 - p)); }
double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Unconstrained coordinates for s.
struct SCoordinate {
  ModelKind kind;
  Interval bounds;

  double to_theta(double s) const {
    constexpr double kNudge = 1e-6;
    if (kind == ModelKind::Bum) {
      return logit(std::clamp(s, kNudge, 1.0 - kNudge));
    }
    return std::log(std::max(s - HndModel::kMinS, kNudge));
  }

  double from_theta(double theta) const {
    const double s = kind == ModelKind::Bum ? logistic(theta)
                                            : HndModel::kMinS + std::exp(theta);
    return std::clamp(s, bounds.lo, bounds.hi);
  }
};

double snap(double value, const Interval& bounds, bool& flagged) {
  constexpr double kBoundaryTol = 1e-6;
  if (value - bounds.lo <= kBoundaryTol) {
    flagged = true;
    return bounds.lo;
  }
  if (bounds.hi - value <= kBoundaryTol) {
    flagged = true;
    return bounds.hi;
  }
  return value;
}

// s values for the start grid: evenly spaced eta0 levels mapped to s, plus
// the upper bound itself.
std::vector<double> s_grid(ModelKind kind, const Interval& bounds, int n) {
  std::vector<double> grid;
  const double eta_lo =
      kind == ModelKind::Bum ? bounds.lo : hnd_eta0_from_s(bounds.lo);
  const double eta_hi =
      kind == ModelKind::Bum ? bounds.hi : hnd_eta0_from_s(bounds.hi);
  for (int i = 0; i < n - 1; ++i) {
    const double eta = eta_lo + (eta_hi - eta_lo) * (i + 1) / n;
    double s = eta;
    if (kind == ModelKind::Hnd) {
      try {
        s = hnd_s_from_eta0(eta);
      } catch (const DomainError&) {
        continue;
      }
    }
    if (s >= bounds.lo && s <= bounds.hi) grid.push_back(s);
  }
  grid.push_back(bounds.hi);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

std::vector<double> sigma_grid(const Interval& bounds, int n) {
  std::vector<double> grid(n);
  const double log_lo = std::log(bounds.lo);
  const double step = (std::log(bounds.hi) - log_lo) / (n - 1);
  for (int i = 0; i < n; ++i) grid[i] = std::exp(log_lo + step * i);
  grid.front() = bounds.lo;
  grid.back() = bounds.hi;
  return grid;
}

}  // namespace

double log_likelihood(ModelKind kind, double s, double sigma,
                      const StatisticBatch& batch) {
  return Likelihood(kind, batch)(s, sigma);
}

double log_likelihood(const ThresholdModel& model, const StatisticBatch& batch) {
  return log_likelihood(kind_of(model), s_of(model), sigma_of(model), batch);
}

FitOutput plugin_fit(ModelKind kind, double eta0, double sigma,
                     const StatisticBatch& batch) {
  double s = eta0;
  if (kind == ModelKind::Hnd) {
    s = hnd_s_from_eta0(eta0);
  } else if (!(eta0 > 0.0 && eta0 <= 1.0)) {
    throw DomainError("BUM eta0 must lie in (0, 1]");
  }
  const ThresholdModel model = make_model(kind, s, sigma);

  FitOutput out;
  FitResult& r = out.result;
  r.model_kind = kind;
  r.mode = FitMode::Plugin;
  r.s_hat = s;
  r.sigma_hat = sigma;
  r.eta0_hat = eta0_of(model);
  r.converged = true;
  r.n_obs = batch.values.size();
  out.table = score_batch(model, batch);
  if (batch.scale == StatisticScale::ZScore) {
    r.log_likelihood = log_likelihood(model, batch);
  }
  return out;
}

FitOutput mle_fit(ModelKind kind, const StatisticBatch& batch,
                  const FitOptions& opts) {
  opts.validate(kind);
  if (batch.values.size() < 10) {
    throw InputError("maximum likelihood fit needs at least 10 observations");
  }
  const Likelihood likelihood(kind, batch);
  const Interval s_bounds = opts.s_bounds_for(kind);
  const Interval sigma_bounds = opts.sigma_bounds;

  // Coarse grid; ties go to the larger s.
  double best_s = s_bounds.hi;
  double best_sigma = 1.0;
  double best_ll = -kInf;
  for (double s : s_grid(kind, s_bounds, opts.grid_points)) {
    for (double sigma : sigma_grid(sigma_bounds, opts.grid_points)) {
      const double ll = likelihood(s, sigma);
      if (std::isfinite(ll) && ll >= best_ll) {
        best_ll = ll;
        best_s = s;
        best_sigma = sigma;
      }
    }
  }
  if (!std::isfinite(best_ll)) {
    throw InputError("likelihood is not finite anywhere on the start grid");
  }

  const SCoordinate coord{kind, s_bounds};
  auto unpack = [&](std::span<const double> theta) {
    return std::pair{coord.from_theta(theta[0]),
                     std::clamp(std::exp(theta[1]), sigma_bounds.lo,
                                sigma_bounds.hi)};
  };
  auto objective = [&](std::span<const double> theta) {
    const auto [s, sigma] = unpack(theta);
    const double ll = likelihood(s, sigma);
    return std::isfinite(ll) ? -ll : kInf;
  };
  const std::array<double, 2> start = {coord.to_theta(best_s),
                                       std::log(best_sigma)};
  const OptimizeResult opt = nelder_mead(objective, start, opts.optimizer);

  auto [s_hat, sigma_hat] = unpack(opt.x);
  double ll = -opt.value;
  if (!(ll >= best_ll)) {
    // never worse than the grid
    s_hat = best_s;
    sigma_hat = best_sigma;
    ll = best_ll;
  }
  bool at_boundary = false;
  const double s_snapped = snap(s_hat, s_bounds, at_boundary);
  const double sigma_snapped = snap(sigma_hat, sigma_bounds, at_boundary);
  if (s_snapped != s_hat || sigma_snapped != sigma_hat) {
    s_hat = s_snapped;
    sigma_hat = sigma_snapped;
    ll = likelihood(s_hat, sigma_hat);
  }

  FitOutput out;
  FitResult& r = out.result;
  r.model_kind = kind;
  r.mode = FitMode::Mle;
  r.s_hat = s_hat;
  r.sigma_hat = sigma_hat;
  r.eta0_hat = eta0_of(r.model());
  r.log_likelihood = ll;
  r.converged = opt.converged;
  r.at_boundary = at_boundary;
  r.n_obs = batch.values.size();
  r.iterations = opt.iterations;
  out.table = score_batch(r.model(), batch);
  return out;
}

}  // namespace sigfdr
