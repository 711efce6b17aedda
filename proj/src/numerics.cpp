#include "sigfdr/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <queue>

namespace sigfdr {

namespace {

void require_finite(double x, const char* fn) {
  if (!std::isfinite(x)) {
    throw DomainError(std::string(fn) + ": argument must be finite");
  }
}

// Lower-tail quantile for 0 < p <= 0.5. Acklam's rational approximation
// (relative error ~1e-9) polished with two Halley steps against erfc.
double lower_quantile(double p) {
  static constexpr std::array<double, 6> a = {
      -3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b = {
      -5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01};
  static constexpr std::array<double, 6> c = {
      -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d = {
      7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }

  for (int iter = 0; iter < 2; ++iter) {
    const double e = 0.5 * std::erfc(-x / kSqrt2) - p;
    // e / phi(x), written to avoid overflow of exp(x^2/2) in the far tail
    const double u = e * std::exp(0.5 * x * x + kLogSqrt2Pi);
    if (!std::isfinite(u)) break;
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

}  // namespace

double norm_pdf(double x) { return std::exp(-0.5 * x * x - kLogSqrt2Pi); }

double norm_cdf(double x) {
  require_finite(x, "norm_cdf");
  return 0.5 * std::erfc(-x / kSqrt2);
}

double norm_sf(double x) {
  require_finite(x, "norm_sf");
  return 0.5 * std::erfc(x / kSqrt2);
}

double log_norm_sf(double x) {
  require_finite(x, "log_norm_sf");
  if (x < 0.0) return std::log1p(-0.5 * std::erfc(-x / kSqrt2));
  if (x < 35.0) return std::log(0.5 * std::erfc(x / kSqrt2));
  // Mills ratio series; truncation error below 1e-13 for x >= 35
  const double z = 1.0 / (x * x);
  const double series =
      1.0 + z * (-1.0 + z * (3.0 + z * (-15.0 + z * (105.0 - 945.0 * z))));
  return -0.5 * x * x - std::log(x) - kLogSqrt2Pi + std::log(series);
}

double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("norm_quantile: p must lie in (0, 1)");
  }
  if (p <= 0.5) return lower_quantile(p);
  return -lower_quantile(1.0 - p);
}

double norm_isf(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw DomainError("norm_isf: q must lie in (0, 1)");
  }
  if (q <= 0.5) return -lower_quantile(q);
  return lower_quantile(1.0 - q);
}

// ---------------------------------------------------------------------------

void QuadratureSpec::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || max_depth < 1) {
    throw DomainError("QuadratureSpec: tolerances must be > 0, max_depth >= 1");
  }
}

namespace {

// QUADPACK qk15 abscissae and weights.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double lo;
  double hi;
  double value;
  double error;
  int depth;

  bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
Panel gauss_kronrod(const F& f, double lo, double hi, int depth) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * sum;
    if (j % 2 == 1) gauss += kWg[j / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  return {lo, hi, kronrod, std::abs(kronrod - gauss), depth};
}

}  // namespace

double integrate(const std::function<double(double)>& f, double lo, double hi,
                 const QuadratureSpec& spec) {
  spec.validate();
  if (std::isnan(lo) || std::isnan(hi) || std::isinf(lo)) {
    throw DomainError("integrate: lower limit must be finite");
  }
  if (hi == lo) return 0.0;
  if (hi < lo) throw DomainError("integrate: hi < lo");

  std::function<double(double)> g;
  double a = lo;
  double b = hi;
  if (std::isinf(hi)) {
    g = [&f, lo](double t) {
      const double inv = 1.0 / (1.0 - t);
      return f(lo + t * inv) * inv * inv;
    };
    a = 0.0;
    b = 1.0;
  } else {
    g = f;
  }
  auto checked = [&g](double x) {
    const double v = g(x);
    if (!std::isfinite(v)) {
      throw DomainError("integrate: integrand is not finite at a node");
    }
    return v;
  };

  std::priority_queue<Panel> panels;
  const Panel first = gauss_kronrod(checked, a, b, 0);
  double total = first.value;
  double total_error = first.error;
  panels.push(first);

  // Bounded work in addition to the depth limit.
  constexpr std::size_t kMaxPanels = 200000;
  while (true) {
    const double tol = std::max(spec.abs_tol, spec.rel_tol * std::abs(total));
    if (total_error <= tol) break;
    Panel worst = panels.top();
    if (worst.depth >= spec.max_depth || panels.size() >= kMaxPanels) {
      throw ConvergenceError("integrate: maximum subdivision depth reached",
                             total);
    }
    panels.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    const Panel left = gauss_kronrod(checked, worst.lo, mid, worst.depth + 1);
    const Panel right = gauss_kronrod(checked, mid, worst.hi, worst.depth + 1);
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
  }

  // Re-sum to shed the drift accumulated by incremental updates.
  double sum = 0.0;
  while (!panels.empty()) {
    sum += panels.top().value;
    panels.pop();
  }
  return sum;
}

// ---------------------------------------------------------------------------

double brent_root(const std::function<double(double)>& f, double lo, double hi,
                  double x_tol, int max_iter) {
  if (!(lo <= hi)) throw BracketError("brent_root: lo must not exceed hi");
  double a = lo;
  double b = hi;
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (std::isnan(fa) || std::isnan(fb) || (fa > 0.0) == (fb > 0.0)) {
    throw BracketError("brent_root: no sign change over the bracket");
  }

  double c = a;
  double fc = fa;
  double d = b - a;
  double e = d;
  for (int iter = 0; iter < max_iter; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol =
        2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) +
        0.5 * x_tol;
    const double m = 0.5 * (c - b);
    if (std::abs(m) <= tol || std::abs(fb) <= 1e-12) {
      return std::clamp(b, lo, hi);
    }
    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
      // inverse quadratic interpolation, or secant when a == c
      double p;
      double q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) {
        q = -q;
      } else {
        p = -p;
      }
      if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = m;
      }
    } else {
      d = m;
      e = m;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol) ? d : (m > 0.0 ? tol : -tol);
    b = std::clamp(b, lo, hi);
    fb = f(b);
  }
  throw ConvergenceError("brent_root: iteration limit reached", b);
}

// ---------------------------------------------------------------------------

void OptimizerSpec::validate() const {
  if (!(x_tol > 0.0) || !(f_tol > 0.0) || max_iter < 1 || restarts < 0 ||
      !(initial_step > 0.0)) {
    throw DomainError(
        "OptimizerSpec: tolerances and step must be > 0, max_iter >= 1");
  }
}

namespace {

struct Simplex {
  std::vector<std::vector<double>> points;
  std::vector<double> values;

  void sort() {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [this](auto i, auto j) {
      return values[i] < values[j];
    });
    std::vector<std::vector<double>> p2;
    std::vector<double> v2;
    for (auto i : order) {
      p2.push_back(std::move(points[i]));
      v2.push_back(values[i]);
    }
    points = std::move(p2);
    values = std::move(v2);
  }

  double diameter() const {
    double best = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
      for (std::size_t k = 0; k < points[i].size(); ++k) {
        best = std::max(best, std::abs(points[i][k] - points[0][k]));
      }
    }
    return best;
  }
};

struct RunResult {
  std::vector<double> x;
  double value;
  bool converged;
  int iterations;
};

RunResult nelder_mead_run(
    const std::function<double(std::span<const double>)>& eval,
    const std::vector<double>& start, double start_value,
    const OptimizerSpec& spec) {
  constexpr double kReflect = 1.0;
  constexpr double kExpand = 2.0;
  constexpr double kContract = 0.5;
  constexpr double kShrink = 0.5;

  const std::size_t n = start.size();
  Simplex simplex;
  simplex.points.push_back(start);
  simplex.values.push_back(start_value);
  for (std::size_t i = 0; i < n; ++i) {
    auto p = start;
    p[i] += spec.initial_step * std::max(1.0, std::abs(start[i]));
    simplex.values.push_back(eval(p));
    simplex.points.push_back(std::move(p));
  }

  std::vector<double> centroid(n);
  auto along = [&](double coef) {
    std::vector<double> p(n);
    for (std::size_t k = 0; k < n; ++k) {
      p[k] = centroid[k] + coef * (centroid[k] - simplex.points[n][k]);
    }
    return p;
  };

  int iter = 0;
  for (; iter < spec.max_iter; ++iter) {
    simplex.sort();
    const double spread = simplex.values[n] - simplex.values[0];
    const double f_scale = std::max(1.0, std::abs(simplex.values[0]));
    if (simplex.diameter() < spec.x_tol && spread <= spec.f_tol * f_scale) {
      return {simplex.points[0], simplex.values[0], true, iter};
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex.points[i][k];
    }
    for (auto& c : centroid) c /= static_cast<double>(n);

    auto reflected = along(kReflect);
    const double fr = eval(reflected);
    if (fr < simplex.values[0]) {
      auto expanded = along(kExpand);
      const double fe = eval(expanded);
      if (fe < fr) {
        simplex.points[n] = std::move(expanded);
        simplex.values[n] = fe;
      } else {
        simplex.points[n] = std::move(reflected);
        simplex.values[n] = fr;
      }
      continue;
    }
    if (fr < simplex.values[n - 1]) {
      simplex.points[n] = std::move(reflected);
      simplex.values[n] = fr;
      continue;
    }
    const bool outside = fr < simplex.values[n];
    auto contracted = along(outside ? kContract * kReflect : -kContract);
    const double fc = eval(contracted);
    if (fc < (outside ? fr : simplex.values[n])) {
      simplex.points[n] = std::move(contracted);
      simplex.values[n] = fc;
      continue;
    }
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        simplex.points[i][k] = simplex.points[0][k] +
                               kShrink * (simplex.points[i][k] -
                                          simplex.points[0][k]);
      }
      simplex.values[i] = eval(simplex.points[i]);
    }
  }
  simplex.sort();
  return {simplex.points[0], simplex.values[0], false, iter};
}

}  // namespace

OptimizeResult nelder_mead(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x0, const OptimizerSpec& spec) {
  spec.validate();
  if (x0.empty()) throw DomainError("nelder_mead: empty starting point");
  auto eval = [&f](std::span<const double> x) {
    const double v = f(x);
    return std::isnan(v) ? kInf : v;
  };

  std::vector<double> best(x0.begin(), x0.end());
  double best_value = eval(best);
  if (!std::isfinite(best_value)) {
    throw DomainError("nelder_mead: objective is not finite at x0");
  }

  OptimizeResult result;
  for (int run = 0; run <= spec.restarts; ++run) {
    RunResult r = nelder_mead_run(eval, best, best_value, spec);
    result.iterations += r.iterations;
    const double gain = best_value - r.value;
    if (r.value <= best_value) {
      best = std::move(r.x);
      best_value = r.value;
    }
    result.converged = r.converged;
    // a converged restart that no longer moves the optimum ends the search
    if (run > 0 && r.converged &&
        gain <= spec.f_tol * std::max(1.0, std::abs(best_value))) {
      break;
    }
  }
  result.x = std::move(best);
  result.value = best_value;
  return result;
}

}  // namespace sigfdr
