// Special functions, quadrature, root finding and simplex minimization.
//
// Everything here is deterministic and free of shared state.

#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sigfdr {

/// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Root bracket without a sign change.
class BracketError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative routine ran out of budget. Carries the best estimate so far.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double best_estimate)
      : std::runtime_error(what), best_estimate_(best_estimate) {}
  double best_estimate() const noexcept { return best_estimate_; }

 private:
  double best_estimate_;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kSqrt2 = 1.41421356237309504880168872420969808;
inline constexpr double kSqrt2OverPi = 0.79788456080286535587989211986876373;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640561764;

// ---------------------------------------------------------------------------
// Normal distribution

/// Standard normal density.
double norm_pdf(double x);

/// Standard normal distribution function, via erfc. Throws DomainError for
/// non-finite x.
double norm_cdf(double x);

/// Upper tail 1 - Phi(x) without cancellation.
double norm_sf(double x);

/// log(1 - Phi(x)), finite for every finite x (asymptotic series beyond the
/// underflow point of erfc).
double log_norm_sf(double x);

/// Inverse of norm_cdf. Rational initial guess refined by Halley steps.
/// Throws DomainError unless 0 < p < 1.
double norm_quantile(double p);

/// Upper-tail quantile: x with norm_sf(x) = q. Accurate for tiny q.
double norm_isf(double q);

// ---------------------------------------------------------------------------
// Quadrature

struct QuadratureSpec {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_depth = 50;

  void validate() const;
};

/// Adaptive 7/15-point Gauss-Kronrod quadrature of f over [lo, hi].
///
/// hi may be +infinity; the half line is mapped onto [0, 1) with
/// y = lo + t / (1 - t). Panels are bisected until the Kronrod/Gauss
/// difference is below the panel's share of max(abs_tol, rel_tol * |I|).
/// Throws ConvergenceError (carrying the best estimate) when a panel would
/// need to be split beyond max_depth.
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 const QuadratureSpec& spec = {});

// ---------------------------------------------------------------------------
// Root finding

/// Brent's method on [lo, hi]. Requires f(lo) * f(hi) <= 0 (BracketError
/// otherwise). The returned point always lies inside the initial bracket.
double brent_root(const std::function<double(double)>& f, double lo, double hi,
                  double x_tol = 1e-12, int max_iter = 500);

// ---------------------------------------------------------------------------
// Nelder-Mead

struct OptimizerSpec {
  double x_tol = 1e-8;
  double f_tol = 1e-10;
  int max_iter = 2000;
  int restarts = 4;
  double initial_step = 0.1;

  void validate() const;
};

struct OptimizeResult {
  std::vector<double> x;
  double value = kInf;
  bool converged = false;
  int iterations = 0;
};

/// Nelder-Mead simplex minimization with restarts.
///
/// After each run the simplex is rebuilt around the best point with the
/// initial step size; `restarts` such re-initializations are made. A run
/// counts as converged when the simplex diameter is below x_tol and the
/// spread of vertex values is below f_tol * max(1, |f_best|). max_iter
/// bounds the iterations of each run. Non-finite objective values are
/// treated as +infinity.
OptimizeResult nelder_mead(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x0, const OptimizerSpec& spec = {});

}  // namespace sigfdr
