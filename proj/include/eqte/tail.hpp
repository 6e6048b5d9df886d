#ifndef EQTE_TAIL_HPP
#define EQTE_TAIL_HPP

#include <functional>
#include <limits>

#include "eqte/core.hpp"

namespace eqte {

inline constexpr double kDefaultOmega = 1.0;
inline constexpr double kDefaultThresholdLevel = 0.975;

// Pareto approximation of the upper tail of an estimated CDF above y_min:
//
//   1 - F(y) ~= s_min * (y / y_min)^(-alpha_hat) = c_hat * y^(-alpha_hat).
//
// All quantities live on the fitted scale, i.e. after outcomes were moved by
// `shift` (see threshold_shift). Quantiles are reported back on the data scale.
struct TailFit {
  double y_min = 0.0;
  double omega = kDefaultOmega;
  double alpha_hat = 0.0;
  double c_hat = 0.0;
  double s_min = 0.0;
  double truncation = std::numeric_limits<double>::infinity();
  bool flipped = false;
  double shift = 0.0;

  // alpha_hat <= 0 is reported, not thrown; such a fit cannot extrapolate.
  bool valid() const noexcept { return alpha_hat > 0.0; }
  double threshold() const noexcept { return y_min - shift; }
};

// Left inverse of the monotone rearrangement of `cdf` at `level`.
double select_ymin(const StepCdf& cdf, double level = kDefaultThresholdLevel);

// Integral of log(y / y_min) * w(y) over [y_min, T] with
// w(y) = y^(-omega - 1) / y_min^(-omega); `ratio` is T / y_min and may be
// infinite, in which case the value is 1 / omega^2.
double weight_log_integral(double omega, double ratio);

// Weighted-integral tail-index estimator
//
//   alpha_hat = - int log((1 - F(y)) / (1 - F(y_min))) w(y) dy
//               / int log(y / y_min) w(y) dy
//
// over [y_min, T], T = first point above y_min where 1 - F drops to zero or
// below, capped at the last knot. Both integrals are exact sums over the
// constant segments of the step function. Requires y_min > 0.
TailFit pareto_index(const StepCdf& cdf, double y_min, double omega = kDefaultOmega);

// Same estimator for an analytic survival function, integrated to infinity by
// quadrature. `survival` must be strictly positive on [y_min, inf).
TailFit pareto_index(const std::function<double(double)>& survival, double y_min,
                     double omega = kDefaultOmega);

// Shift that moves the smaller threshold to 1 when either threshold is <= 0,
// else 0. Applying a common shift to both arms keeps quantile differences
// comparable.
double threshold_shift(double y_min0, double y_min1);

// pareto_index on cdf.shifted(shift) at y_min + shift, recording the shift.
TailFit fit_tail(const StepCdf& cdf, double y_min, double omega, double shift);

// y_min * (s_min / (1 - level))^(1 / alpha_hat) on the data scale of the fit
// (still negated if the fit is flipped). Requires 1 - level < s_min.
double extreme_quantile(const TailFit& fit, double level);

// extreme_quantile(fit1, level) - extreme_quantile(fit0, level). When the fits
// were built on negated outcomes, `level` is the lower-tail level q of the
// original outcome and the result is -(Q1(1 - q) - Q0(1 - q)).
double qte_point(const TailFit& fit1, const TailFit& fit0, double level);

}  // namespace eqte

#endif  // EQTE_TAIL_HPP
