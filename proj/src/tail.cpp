#include "eqte/tail.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/tanh_sinh.hpp>

namespace eqte {

namespace {

void require_omega(double omega) {
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw Error(Errc::invalid_argument, "weight exponent omega must be positive");
  }
}

void require_positive_threshold(double y_min) {
  if (!(y_min > 0.0) || !std::isfinite(y_min)) {
    throw Error(Errc::invalid_argument,
                "tail threshold must be positive (got " + std::to_string(y_min) +
                    "); shift outcomes first");
  }
}

// int_lo^hi u^(-omega-1) du for 1 <= lo < hi <= inf.
double segment_weight(double omega, double lo, double hi) {
  const double head = std::pow(lo, -omega) / omega;
  if (std::isinf(hi)) return head;
  return head * -std::expm1(-omega * std::log(hi / lo));
}

// Past this many e-foldings of the weight the analytic integrands are dropped;
// the neglected mass is below 1e-24 of the total.
constexpr double kWeightCutoff = 60.0;

}  // namespace

double select_ymin(const StepCdf& cdf, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(Errc::invalid_argument, "threshold level must lie in (0,1)");
  }
  return left_inverse(monotone_rearrange(cdf), level);
}

double weight_log_integral(double omega, double ratio) {
  require_omega(omega);
  if (!(ratio >= 1.0)) throw Error(Errc::invalid_argument, "upper limit below threshold");
  const double w2 = omega * omega;
  if (std::isinf(ratio)) return 1.0 / w2;
  const double x = omega * std::log(ratio);
  return (-std::expm1(-x) - x * std::exp(-x)) / w2;
}

TailFit pareto_index(const StepCdf& cdf, double y_min, double omega) {
  require_omega(omega);
  require_positive_threshold(y_min);
  const auto knots = cdf.knots();
  const auto values = cdf.values();
  const std::size_t m = knots.size();
  if (m == 0 || !(knots.back() > y_min)) {
    throw Error(Errc::empty_tail, "no knots beyond the threshold");
  }
  const double s_min = 1.0 - cdf(y_min);
  if (!(s_min > 0.0)) {
    throw Error(Errc::non_positive_survival,
                "estimated survival at the threshold is " + std::to_string(s_min));
  }

  // Walk the constant segments (lo, hi] to the right of y_min in units of
  // u = y / y_min, up to the first non-positive survival or the last knot.
  std::size_t next = static_cast<std::size_t>(
      std::upper_bound(knots.begin(), knots.end(), y_min) - knots.begin());
  double value = next == 0 ? 0.0 : values[next - 1];
  double lo = 1.0;
  double numerator = 0.0;
  while (next < m) {
    const double survival = 1.0 - value;
    if (!(survival > 0.0)) break;
    const double hi = knots[next] / y_min;
    numerator += std::log(survival / s_min) * segment_weight(omega, lo, hi);
    lo = hi;
    value = values[next];
    ++next;
  }
  const double truncation = lo * y_min;
  if (!(lo > 1.0)) {
    throw Error(Errc::empty_tail, "estimated survival vanishes right above the threshold");
  }

  const double denominator = weight_log_integral(omega, lo);
  TailFit fit;
  fit.y_min = y_min;
  fit.omega = omega;
  fit.alpha_hat = -numerator / denominator;
  fit.s_min = s_min;
  fit.c_hat = s_min * std::pow(y_min, fit.alpha_hat);
  fit.truncation = truncation;
  fit.flipped = cdf.flipped();
  return fit;
}

TailFit pareto_index(const std::function<double(double)>& survival, double y_min,
                     double omega) {
  require_omega(omega);
  require_positive_threshold(y_min);
  const double s_min = survival(y_min);
  if (!(s_min > 0.0)) {
    throw Error(Errc::non_positive_survival, "survival at the threshold is not positive");
  }
  // Substituting y = y_min * exp(t) turns the weight into exp(-omega t) dt.
  const double t_max = kWeightCutoff / omega;
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double numerator = integrator.integrate(
      [&](double t) {
        const double s = survival(y_min * std::exp(t));
        if (!(s > 0.0)) {
          throw Error(Errc::non_positive_survival, "survival vanishes inside the tail");
        }
        return std::log(s / s_min) * std::exp(-omega * t);
      },
      0.0, t_max);
  const double denominator =
      integrator.integrate([&](double t) { return t * std::exp(-omega * t); }, 0.0, t_max);

  TailFit fit;
  fit.y_min = y_min;
  fit.omega = omega;
  fit.alpha_hat = -numerator / denominator;
  fit.s_min = s_min;
  fit.c_hat = s_min * std::pow(y_min, fit.alpha_hat);
  return fit;
}

double threshold_shift(double y_min0, double y_min1) {
  const double lowest = std::min(y_min0, y_min1);
  return lowest > 0.0 ? 0.0 : 1.0 - lowest;
}

TailFit fit_tail(const StepCdf& cdf, double y_min, double omega, double shift) {
  TailFit fit = shift == 0.0 ? pareto_index(cdf, y_min, omega)
                             : pareto_index(cdf.shifted(shift), y_min + shift, omega);
  fit.shift = shift;
  return fit;
}

double extreme_quantile(const TailFit& fit, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(Errc::invalid_argument, "quantile level must lie in (0,1)");
  }
  if (!fit.valid()) {
    throw Error(Errc::invalid_alpha,
                "tail index estimate " + std::to_string(fit.alpha_hat) + " is not positive");
  }
  const double tail_prob = 1.0 - level;
  if (!(tail_prob < fit.s_min)) {
    throw Error(Errc::not_beyond_threshold,
                "tail probability " + std::to_string(tail_prob) +
                    " is not beyond the threshold survival " + std::to_string(fit.s_min));
  }
  return fit.y_min * std::pow(fit.s_min / tail_prob, 1.0 / fit.alpha_hat) - fit.shift;
}

double qte_point(const TailFit& fit1, const TailFit& fit0, double level) {
  if (fit1.flipped != fit0.flipped) {
    throw Error(Errc::invalid_argument, "arms were fitted on differently oriented outcomes");
  }
  if (!fit1.flipped) return extreme_quantile(fit1, level) - extreme_quantile(fit0, level);
  const double upper = 1.0 - level;
  return -(extreme_quantile(fit1, upper) - extreme_quantile(fit0, upper));
}

}  // namespace eqte
