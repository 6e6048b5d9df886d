#include "eqte/cdf_rdd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace eqte {

namespace {

constexpr double kJumpFloor = 1e-10;

bool on_side(double r, Side side, double h) {
  const double s = side == Side::above ? r : -r;
  return s > 0.0 && s <= h;
}

}  // namespace

KernelSpec::KernelSpec(double h) : bandwidth(h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw Error(Errc::invalid_argument, "bandwidth must be positive and finite");
  }
}

double rot_bandwidth(std::span<const double> r) {
  const std::size_t n = r.size();
  if (n < 2) throw Error(Errc::invalid_argument, "bandwidth rule needs at least two records");
  const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
  if (*lo == *hi) throw Error(Errc::zero_variance, "running variable is constant");
  const double mean = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : r) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) throw Error(Errc::zero_variance, "running variable is constant");
  return sd * std::pow(static_cast<double>(n), -0.2);
}

double one_sided_nw(std::span<const double> r, std::span<const double> g, Side side, double h) {
  if (r.size() != g.size()) throw Error(Errc::invalid_argument, "r and g differ in length");
  const KernelSpec kernel(h);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!on_side(r[i], side, h)) continue;
    const double w = kernel.weight(r[i]);
    num += w * g[i];
    den += w;
  }
  if (!(den > 0.0)) {
    throw Error(Errc::empty_window, std::string("no kernel mass ") +
                                        (side == Side::above ? "above" : "below") +
                                        " the cutoff");
  }
  return num / den;
}

RddCdfPair rdd_cdf(const ObservationSet& data, double h) {
  if (data.design() != Design::rdd) {
    throw Error(Errc::invalid_argument, "rdd_cdf needs an RDD sample");
  }
  const KernelSpec kernel(h);
  const auto y = data.y();
  const auto d = data.d();
  const auto r = data.r();

  // Records inside the two-sided window, sorted by outcome.
  std::vector<std::size_t> window;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (std::abs(r[i]) <= h) window.push_back(i);
  }
  std::stable_sort(window.begin(), window.end(),
                   [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });

  double mass_above = 0.0;
  double mass_below = 0.0;
  for (std::size_t i : window) {
    if (on_side(r[i], Side::above, h)) mass_above += kernel.weight(r[i]);
    if (on_side(r[i], Side::below, h)) mass_below += kernel.weight(r[i]);
  }
  if (!(mass_above > 0.0)) throw Error(Errc::empty_window, "no kernel mass above the cutoff");
  if (!(mass_below > 0.0)) throw Error(Errc::empty_window, "no kernel mass below the cutoff");

  // Running kernel sums of D * 1{Y <= y} and (1 - D) * 1{Y <= y} per side.
  std::vector<double> knots;
  std::vector<double> num1;
  std::vector<double> num0;
  double a1 = 0.0, b1 = 0.0, a0 = 0.0, b0 = 0.0;
  for (std::size_t pos = 0; pos < window.size(); ++pos) {
    const std::size_t i = window[pos];
    const double w = kernel.weight(r[i]);
    if (on_side(r[i], Side::above, h)) {
      (d[i] == 1 ? a1 : a0) += w;
    } else if (on_side(r[i], Side::below, h)) {
      (d[i] == 1 ? b1 : b0) += w;
    }
    if (pos + 1 < window.size() && y[window[pos + 1]] == y[i]) continue;
    knots.push_back(y[i]);
    num1.push_back(a1 / mass_above - b1 / mass_below);
    num0.push_back(a0 / mass_above - b0 / mass_below);
  }

  // The totals of the running sums are the first-stage limits, so each
  // estimate reaches exactly 1 above the largest windowed outcome.
  const double denom1 = a1 / mass_above - b1 / mass_below;
  const double denom0 = a0 / mass_above - b0 / mass_below;
  if (!(std::abs(denom1) >= kJumpFloor) || !(std::abs(denom0) >= kJumpFloor)) {
    throw Error(Errc::degenerate_denominator,
                "first-stage jump " + std::to_string(denom1) + " is numerically zero");
  }
  for (double& v : num1) v /= denom1;
  for (double& v : num0) v /= denom0;

  RddCdfPair out;
  out.beta0 = StepCdf(knots, std::move(num0), data.flipped());
  out.beta1 = StepCdf(std::move(knots), std::move(num1), data.flipped());
  out.denom0 = denom0;
  out.denom1 = denom1;
  out.bandwidth = h;
  out.cutoff = 0.0;
  return out;
}

}  // namespace eqte
