#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "eqte/rng.hpp"
#include "eqte/tail.hpp"

using namespace eqte;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no eqte::Error thrown");
  return Errc::invalid_argument;
}

double gk(auto f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

// 1 - F = 1 on (1, 2], 0.25 on (2, 4], 0 beyond.
StepCdf step_example() { return StepCdf({1.0, 2.0, 4.0}, {0.0, 0.75, 1.0}); }

TailFit make_fit(double y_min, double s_min, double alpha, bool flipped = false) {
  TailFit f;
  f.y_min = y_min;
  f.s_min = s_min;
  f.alpha_hat = alpha;
  f.c_hat = s_min * std::pow(y_min, alpha);
  f.flipped = flipped;
  return f;
}

double bias_term(double d, double omega, double y_min, double rho) {
  return d * omega * omega * std::pow(y_min, -rho) * (1.0 / (rho + omega) - 1.0 / omega);
}

}  // namespace

TEST_CASE("threshold selection") {
  const StepCdf cdf({1.0, 5.0, 9.0}, {0.5, 0.98, 1.0});
  CHECK(select_ymin(cdf) == 5.0);
  std::vector<double> hundred(100);
  for (int i = 0; i < 100; ++i) hundred[static_cast<std::size_t>(i)] = i + 1;
  CHECK(select_ymin(empirical_cdf(hundred), 0.5) == 50.0);
  const StepCdf short_of({1.0, 2.0}, {0.5, 0.95});
  CHECK(code_of([&] { select_ymin(short_of); }) == Errc::quantile_unreachable);
  CHECK(code_of([&] { select_ymin(cdf, 1.0); }) == Errc::invalid_argument);
}

TEST_CASE("step survival example against hand integration and quadrature") {
  const TailFit fit = pareto_index(step_example(), 1.0, 1.0);
  const double num = std::log(0.25) * (0.5 - 0.25);
  const double den = 0.75 - std::log(4.0) / 4.0;
  CHECK(num == doctest::Approx(-0.34657).epsilon(1e-4));
  CHECK(den == doctest::Approx(0.40343).epsilon(1e-4));
  CHECK(fit.alpha_hat == doctest::Approx(0.8591).epsilon(1e-4));
  CHECK(fit.alpha_hat == doctest::Approx(-num / den).epsilon(1e-13));
  CHECK(fit.truncation == 4.0);
  CHECK(fit.s_min == 1.0);

  const auto w = [](double y) { return std::pow(y, -2.0); };
  const double q_num = gk([&](double y) { return std::log(0.25) * w(y); }, 2.0, 4.0);
  const double q_den = gk([&](double y) { return std::log(y) * w(y); }, 1.0, 4.0);
  CHECK(fit.alpha_hat == doctest::Approx(-q_num / q_den).epsilon(1e-12));
}

TEST_CASE("truncation stops at the first vanishing survival or the last knot") {
  // Survival never reaches zero: integrate up to the last knot only.
  const TailFit open = pareto_index(StepCdf({1.0, 2.0, 4.0}, {0.0, 0.5, 0.8}), 1.0, 1.0);
  CHECK(open.truncation == 4.0);
  CHECK(open.alpha_hat ==
        doctest::Approx(-std::log(0.5) * 0.25 / weight_log_integral(1.0, 4.0)).epsilon(1e-13));

  // Survival hits zero after 4; later knots are ignored.
  const TailFit closed =
      pareto_index(StepCdf({1.0, 2.0, 4.0, 8.0, 16.0}, {0.0, 0.5, 1.0, 0.9, 1.0}), 1.0, 1.0);
  CHECK(closed.truncation == 4.0);
  CHECK(closed.alpha_hat == open.alpha_hat);
}

TEST_CASE("tail fit failures") {
  const StepCdf cdf = step_example();
  CHECK(code_of([&] { pareto_index(StepCdf({1.0, 2.0}, {1.0, 1.0}), 1.5, 1.0); }) ==
        Errc::non_positive_survival);
  CHECK(code_of([&] { pareto_index(cdf, 4.0, 1.0); }) == Errc::empty_tail);
  CHECK(code_of([&] { pareto_index(cdf, 0.0, 1.0); }) == Errc::invalid_argument);
  CHECK(code_of([&] { pareto_index(cdf, 1.0, 0.0); }) == Errc::invalid_argument);
  // Survival at the threshold 0.5 and 0.8 after it: a negative index is
  // reported, not thrown, and cannot extrapolate.
  const TailFit rising = pareto_index(StepCdf({1.0, 2.0, 4.0}, {0.5, 0.2, 0.2}), 2.0, 1.0);
  CHECK_FALSE(rising.valid());
  CHECK(code_of([&] { extreme_quantile(rising, 0.99); }) == Errc::invalid_alpha);
  const TailFit ok = make_fit(1.0, 0.1, 1.0);
  CHECK(code_of([&] { extreme_quantile(ok, 0.85); }) == Errc::not_beyond_threshold);
  CHECK(code_of([&] { extreme_quantile(ok, 0.8); }) == Errc::not_beyond_threshold);
}

TEST_CASE("analytic Pareto survival is recovered exactly") {
  for (double alpha : {0.5, 1.0, 2.0, 5.0}) {
    for (double omega : {0.5, 1.0, 2.0}) {
      for (double y_min : {0.3, 1.0, 25.0}) {
        const auto survival = [&](double y) { return 3.0 * std::pow(y, -alpha); };
        const TailFit fit = pareto_index(survival, y_min, omega);
        CHECK(std::abs(fit.alpha_hat - alpha) < 1e-12 * std::max(1.0, alpha));
        CHECK(fit.c_hat == doctest::Approx(3.0).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("two-term Pareto population index") {
  const auto survival = [](double y) { return std::pow(y, -2.0) * (1.0 + 0.5 / y); };
  const TailFit fit = pareto_index(survival, 10.0, 1.0);
  CHECK(fit.alpha_hat == doctest::Approx(2.025).epsilon(2e-3));
  CHECK(-bias_term(0.5, 1.0, 10.0, 1.0) == doctest::Approx(0.025));
}

TEST_CASE("population bias follows the second-order term") {
  for (double alpha : {1.0, 2.0, 3.0}) {
    for (double rho : {1.0, 2.0}) {
      for (double d : {-0.5, 0.5}) {
        for (double omega : {0.5, 1.0, 2.0}) {
          const double y_min = std::pow(std::abs(d) / 0.01, 1.0 / rho);
          const auto survival = [&](double y) {
            return std::pow(y, -alpha) * (1.0 + d * std::pow(y, -rho));
          };
          const double b = bias_term(d, omega, y_min, rho);
          const double excess = pareto_index(survival, y_min, omega).alpha_hat - alpha;
          CHECK(std::abs(excess + b) <= 0.2 * std::abs(b) + 1e-6);
        }
      }
    }
  }
}

TEST_CASE("weight integral identity") {
  for (double omega : {0.5, 1.0, 2.0, 4.0}) {
    const double closed = weight_log_integral(omega, INFINITY);
    CHECK(closed == 1.0 / (omega * omega));
    boost::math::quadrature::exp_sinh<double> integrator;
    const double numeric = integrator.integrate(
        [&](double y) { return std::log1p(y) * std::pow(1.0 + y, -omega - 1.0); });
    CHECK(std::abs(numeric - closed) < 1e-10);
    for (double ratio : {1.5, 4.0, 100.0}) {
      const double finite = gk(
          [&](double y) { return std::log(y) * std::pow(y, -omega - 1.0); }, 1.0, ratio);
      CHECK(weight_log_integral(omega, ratio) == doctest::Approx(finite).epsilon(1e-12));
    }
  }
  CHECK(weight_log_integral(2.0, INFINITY) == 0.25);
  CHECK(weight_log_integral(1.0, 1.0) == 0.0);
}

TEST_CASE("rescaling outcomes leaves the index unchanged") {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> sample(400);
  for (double& v : sample) v = std::pow(u(gen), -1.0 / 1.5);
  const StepCdf cdf = empirical_cdf(sample);
  const double y_min = select_ymin(cdf, 0.9);
  const TailFit base = pareto_index(cdf, y_min, 1.0);
  for (double lambda : {0.01, 3.0, 1000.0}) {
    std::vector<double> scaled(sample);
    for (double& v : scaled) v *= lambda;
    const StepCdf cdf_l = empirical_cdf(scaled);
    const TailFit fit = pareto_index(cdf_l, select_ymin(cdf_l, 0.9), 1.0);
    CHECK(fit.alpha_hat == doctest::Approx(base.alpha_hat).epsilon(1e-12));
    CHECK(extreme_quantile(fit, 0.999) ==
          doctest::Approx(lambda * extreme_quantile(base, 0.999)).epsilon(1e-12));
  }
}

TEST_CASE("heavier tails give smaller index estimates") {
  auto median_index = [](double alpha) {
    std::vector<double> estimates;
    for (std::uint64_t rep = 0; rep < 200; ++rep) {
      auto gen = rng::substream(31, {static_cast<std::uint64_t>(alpha * 10), rep});
      std::uniform_real_distribution<double> u(0.0, 1.0);
      std::vector<double> sample(2000);
      for (double& v : sample) v = std::pow(1.0 - u(gen), -1.0 / alpha);
      const StepCdf cdf = empirical_cdf(sample);
      estimates.push_back(pareto_index(cdf, select_ymin(cdf, 0.95), 1.0).alpha_hat);
    }
    std::nth_element(estimates.begin(), estimates.begin() + 100, estimates.end());
    return estimates[100];
  };
  const double heavy = median_index(1.0);
  const double light = median_index(3.0);
  CHECK(heavy < light);
  CHECK(heavy == doctest::Approx(1.0).epsilon(0.2));
  CHECK(light == doctest::Approx(3.0).epsilon(0.2));
}

TEST_CASE("extreme quantiles") {
  CHECK(extreme_quantile(make_fit(1.0, 0.1, 1.0), 0.99) == doctest::Approx(10.0));
  CHECK(extreme_quantile(make_fit(2.0, 0.1, 1.5), 1.0 - 0.1 * 0.999999) ==
        doctest::Approx(2.0).epsilon(1e-6));
  const TailFit pareto = pareto_index([](double y) { return 1.0 / (y * y); }, 1.0, 1.0);
  CHECK(std::abs(extreme_quantile(pareto, 0.999) - std::pow(0.001, -0.5)) < 1e-9);
  CHECK(std::pow(0.001, -0.5) == doctest::Approx(31.6228).epsilon(1e-6));
}

TEST_CASE("QTE point estimates") {
  const TailFit a = make_fit(1.0, 0.1, 1.0);
  CHECK(qte_point(a, a, 0.995) == 0.0);
  // Quantiles 10 and 7 at level 0.99.
  const TailFit b = make_fit(0.7, 0.1, 1.0);
  CHECK(qte_point(a, b, 0.99) == doctest::Approx(3.0));
  // Each arm uses its own index.
  const TailFit c = make_fit(1.0, 0.1, 2.0);
  CHECK(qte_point(a, c, 0.99) == doctest::Approx(10.0 - std::sqrt(10.0)));

  // Negated outcomes: lower level q maps to 1 - q and the sign flips back.
  const TailFit fa = make_fit(1.0, 0.1, 1.0, true);
  const TailFit fb = make_fit(0.7, 0.1, 1.0, true);
  CHECK(qte_point(fa, fb, 0.01) == doctest::Approx(-3.0));
  CHECK(code_of([&] { qte_point(fa, b, 0.01); }) == Errc::invalid_argument);
}

TEST_CASE("common shift for non-positive thresholds") {
  CHECK(threshold_shift(2.0, 3.0) == 0.0);
  CHECK(threshold_shift(-1.0, 3.0) == 2.0);
  CHECK(threshold_shift(4.0, 0.0) == 1.0);

  const StepCdf cdf({-3.0, -1.0, 0.5, 2.0}, {0.2, 0.6, 0.9, 1.0});
  const double shift = threshold_shift(-1.0, -1.0);
  const TailFit fit = fit_tail(cdf, -1.0, 1.0, shift);
  const TailFit direct = pareto_index(cdf.shifted(shift), 1.0, 1.0);
  CHECK(fit.alpha_hat == direct.alpha_hat);
  CHECK(fit.y_min == 1.0);
  CHECK(fit.threshold() == -1.0);
  CHECK(fit.shift == 2.0);
  CHECK(extreme_quantile(fit, 0.99) == doctest::Approx(extreme_quantile(direct, 0.99) - 2.0));
  CHECK(code_of([&] { pareto_index(cdf, -1.0, 1.0); }) == Errc::invalid_argument);
}
