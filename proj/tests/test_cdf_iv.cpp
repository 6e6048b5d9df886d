#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "eqte/cdf_iv.hpp"
#include "eqte/rng.hpp"
#include "eqte/simulate.hpp"

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

double logistic(double eta) { return 1.0 / (1.0 + std::exp(-eta)); }

// Plain gradient ascent on the mean log-likelihood; slow but hard to get wrong.
Eigen::VectorXd gradient_ascent_logit(const Eigen::MatrixXd& X, const std::vector<int>& z) {
  const auto n = static_cast<double>(X.rows());
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(X.cols());
  const double lipschitz =
      0.25 * Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(X.transpose() * X / n)
                 .eigenvalues()
                 .maxCoeff();
  for (int iter = 0; iter < 200000; ++iter) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(X.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const double p = logistic(X.row(i).dot(gamma));
      grad += (z[static_cast<std::size_t>(i)] - p) * X.row(i).transpose();
    }
    grad /= n;
    if (grad.lpNorm<Eigen::Infinity>() < 1e-13) break;
    gamma += grad / lipschitz;
  }
  return gamma;
}

// Compliance-type sample with one covariate and known complier outcome laws
// N(1, 1) treated and N(0, 1) untreated.
struct TypedSample {
  ObservationSet data;
  std::vector<double> complier_y1;
};

TypedSample typed_sample(std::size_t n, std::uint64_t seed) {
  rng::Engine gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> y(n);
  std::vector<int> d(n), z(n);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), 1);
  std::vector<double> complier_y1;
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = normal(gen);
    x(static_cast<Eigen::Index>(i), 0) = xi;
    z[i] = unif(gen) < logistic(0.5 * xi) ? 1 : 0;
    const double type = unif(gen);
    const double e = normal(gen);
    if (type < 1.0 / 3.0) {
      d[i] = 1;
      y[i] = 3.0 + e;
    } else if (type < 2.0 / 3.0) {
      d[i] = 0;
      y[i] = -2.0 + e;
    } else {
      d[i] = z[i];
      y[i] = (d[i] ? 1.0 : 0.0) + e;
      complier_y1.push_back(1.0 + e);
    }
  }
  return {ObservationSet::iv(std::move(y), std::move(d), std::move(z), std::move(x)),
          std::move(complier_y1)};
}

Eigen::MatrixXd no_covariates(std::size_t n) {
  return Eigen::MatrixXd(static_cast<Eigen::Index>(n), 0);
}

}  // namespace

TEST_CASE("intercept-only logit recovers the log-odds of the instrument share") {
  const auto half = ObservationSet::iv({1, 2, 3, 4}, {0, 1, 0, 1}, {0, 1, 1, 0}, no_covariates(4));
  const LogitModel m0 = fit_propensity(half);
  CHECK(m0.converged);
  CHECK(m0.gamma.size() == 1);
  CHECK(m0.gamma[0] == doctest::Approx(0.0).epsilon(1e-12));

  const auto three_quarters =
      ObservationSet::iv({1, 2, 3, 4}, {0, 1, 0, 1}, {1, 1, 1, 0}, no_covariates(4));
  const LogitModel m1 = fit_propensity(three_quarters);
  CHECK(m1.gamma[0] == doctest::Approx(std::log(3.0)).epsilon(1e-9));
  const Eigen::VectorXd p = propensity(m1, three_quarters);
  for (Eigen::Index i = 0; i < p.size(); ++i) CHECK(p[i] == doctest::Approx(0.75));
}

TEST_CASE("Newton logit agrees with gradient ascent") {
  rng::Engine gen(42);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Eigen::Index n = 200;
  Eigen::MatrixXd X(n, 3);
  std::vector<int> z(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = normal(gen);
    X(i, 2) = normal(gen);
    z[static_cast<std::size_t>(i)] = unif(gen) < logistic(0.3 + 0.8 * X(i, 1) - 0.5 * X(i, 2));
  }
  const LogitModel newton = fit_logit(X, z);
  const Eigen::VectorXd oracle = gradient_ascent_logit(X, z);
  CHECK(newton.converged);
  CHECK((newton.gamma - oracle).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("logit failure modes") {
  Eigen::MatrixXd X(6, 1);
  X << -3, -2, -1, 1, 2, 3;
  const std::vector<int> separated{0, 0, 0, 1, 1, 1};
  CHECK(code_of([&] { fit_logit(X, separated); }) == Errc::separation_detected);

  rng::Engine gen(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd W(100, 2);
  std::vector<int> z(100);
  for (Eigen::Index i = 0; i < 100; ++i) {
    W(i, 0) = 1.0;
    W(i, 1) = normal(gen);
    z[static_cast<std::size_t>(i)] = W(i, 1) + normal(gen) > 0.0;
  }
  LogitOptions one_step;
  one_step.max_iterations = 1;
  CHECK(code_of([&] { fit_logit(W, z, one_step); }) == Errc::no_convergence);

  const std::vector<int> constant(100, 1);
  CHECK(code_of([&] { fit_logit(W, constant); }) == Errc::invalid_data);
}

TEST_CASE("kappa CDFs on a six-point all-complier sample") {
  const auto data = ObservationSet::iv({1, 2, 3, 4, 5, 6}, {1, 1, 1, 0, 0, 0}, {1, 1, 1, 0, 0, 0},
                                       no_covariates(6));
  const KappaCdfPair pair = kappa_cdf(data, fit_propensity(data));
  CHECK(pair.denom == doctest::Approx(1.0));
  CHECK(pair.beta1(3.5) == doctest::Approx(1.0));
  CHECK(pair.beta1(2.0) == doctest::Approx(1.0 / 3.0));
  CHECK(pair.beta0(4.5) == doctest::Approx(1.0 / 3.0));
  CHECK(pair.beta0(3.5) == doctest::Approx(0.0));
  CHECK(pair.beta0(7.0) == doctest::Approx(1.0));
}

TEST_CASE("balanced sample without compliers has a degenerate denominator") {
  // (d, z) in {(1,0), (0,1), (1,1), (0,0)} with p = 1/2: weights -1, -1, 1, 1.
  const auto data =
      ObservationSet::iv({1, 2, 3, 4}, {1, 0, 1, 0}, {0, 1, 1, 0}, no_covariates(4));
  CHECK(code_of([&] { kappa_cdf(data, fit_propensity(data)); }) ==
        Errc::degenerate_denominator);
}

TEST_CASE("cumulative kappa sums match a direct evaluation at every point") {
  const TypedSample s = typed_sample(300, 17);
  const LogitModel model = fit_propensity(s.data);
  const KappaCdfPair pair = kappa_cdf(s.data, model);
  const Eigen::VectorXd p_raw = propensity(model, s.data);
  const auto y = s.data.y();
  const auto d = s.data.d();
  const auto z = s.data.z();
  const auto n = static_cast<double>(s.data.size());

  double denom = 0.0;
  for (std::size_t i = 0; i < s.data.size(); ++i) {
    const double p = std::clamp(p_raw[static_cast<Eigen::Index>(i)], 0.01, 0.99);
    denom += 1.0 - d[i] * (1.0 - z[i]) / (1.0 - p) - (1.0 - d[i]) * z[i] / p;
  }
  denom /= n;
  CHECK(pair.denom == doctest::Approx(denom).epsilon(1e-12));

  for (std::size_t j = 0; j < s.data.size(); j += 7) {
    const double at = y[j];
    double b0 = 0.0;
    double b1 = 0.0;
    for (std::size_t i = 0; i < s.data.size(); ++i) {
      if (!(y[i] < at)) continue;
      const double p = std::clamp(p_raw[static_cast<Eigen::Index>(i)], 0.01, 0.99);
      b0 += (1.0 - d[i]) * (p - z[i]) / ((1.0 - p) * p);
      b1 += d[i] * (z[i] - p) / ((1.0 - p) * p);
    }
    CHECK(pair.beta0(at) == doctest::Approx(b0 / n / denom).epsilon(1e-10).scale(1.0));
    CHECK(pair.beta1(at) == doctest::Approx(b1 / n / denom).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("the denominator ignores outcomes") {
  const TypedSample s = typed_sample(500, 5);
  const LogitModel model = fit_propensity(s.data);
  std::vector<double> y(s.data.y().begin(), s.data.y().end());
  std::mt19937_64 gen(9);
  std::shuffle(y.begin(), y.end(), gen);
  const auto permuted =
      ObservationSet::iv(y, {s.data.d().begin(), s.data.d().end()},
                         {s.data.z().begin(), s.data.z().end()}, s.data.x());
  CHECK(kappa_cdf(permuted, model).denom == kappa_cdf(s.data, model).denom);
}

TEST_CASE("trimming is inert when no propensity reaches the bounds") {
  const TypedSample s = typed_sample(800, 6);
  const LogitModel model = fit_propensity(s.data);
  const Eigen::VectorXd p = propensity(model, s.data);
  REQUIRE(p.minCoeff() > 0.01);
  REQUIRE(p.maxCoeff() < 0.99);
  const KappaCdfPair a = kappa_cdf(s.data, model, 0.0);
  const KappaCdfPair b = kappa_cdf(s.data, model, 0.01);
  for (std::size_t i = 0; i < a.beta1.size(); ++i) {
    CHECK(std::abs(a.beta1.values()[i] - b.beta1.values()[i]) < 1e-12);
    CHECK(std::abs(a.beta0.values()[i] - b.beta0.values()[i]) < 1e-12);
  }
  CHECK(code_of([&] { kappa_cdf(s.data, model, 0.3); }) == Errc::invalid_argument);
}

TEST_CASE("treated complier CDF tracks the latent complier outcomes") {
  const std::size_t n = 40000;
  const TypedSample s = typed_sample(n, 77);
  const LogitModel model = fit_propensity(s.data);
  const KappaCdfPair pair = kappa_cdf(s.data, model);
  const Eigen::VectorXd p_raw = propensity(model, s.data);
  const auto y = s.data.y();
  const auto d = s.data.d();
  const auto z = s.data.z();

  for (double at : {-0.5, 0.5, 1.0, 1.5, 2.5}) {
    const auto below = std::count_if(s.complier_y1.begin(), s.complier_y1.end(),
                                     [&](double v) { return v < at; });
    const double oracle = static_cast<double>(below) / static_cast<double>(s.complier_y1.size());
    // Standard error of the weighted mean, from the weights themselves.
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = std::clamp(p_raw[static_cast<Eigen::Index>(i)], 0.01, 0.99);
      const double term = y[i] < at ? d[i] * (z[i] - p) / ((1.0 - p) * p) / pair.denom : 0.0;
      sum += term;
      sum2 += term * term;
    }
    const double mean = sum / static_cast<double>(n);
    const double se = std::sqrt((sum2 / static_cast<double>(n) - mean * mean) / static_cast<double>(n));
    CHECK(std::abs(pair.beta1(at) - oracle) < 4.0 * se);
  }
}

TEST_CASE("kappa CDFs approach one at the top of the simulated design") {
  const ObservationSet data = sim::gen_iv(100000, std::uint64_t{123});
  const KappaCdfPair pair = kappa_cdf(data, fit_propensity(data));
  CHECK(std::abs(pair.beta1.values().back() - 1.0) < 0.02);
  CHECK(std::abs(pair.beta0.values().back() - 1.0) < 0.02);
  CHECK(pair.denom == doctest::Approx(1.0 / 3.0).epsilon(0.05));
}
