#include "eqte/cdf_iv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace eqte {

namespace {

constexpr double kSeparationEta = 30.0;
constexpr double kDenominatorFloor = 1e-10;

// log(1 + exp(eta)) without overflow.
double log1p_exp(double eta) {
  return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

double logistic(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

// True when the linear index puts every record on the side of its response,
// i.e. the data are completely separated and no finite maximiser exists.
bool separates(const Eigen::VectorXd& eta, std::span<const int> z) {
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    if ((eta[i] > 0.0) != (z[static_cast<std::size_t>(i)] == 1)) return false;
  }
  return true;
}

void throw_separation() {
  throw Error(Errc::separation_detected, "instrument is perfectly predicted by the covariates");
}

double mean_loglik(const Eigen::VectorXd& eta, std::span<const int> z) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    sum += z[static_cast<std::size_t>(i)] * eta[i] - log1p_exp(eta[i]);
  }
  return sum / static_cast<double>(eta.size());
}

}  // namespace

LogitModel fit_logit(const Eigen::MatrixXd& X, std::span<const int> z,
                     const LogitOptions& options) {
  const Eigen::Index n = X.rows();
  const Eigen::Index k = X.cols();
  if (k < 1) throw Error(Errc::invalid_argument, "logit needs at least one regressor");
  if (static_cast<std::size_t>(n) != z.size() || n == 0) {
    throw Error(Errc::invalid_argument, "logit design and response differ in length");
  }
  const auto ones = std::count(z.begin(), z.end(), 1);
  if (ones == 0 || ones == n) {
    throw Error(Errc::invalid_data, "instrument is constant; propensity is not estimable");
  }

  Eigen::VectorXd zv(n);
  for (Eigen::Index i = 0; i < n; ++i) zv[i] = z[static_cast<std::size_t>(i)];
  const double inv_n = 1.0 / static_cast<double>(n);

  LogitModel model;
  model.gamma = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
  double loglik = mean_loglik(eta, z);

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    Eigen::VectorXd p = eta.unaryExpr(&logistic);
    Eigen::VectorXd score = inv_n * (X.transpose() * (zv - p));
    if (score.lpNorm<Eigen::Infinity>() <= options.tolerance) {
      if (separates(eta, z)) throw_separation();
      model.converged = true;
      model.iterations = iter - 1;
      return model;
    }
    Eigen::VectorXd w = (p.array() * (1.0 - p.array())).matrix();
    Eigen::MatrixXd info = inv_n * (X.transpose() * w.asDiagonal() * X);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      throw Error(Errc::no_convergence, "logit information matrix is singular");
    }
    Eigen::VectorXd step = ldlt.solve(score);
    if (!step.allFinite()) {
      throw Error(Errc::no_convergence, "logit Newton step is not finite");
    }

    double scale = 1.0;
    Eigen::VectorXd next_gamma;
    Eigen::VectorXd next_eta;
    double next_loglik = -std::numeric_limits<double>::infinity();
    for (int halving = 0; halving < 40; ++halving) {
      next_gamma = model.gamma + scale * step;
      next_eta = X * next_gamma;
      next_loglik = mean_loglik(next_eta, z);
      // Summation noise in the mean log-likelihood grows with n; a step that
      // loses less than that is not a real decrease.
      if (next_loglik >= loglik - 1e-12 * (1.0 + std::abs(loglik))) break;
      scale *= 0.5;
    }
    model.gamma = std::move(next_gamma);
    eta = std::move(next_eta);
    loglik = next_loglik;
    model.iterations = iter;

    if ((eta.array().abs() > kSeparationEta).all()) {
      throw Error(Errc::separation_detected,
                  "every linear index exceeds " + std::to_string(kSeparationEta) +
                      " in magnitude; instrument is perfectly predicted");
    }
  }

  Eigen::VectorXd p = eta.unaryExpr(&logistic);
  Eigen::VectorXd score = inv_n * (X.transpose() * (zv - p));
  if (score.lpNorm<Eigen::Infinity>() <= options.tolerance) {
    if (separates(eta, z)) throw_separation();
    model.converged = true;
    return model;
  }
  throw Error(Errc::no_convergence, "logit did not converge in " +
                                        std::to_string(options.max_iterations) +
                                        " iterations");
}

Eigen::MatrixXd design_matrix(const ObservationSet& data, bool intercept) {
  if (data.design() != Design::iv) {
    throw Error(Errc::invalid_argument, "propensity model needs an IV sample");
  }
  const auto n = static_cast<Eigen::Index>(data.size());
  const Eigen::Index k = data.x().cols();
  if (!intercept) return data.x();
  Eigen::MatrixXd X(n, k + 1);
  X.col(0).setOnes();
  X.rightCols(k) = data.x();
  return X;
}

LogitModel fit_propensity(const ObservationSet& data, bool intercept,
                          const LogitOptions& options) {
  LogitModel model = fit_logit(design_matrix(data, intercept), data.z(), options);
  model.intercept = intercept;
  return model;
}

Eigen::VectorXd propensity(const LogitModel& model, const ObservationSet& data) {
  const Eigen::Index k = data.x().cols() + (model.intercept ? 1 : 0);
  if (model.gamma.size() != k) {
    throw Error(Errc::invalid_argument, "logit coefficients do not match covariate dimension");
  }
  Eigen::VectorXd eta = data.x() * model.gamma.tail(data.x().cols());
  if (model.intercept) eta.array() += model.gamma[0];
  return eta.unaryExpr(&logistic);
}

KappaCdfPair kappa_cdf(const ObservationSet& data, const LogitModel& model, double p_trim) {
  if (data.design() != Design::iv) {
    throw Error(Errc::invalid_argument, "kappa_cdf needs an IV sample");
  }
  if (!(p_trim >= 0.0 && p_trim < 0.2)) {
    throw Error(Errc::invalid_argument, "propensity trim must lie in [0, 0.2)");
  }
  const std::size_t n = data.size();
  if (n == 0) throw Error(Errc::invalid_data, "empty sample");

  const Eigen::VectorXd p_raw = propensity(model, data);
  const auto y = data.y();
  const auto d = data.d();
  const auto z = data.z();

  std::vector<double> w0(n);
  std::vector<double> w1(n);
  double denom_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = std::clamp(p_raw[static_cast<Eigen::Index>(i)], p_trim, 1.0 - p_trim);
    const double di = d[i];
    const double zi = z[i];
    const double pq = (1.0 - p) * p;
    w0[i] = (1.0 - di) * (p - zi) / pq;
    w1[i] = di * (zi - p) / pq;
    denom_sum += 1.0 - di * (1.0 - zi) / (1.0 - p) - (1.0 - di) * zi / p;
  }
  const double denom = denom_sum / static_cast<double>(n);
  if (!(std::abs(denom) >= kDenominatorFloor)) {
    throw Error(Errc::degenerate_denominator,
                "kappa denominator " + std::to_string(denom) + " is numerically zero (no compliers)");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });

  std::vector<double> knots;
  std::vector<double> v0;
  std::vector<double> v1;
  const double scale = 1.0 / (static_cast<double>(n) * denom);
  double c0 = 0.0;
  double c1 = 0.0;
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t i = order[pos];
    c0 += w0[i];
    c1 += w1[i];
    if (pos + 1 < n && y[order[pos + 1]] == y[i]) continue;
    knots.push_back(y[i]);
    v0.push_back(c0 * scale);
    v1.push_back(c1 * scale);
  }

  KappaCdfPair out;
  out.beta0 = StepCdf(knots, std::move(v0), data.flipped());
  out.beta1 = StepCdf(std::move(knots), std::move(v1), data.flipped());
  out.denom = denom;
  out.p_trim = p_trim;
  return out;
}

}  // namespace eqte
