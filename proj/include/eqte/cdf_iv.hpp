#ifndef EQTE_CDF_IV_HPP
#define EQTE_CDF_IV_HPP

#include <span>

#include <Eigen/Dense>

#include "eqte/core.hpp"

namespace eqte {

// Logit propensity model P(Z = 1 | X) = 1 / (1 + exp(-x'gamma)). When
// `intercept` is set, gamma[0] multiplies a constant column that is not
// stored in the covariate matrix.
struct LogitModel {
  Eigen::VectorXd gamma;
  bool intercept = false;
  bool converged = false;
  int iterations = 0;
};

struct LogitOptions {
  int max_iterations = 100;
  // Sup-norm of the mean score at which Newton stops.
  double tolerance = 1e-8;
};

// Bernoulli maximum likelihood with a logistic link, by Newton steps with
// step-halving started at zero. X is the full design matrix (add the constant
// column yourself, or use fit_propensity).
LogitModel fit_logit(const Eigen::MatrixXd& X, std::span<const int> z,
                     const LogitOptions& options = {});

// Covariate matrix of an IV sample, optionally prefixed with a constant column.
Eigen::MatrixXd design_matrix(const ObservationSet& data, bool intercept);

LogitModel fit_propensity(const ObservationSet& data, bool intercept = true,
                          const LogitOptions& options = {});

// Fitted P(Z = 1 | X_i) for each record, before any trimming.
Eigen::VectorXd propensity(const LogitModel& model, const ObservationSet& data);

struct KappaCdfPair {
  StepCdf beta0;
  StepCdf beta1;
  double denom = 0.0;  // sample mean of the kappa weights
  double p_trim = 0.0;
};

inline constexpr double kDefaultPropensityTrim = 0.01;

// Complier counterfactual CDFs by kappa weighting. Knots are the sorted
// distinct outcomes; values[i] = mean(kappa_j * 1{Y <= knot_i}) / mean(kappa),
// which evaluated left-continuously gives the strict-inequality estimator.
// Fitted propensities are clipped into [p_trim, 1 - p_trim]. Values are not
// clipped to [0, 1].
KappaCdfPair kappa_cdf(const ObservationSet& data, const LogitModel& model,
                       double p_trim = kDefaultPropensityTrim);

}  // namespace eqte

#endif  // EQTE_CDF_IV_HPP
