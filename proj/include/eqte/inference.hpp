#ifndef EQTE_INFERENCE_HPP
#define EQTE_INFERENCE_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "eqte/cdf_iv.hpp"
#include "eqte/core.hpp"
#include "eqte/tail.hpp"

namespace eqte {

// Tuning of the point estimator shared by the full sample and every subsample.
struct EstimatorSettings {
  double omega = kDefaultOmega;
  double ymin_level = kDefaultThresholdLevel;
  double p_trim = kDefaultPropensityTrim;
  // Prepend a constant column to the covariates of the propensity logit.
  bool intercept = true;
  LogitOptions logit;
};

// Estimated counterfactual CDFs of both arms on a shared grid.
struct ArmCdfs {
  StepCdf beta0;
  StepCdf beta1;
  double bandwidth = 0.0;  // RDD only
};

// Kappa-weighted CDFs (IV, with a freshly fitted logit) or one-sided kernel
// CDFs at the cutoff (RDD, rule-of-thumb bandwidth from this sample).
ArmCdfs estimate_cdfs(const ObservationSet& data, const EstimatorSettings& settings);

// Everything the full-sample point estimate depends on. Outcomes are taken as
// given; negate them beforehand for lower-tail work.
struct PipelineFit {
  Design design = Design::iv;
  std::size_t n = 0;
  ArmCdfs cdfs;
  TailFit fit0;
  TailFit fit1;
  double shift = 0.0;
};

PipelineFit fit_pipeline(const ObservationSet& data, const EstimatorSettings& settings);

// Q1(level) - Q0(level) on the scale of the fitted outcomes.
double fitted_qte(const PipelineFit& fit, double level);

// Convergence rate of the CDF estimator: sqrt(n) for IV, sqrt(n h_n) with
// h_n proportional to n^(-1/5) for RDD. Constant factors cancel in ratio().
struct RateSpec {
  Design design = Design::iv;

  double rate(double n) const;
  double ratio(double b, double n) const { return rate(b) / rate(n); }
};

enum class SubsampleScheme {
  // Threshold and threshold survival frozen at full-sample values; only the
  // tail index is re-estimated.
  frozen,
  // Threshold frozen; tail index and the survival at the threshold are both
  // re-estimated on the subsample.
  refit_survival,
  // The whole point estimator is applied to the subsample: threshold
  // re-selected at the same level, survival and tail index re-estimated.
  // Only the common shift is kept from the full sample.
  refit_all,
};

struct SubsampleConfig {
  std::size_t b = 0;  // 0 selects default_subsample_size(n)
  std::size_t B = 500;
  double level = 0.95;
  SubsampleScheme scheme = SubsampleScheme::refit_all;
};

// ceil(n^0.7)
std::size_t default_subsample_size(std::size_t n);
std::size_t resolve_subsample_size(const SubsampleConfig& cfg, std::size_t n);

// Throws Errc::config_error unless 1 < b < n, B >= 100 and level in (0,1).
void validate(const SubsampleConfig& cfg, std::size_t n);

// Tail re-estimates from B random subsamples of size b, without replacement.
// Draw t uses RNG substream (seed, t). Failed draws are dropped and counted.
struct SubsampleReplicates {
  std::size_t b = 0;
  std::size_t requested = 0;
  std::size_t failed = 0;
  std::vector<double> alpha1;
  std::vector<double> alpha0;
  std::vector<double> s_min1;
  std::vector<double> s_min0;
  std::vector<double> y_min1;  // shifted scale, as in TailFit::y_min
  std::vector<double> y_min0;
};

inline constexpr double kMaxFailedDrawShare = 0.10;

// Throws Errc::unstable_subsampling when more than 10% of draws fail. b may
// equal n here; production callers validate() first.
SubsampleReplicates subsample_replicates(const ObservationSet& data, const PipelineFit& fit,
                                         const EstimatorSettings& settings,
                                         const SubsampleConfig& cfg, std::uint64_t seed,
                                         unsigned threads = 1);

// Subsample QTE statistics at `level` (fitted scale), one per kept draw.
std::vector<double> subsample_draws(const SubsampleReplicates& reps, double level);

std::vector<double> subsample_draws(const ObservationSet& data, const PipelineFit& fit,
                                    const EstimatorSettings& settings, double level,
                                    const SubsampleConfig& cfg, std::uint64_t seed,
                                    unsigned threads = 1);

struct CiResult {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> draws;
  std::size_t b = 0;
  std::size_t B = 0;
  double rate_ratio = 1.0;
};

// Gamma-quantile of a sample by the left-inverse rule.
double sample_quantile(std::vector<double> values, double gamma);

// With s_g the g-quantile of rate_ratio * (draw - point), the level 1 - a
// interval is [point - s_(1-a/2), point - s_(a/2)].
CiResult subsampling_ci(std::span<const double> draws, double point, double level,
                        double rate_ratio, std::size_t b, std::size_t B);

CiResult subsampling_ci(std::span<const double> draws, double point,
                        const SubsampleConfig& cfg, const RateSpec& rate, std::size_t n);

enum class TailSide { upper, lower };

struct QteResult {
  double q = 0.0;
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Point estimates and subsampling intervals at each level in `qs`, reported on
// the original outcome scale. For the lower tail the outcomes are negated,
// the upper tail is fitted at 1 - q and the results are mapped back.
struct Analysis {
  TailSide side = TailSide::upper;
  PipelineFit fit;
  SubsampleReplicates replicates;
  double rate_ratio = 1.0;
  std::vector<QteResult> results;
};

Analysis analyze(const ObservationSet& data, TailSide side, std::span<const double> qs,
                 const EstimatorSettings& settings, const SubsampleConfig& cfg,
                 std::uint64_t seed, unsigned threads = 1);

}  // namespace eqte

#endif  // EQTE_INFERENCE_HPP
