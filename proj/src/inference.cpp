#include "eqte/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include "eqte/cdf_rdd.hpp"
#include "eqte/parallel.hpp"
#include "eqte/rng.hpp"

namespace eqte {

ArmCdfs estimate_cdfs(const ObservationSet& data, const EstimatorSettings& settings) {
  ArmCdfs out;
  if (data.design() == Design::iv) {
    const LogitModel model = fit_propensity(data, settings.intercept, settings.logit);
    KappaCdfPair pair = kappa_cdf(data, model, settings.p_trim);
    out.beta0 = std::move(pair.beta0);
    out.beta1 = std::move(pair.beta1);
  } else {
    const double h = rot_bandwidth(data.r());
    RddCdfPair pair = rdd_cdf(data, h);
    out.beta0 = std::move(pair.beta0);
    out.beta1 = std::move(pair.beta1);
    out.bandwidth = h;
  }
  return out;
}

PipelineFit fit_pipeline(const ObservationSet& data, const EstimatorSettings& settings) {
  PipelineFit out;
  out.design = data.design();
  out.n = data.size();
  out.cdfs = estimate_cdfs(data, settings);
  const double y0 = select_ymin(out.cdfs.beta0, settings.ymin_level);
  const double y1 = select_ymin(out.cdfs.beta1, settings.ymin_level);
  out.shift = threshold_shift(y0, y1);
  out.fit0 = fit_tail(out.cdfs.beta0, y0, settings.omega, out.shift);
  out.fit1 = fit_tail(out.cdfs.beta1, y1, settings.omega, out.shift);
  return out;
}

double fitted_qte(const PipelineFit& fit, double level) {
  return extreme_quantile(fit.fit1, level) - extreme_quantile(fit.fit0, level);
}

double RateSpec::rate(double n) const {
  if (!(n > 0.0)) throw Error(Errc::invalid_argument, "rate needs a positive sample size");
  return design == Design::iv ? std::sqrt(n) : std::pow(n, 0.4);
}

std::size_t default_subsample_size(std::size_t n) {
  return static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n), 0.7)));
}

std::size_t resolve_subsample_size(const SubsampleConfig& cfg, std::size_t n) {
  return cfg.b == 0 ? default_subsample_size(n) : cfg.b;
}

void validate(const SubsampleConfig& cfg, std::size_t n) {
  const std::size_t b = resolve_subsample_size(cfg, n);
  if (!(b > 1 && b < n)) {
    throw Error(Errc::config_error, "subsample size b=" + std::to_string(b) +
                                        " must satisfy 1 < b < n=" + std::to_string(n));
  }
  if (cfg.B < 100) throw Error(Errc::config_error, "need at least 100 subsamples");
  if (!(cfg.level > 0.0 && cfg.level < 1.0)) {
    throw Error(Errc::config_error, "confidence level must lie in (0,1)");
  }
}

namespace {

std::vector<std::size_t> draw_rows(std::size_t n, std::size_t b, rng::Engine& engine) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  for (std::size_t i = 0; i < b; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(rows[i], rows[pick(engine)]);
  }
  rows.resize(b);
  std::sort(rows.begin(), rows.end());
  return rows;
}

struct DrawFit {
  double alpha1, alpha0, s1, s0, y1, y0;
};

std::optional<DrawFit> fit_draw(const ObservationSet& sub, const PipelineFit& full,
                                const EstimatorSettings& settings, SubsampleScheme scheme) {
  try {
    const ArmCdfs cdfs = estimate_cdfs(sub, settings);
    double t1 = full.fit1.threshold();
    double t0 = full.fit0.threshold();
    if (scheme == SubsampleScheme::refit_all) {
      t1 = select_ymin(cdfs.beta1, settings.ymin_level);
      t0 = select_ymin(cdfs.beta0, settings.ymin_level);
    }
    const TailFit f1 = fit_tail(cdfs.beta1, t1, settings.omega, full.shift);
    const TailFit f0 = fit_tail(cdfs.beta0, t0, settings.omega, full.shift);
    if (!f1.valid() || !f0.valid() || !std::isfinite(f1.alpha_hat) ||
        !std::isfinite(f0.alpha_hat)) {
      return std::nullopt;
    }
    return DrawFit{f1.alpha_hat, f0.alpha_hat, f1.s_min, f0.s_min, f1.y_min, f0.y_min};
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

SubsampleReplicates subsample_replicates(const ObservationSet& data, const PipelineFit& fit,
                                         const EstimatorSettings& settings,
                                         const SubsampleConfig& cfg, std::uint64_t seed,
                                         unsigned threads) {
  const std::size_t n = data.size();
  const std::size_t b = resolve_subsample_size(cfg, n);
  if (!(b > 1 && b <= n)) throw Error(Errc::invalid_argument, "subsample size out of range");
  if (cfg.B == 0) throw Error(Errc::invalid_argument, "need at least one subsample");

  std::vector<std::optional<DrawFit>> slots(cfg.B);
  parallel_for(cfg.B, threads, [&](std::size_t t) {
    rng::Engine engine = rng::substream(seed, {rng::kSubsampleStream, t});
    const auto rows = draw_rows(n, b, engine);
    slots[t] = fit_draw(data.subset(rows), fit, settings, cfg.scheme);
  });

  SubsampleReplicates out;
  out.b = b;
  out.requested = cfg.B;
  for (const auto& slot : slots) {
    if (!slot) {
      ++out.failed;
      continue;
    }
    out.alpha1.push_back(slot->alpha1);
    out.alpha0.push_back(slot->alpha0);
    const bool frozen = cfg.scheme == SubsampleScheme::frozen;
    out.s_min1.push_back(frozen ? fit.fit1.s_min : slot->s1);
    out.s_min0.push_back(frozen ? fit.fit0.s_min : slot->s0);
    out.y_min1.push_back(slot->y1);
    out.y_min0.push_back(slot->y0);
  }
  if (static_cast<double>(out.failed) > kMaxFailedDrawShare * static_cast<double>(cfg.B)) {
    throw Error(Errc::unstable_subsampling,
                std::to_string(out.failed) + " of " + std::to_string(cfg.B) +
                    " subsample fits failed");
  }
  return out;
}

std::vector<double> subsample_draws(const SubsampleReplicates& reps, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(Errc::invalid_argument, "quantile level must lie in (0,1)");
  }
  const double tail_prob = 1.0 - level;
  // Both arms carry the same shift, so it cancels in the difference.
  auto arm = [&](double y_min, double alpha, double s) {
    return y_min * std::pow(s / tail_prob, 1.0 / alpha);
  };
  std::vector<double> draws(reps.alpha1.size());
  for (std::size_t t = 0; t < draws.size(); ++t) {
    draws[t] = arm(reps.y_min1[t], reps.alpha1[t], reps.s_min1[t]) -
               arm(reps.y_min0[t], reps.alpha0[t], reps.s_min0[t]);
  }
  return draws;
}

std::vector<double> subsample_draws(const ObservationSet& data, const PipelineFit& fit,
                                    const EstimatorSettings& settings, double level,
                                    const SubsampleConfig& cfg, std::uint64_t seed,
                                    unsigned threads) {
  return subsample_draws(subsample_replicates(data, fit, settings, cfg, seed, threads), level);
}

double sample_quantile(std::vector<double> values, double gamma) {
  if (values.empty()) throw Error(Errc::invalid_argument, "quantile of an empty sample");
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw Error(Errc::invalid_argument, "quantile level must lie in [0,1]");
  }
  std::sort(values.begin(), values.end());
  const double m = static_cast<double>(values.size());
  // Smallest k with k / m >= gamma; the tolerance absorbs rounding in gamma * m.
  auto k = static_cast<std::size_t>(std::ceil(gamma * m - 1e-9));
  k = std::clamp<std::size_t>(k, 1, values.size());
  return values[k - 1];
}

CiResult subsampling_ci(std::span<const double> draws, double point, double level,
                        double rate_ratio, std::size_t b, std::size_t B) {
  if (draws.empty()) throw Error(Errc::invalid_argument, "no subsample draws");
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(Errc::invalid_argument, "confidence level must lie in (0,1)");
  }
  std::vector<double> scaled(draws.size());
  for (std::size_t t = 0; t < draws.size(); ++t) scaled[t] = rate_ratio * (draws[t] - point);
  const double a = 1.0 - level;
  CiResult out;
  out.point = point;
  out.lo = point - sample_quantile(scaled, 1.0 - a / 2.0);
  out.hi = point - sample_quantile(scaled, a / 2.0);
  out.draws.assign(draws.begin(), draws.end());
  out.b = b;
  out.B = B;
  out.rate_ratio = rate_ratio;
  return out;
}

CiResult subsampling_ci(std::span<const double> draws, double point,
                        const SubsampleConfig& cfg, const RateSpec& rate, std::size_t n) {
  const std::size_t b = resolve_subsample_size(cfg, n);
  return subsampling_ci(draws, point, cfg.level,
                        rate.ratio(static_cast<double>(b), static_cast<double>(n)), b, cfg.B);
}

Analysis analyze(const ObservationSet& data, TailSide side, std::span<const double> qs,
                 const EstimatorSettings& settings, const SubsampleConfig& cfg,
                 std::uint64_t seed, unsigned threads) {
  if (qs.empty()) throw Error(Errc::config_error, "no quantile levels requested");
  validate(cfg, data.size());

  const bool lower = side == TailSide::lower;
  const ObservationSet oriented = lower ? flip_outcomes(data) : data;
  Analysis out;
  out.side = side;
  out.fit = fit_pipeline(oriented, settings);
  out.replicates = subsample_replicates(oriented, out.fit, settings, cfg, seed, threads);
  const RateSpec rate{data.design()};
  const std::size_t b = out.replicates.b;
  out.rate_ratio = rate.ratio(static_cast<double>(b), static_cast<double>(data.size()));

  for (double q : qs) {
    if (!(q > 0.0 && q < 1.0)) throw Error(Errc::config_error, "quantile levels must lie in (0,1)");
    const double level = lower ? 1.0 - q : q;
    const double point = fitted_qte(out.fit, level);
    const auto draws = subsample_draws(out.replicates, level);
    const CiResult ci = subsampling_ci(draws, point, cfg.level, out.rate_ratio, b, cfg.B);
    QteResult r;
    r.q = q;
    if (lower) {
      r.point = -ci.point;
      r.lo = -ci.hi;
      r.hi = -ci.lo;
    } else {
      r.point = ci.point;
      r.lo = ci.lo;
      r.hi = ci.hi;
    }
    out.results.push_back(r);
  }
  return out;
}

}  // namespace eqte
