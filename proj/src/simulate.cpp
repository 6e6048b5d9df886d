#include "eqte/simulate.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>

#include "eqte/parallel.hpp"

namespace eqte::sim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

UnitType draw_type(rng::Engine& engine) {
  std::uniform_int_distribution<int> pick(0, 2);
  switch (pick(engine)) {
    case 0: return UnitType::always_taker;
    case 1: return UnitType::complier;
    default: return UnitType::never_taker;
  }
}

double effect(UnitType type) {
  switch (type) {
    case UnitType::always_taker: return kEffectAlways;
    case UnitType::complier: return kEffectComplier;
    case UnitType::never_taker: return kEffectNever;
  }
  return 0.0;
}

// Observed outcome given type and realised treatment; both potential outcomes
// are drawn so the stream consumption does not depend on D.
double outcome(UnitType type, int d, double treated_shift, rng::Engine& engine) {
  const double t0 = student_t(engine, kStudentDof);
  const double t1 = student_t(engine, kStudentDof);
  const double te = effect(type);
  const double y0 = treated_shift * d + t0 - te / 2.0;
  const double y1 = treated_shift * d + t1 + te / 2.0;
  return d == 1 ? y1 : y0;
}

}  // namespace

double student_t(rng::Engine& engine, double dof) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::chi_squared_distribution<double> chi2(dof);
  const double z = normal(engine);
  return z / std::sqrt(chi2(engine) / dof);
}

ObservationSet gen_iv(std::size_t n, rng::Engine& engine) {
  std::vector<double> y(n);
  std::vector<int> d(n);
  std::vector<int> z(n);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), kIvCovariates);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    const UnitType type = draw_type(engine);
    double index = 0.0;
    for (int j = 0; j < kIvCovariates; ++j) {
      x(row, j) = normal(engine);
      index += kIvGamma * x(row, j);
    }
    const double p = 1.0 / (1.0 + std::exp(-index));
    z[i] = unif(engine) < p ? 1 : 0;
    d[i] = type == UnitType::always_taker ? 1 : (type == UnitType::complier ? z[i] : 0);
    y[i] = outcome(type, d[i], 0.0, engine);
  }
  return ObservationSet::iv(std::move(y), std::move(d), std::move(z), std::move(x));
}

ObservationSet gen_iv(std::size_t n, std::uint64_t seed) {
  rng::Engine engine = rng::substream(seed, {rng::kDataStream});
  return gen_iv(n, engine);
}

ObservationSet gen_rdd(std::size_t n, rng::Engine& engine) {
  std::vector<double> y(n);
  std::vector<int> d(n);
  std::vector<double> r(n);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const UnitType type = draw_type(engine);
    r[i] = normal(engine);
    const double p_take = 1.0 / 3.0 + (r[i] > 0.0 ? 1.0 / 3.0 : 0.0);
    const int take = unif(engine) < p_take ? 1 : 0;
    d[i] = type == UnitType::always_taker ? 1 : (type == UnitType::complier ? take : 0);
    y[i] = outcome(type, d[i], kTreatedShiftRdd, engine);
  }
  return ObservationSet::rdd(std::move(y), std::move(d), std::move(r));
}

ObservationSet gen_rdd(std::size_t n, std::uint64_t seed) {
  rng::Engine engine = rng::substream(seed, {rng::kDataStream});
  return gen_rdd(n, engine);
}

ObservationSet generate(Design design, std::size_t n, rng::Engine& engine) {
  return design == Design::iv ? gen_iv(n, engine) : gen_rdd(n, engine);
}

double true_qte(Design design, double /*q*/) {
  return design == Design::iv ? -kEffectComplier : -(kEffectComplier + kTreatedShiftRdd);
}

double alternative_true_qte(Design /*design*/, double /*q*/) { return -kEffectComplier; }

void validate(const McConfig& cfg) {
  if (cfg.reps < 1) throw Error(Errc::config_error, "reps must be at least 1");
  if (cfg.ns.empty()) throw Error(Errc::config_error, "no sample sizes given");
  if (cfg.qs.empty()) throw Error(Errc::config_error, "no quantile levels given");
  for (double q : cfg.qs) {
    if (!(q > 0.0 && q < 0.5)) {
      throw Error(Errc::config_error, "simulation levels are lower-tail levels in (0, 0.5)");
    }
  }
  for (std::size_t n : cfg.ns) {
    if (n < 10) throw Error(Errc::config_error, "sample size too small");
    if (cfg.with_ci) validate(cfg.subsample, n);
  }
}

McReplication run_replication(const McConfig& cfg, std::size_t n, std::size_t rep) {
  McReplication out;
  const std::size_t nq = cfg.qs.size();
  out.estimate.assign(nq, kNaN);
  out.lo.assign(nq, kNaN);
  out.hi.assign(nq, kNaN);

  rng::Engine engine = rng::substream(cfg.seed, {rng::kDataStream, n, rep});
  const ObservationSet data = flip_outcomes(generate(cfg.design, n, engine));
  PipelineFit fit;
  try {
    fit = fit_pipeline(data, cfg.settings);
  } catch (const Error&) {
    return out;
  }
  out.ok = true;
  for (std::size_t k = 0; k < nq; ++k) {
    try {
      out.estimate[k] = fitted_qte(fit, 1.0 - cfg.qs[k]);
    } catch (const Error&) {
    }
  }
  if (!cfg.with_ci) return out;

  try {
    const SubsampleReplicates reps = subsample_replicates(
        data, fit, cfg.settings, cfg.subsample,
        rng::derive_seed(cfg.seed, {rng::kSubsampleStream, n, rep}), 1);
    out.discarded_draws = reps.failed;
    const double ratio =
        RateSpec{cfg.design}.ratio(static_cast<double>(reps.b), static_cast<double>(n));
    for (std::size_t k = 0; k < nq; ++k) {
      if (!std::isfinite(out.estimate[k])) continue;
      const auto draws = subsample_draws(reps, 1.0 - cfg.qs[k]);
      const CiResult ci =
          subsampling_ci(draws, out.estimate[k], cfg.subsample.level, ratio, reps.b,
                         cfg.subsample.B);
      out.lo[k] = ci.lo;
      out.hi[k] = ci.hi;
    }
  } catch (const Error& e) {
    if (e.code() != Errc::unstable_subsampling) throw;
    out.ci_failed = true;
    out.discarded_draws = cfg.subsample.B;
  }
  return out;
}

const McCell& McReport::cell(std::size_t n, double q) const {
  for (const McCell& c : cells) {
    if (c.n == n && std::abs(c.q - q) < 1e-12) return c;
  }
  throw Error(Errc::invalid_argument, "no cell for n=" + std::to_string(n));
}

McReport run_mc(const McConfig& cfg) {
  validate(cfg);
  McReport report;
  report.config = cfg;
  for (std::size_t n : cfg.ns) {
    std::vector<McReplication> runs(cfg.reps);
    parallel_for(cfg.reps, cfg.threads,
                 [&](std::size_t r) { runs[r] = run_replication(cfg, n, r); });

    std::size_t discarded = 0;
    for (const auto& run : runs) discarded += run.discarded_draws;

    for (std::size_t k = 0; k < cfg.qs.size(); ++k) {
      McCell cell;
      cell.n = n;
      cell.q = cfg.qs[k];
      cell.truth = true_qte(cfg.design, cell.q);
      cell.truth_alt = alternative_true_qte(cfg.design, cell.q);
      cell.discarded_draws = discarded;

      double sum = 0.0;
      std::size_t covered = 0, covered_alt = 0;
      double width = 0.0;
      std::vector<double> kept;
      std::vector<std::size_t> kept_runs;
      for (std::size_t r = 0; r < runs.size(); ++r) {
        const double est = runs[r].ok ? runs[r].estimate[k] : kNaN;
        if (!std::isfinite(est)) {
          ++cell.failed;
          continue;
        }
        kept.push_back(est);
        kept_runs.push_back(r);
      }
      cell.reps = kept.size();
      if (kept.empty()) {
        cell.bias = cell.sd = cell.rmse = cell.coverage = kNaN;
        cell.bias_alt = cell.rmse_alt = cell.coverage_alt = cell.mean_ci_width = kNaN;
        report.cells.push_back(cell);
        continue;
      }
      const double m = static_cast<double>(kept.size());
      for (double e : kept) sum += e;
      const double mean = sum / m;
      double ss = 0.0, se = 0.0, se_alt = 0.0;
      for (double e : kept) {
        ss += (e - mean) * (e - mean);
        se += (e - cell.truth) * (e - cell.truth);
        se_alt += (e - cell.truth_alt) * (e - cell.truth_alt);
      }
      cell.bias = mean - cell.truth;
      cell.sd = std::sqrt(ss / m);
      cell.rmse = std::sqrt(se / m);
      cell.bias_alt = mean - cell.truth_alt;
      cell.rmse_alt = std::sqrt(se_alt / m);

      if (cfg.with_ci) {
        std::size_t with_ci = 0;
        for (std::size_t r : kept_runs) {
          const double lo = runs[r].lo[k];
          const double hi = runs[r].hi[k];
          if (!std::isfinite(lo) || !std::isfinite(hi)) {
            ++cell.ci_failed;
            continue;
          }
          ++with_ci;
          if (lo <= cell.truth && cell.truth <= hi) ++covered;
          if (lo <= cell.truth_alt && cell.truth_alt <= hi) ++covered_alt;
          width += hi - lo;
        }
        const double c = static_cast<double>(with_ci);
        cell.coverage = with_ci ? static_cast<double>(covered) / c : kNaN;
        cell.coverage_alt = with_ci ? static_cast<double>(covered_alt) / c : kNaN;
        cell.mean_ci_width = with_ci ? width / c : kNaN;
      } else {
        cell.coverage = cell.coverage_alt = cell.mean_ci_width = kNaN;
      }
      report.cells.push_back(cell);
    }
  }
  return report;
}

}  // namespace eqte::sim
