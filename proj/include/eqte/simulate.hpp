#ifndef EQTE_SIMULATE_HPP
#define EQTE_SIMULATE_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "eqte/core.hpp"
#include "eqte/inference.hpp"
#include "eqte/rng.hpp"

namespace eqte::sim {

// Compliance types, each drawn with probability 1/3.
enum class UnitType { always_taker, complier, never_taker };

inline constexpr double kEffectAlways = 2.0;
inline constexpr double kEffectComplier = 1.0;
inline constexpr double kEffectNever = 0.0;
inline constexpr double kTreatedShiftRdd = 0.1;
inline constexpr double kStudentDof = 10.0;
inline constexpr int kIvCovariates = 10;
inline constexpr double kIvGamma = 0.1;

// Standard normal over sqrt(chi-square(v) / v).
double student_t(rng::Engine& engine, double dof);

// Binary-instrument design: X ~ N(0, I_10), Z ~ Bernoulli(logistic(0.1 * sum X)),
// D = A + C * Z, Student-t(10) potential outcomes shifted by -/+ TE / 2.
ObservationSet gen_iv(std::size_t n, rng::Engine& engine);
ObservationSet gen_iv(std::size_t n, std::uint64_t seed);

// Fuzzy RDD: R ~ N(0, 1), D = A + C * Bernoulli(1/3 + 1{R > 0} / 3), outcomes
// as in gen_iv plus 0.1 * D.
ObservationSet gen_rdd(std::size_t n, rng::Engine& engine);
ObservationSet gen_rdd(std::size_t n, std::uint64_t seed);

ObservationSet generate(Design design, std::size_t n, rng::Engine& engine);

// Complier QTE on negated outcomes at lower level q: -1 (IV) and -1.1 (RDD,
// the treated complier also receives the 0.1 * D shift). Constant in q.
double true_qte(Design design, double q);
// The RDD alternative that counts only TE_C = 1 as the effect (-1 post-flip).
double alternative_true_qte(Design design, double q);

struct McConfig {
  Design design = Design::iv;
  std::vector<std::size_t> ns{2500, 5000, 10000};
  std::vector<double> qs{0.005, 0.010, 0.015, 0.020, 0.025};
  std::size_t reps = 500;
  std::uint64_t seed = 20240101;
  EstimatorSettings settings;
  SubsampleConfig subsample;
  bool with_ci = true;
  unsigned threads = 0;
};

void validate(const McConfig& cfg);

// Statistics of the fitted-scale estimates over the replications that
// produced an estimate. sd uses the 1/R normalisation so that
// rmse^2 = bias^2 + sd^2.
struct McCell {
  std::size_t n = 0;
  double q = 0.0;
  std::size_t reps = 0;    // replications with an estimate
  std::size_t failed = 0;  // replications without one
  double truth = 0.0;
  double bias = 0.0;
  double sd = 0.0;
  double rmse = 0.0;
  double coverage = 0.0;  // NaN when intervals were not computed
  double truth_alt = 0.0;
  double bias_alt = 0.0;
  double rmse_alt = 0.0;
  double coverage_alt = 0.0;
  double mean_ci_width = 0.0;
  // Replications with an estimate but no interval (unstable subsampling or
  // a non-finite endpoint). Coverage and width are over the others.
  std::size_t ci_failed = 0;
  std::size_t discarded_draws = 0;  // failed subsample fits, summed over reps
};

struct McReport {
  McConfig config;
  std::vector<McCell> cells;  // n-major, then q

  const McCell& cell(std::size_t n, double q) const;
};

// One replication: generate, negate outcomes, fit, estimate at level 1 - q,
// and (optionally) build subsampling intervals. Replication r of size n uses
// substreams derived from (seed, n, r) only.
struct McReplication {
  bool ok = false;
  std::vector<double> estimate;  // NaN where that q failed
  std::vector<double> lo;
  std::vector<double> hi;
  bool ci_failed = false;  // subsampling was unstable; estimates are kept
  std::size_t discarded_draws = 0;
};

McReplication run_replication(const McConfig& cfg, std::size_t n, std::size_t rep);

McReport run_mc(const McConfig& cfg);

}  // namespace eqte::sim

#endif  // EQTE_SIMULATE_HPP
