#include "eqte/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace eqte {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::invalid_data: return "InvalidData";
    case Errc::quantile_unreachable: return "QuantileUnreachable";
    case Errc::no_convergence: return "NoConvergence";
    case Errc::separation_detected: return "SeparationDetected";
    case Errc::degenerate_denominator: return "DegenerateDenominator";
    case Errc::zero_variance: return "ZeroVariance";
    case Errc::empty_window: return "EmptyWindow";
    case Errc::non_positive_survival: return "NonPositiveSurvival";
    case Errc::empty_tail: return "EmptyTail";
    case Errc::not_beyond_threshold: return "NotBeyondThreshold";
    case Errc::invalid_alpha: return "InvalidAlpha";
    case Errc::unstable_subsampling: return "UnstableSubsampling";
    case Errc::config_error: return "ConfigError";
    case Errc::schema_error: return "SchemaError";
  }
  return "Unknown";
}

namespace {

void require_binary(std::span<const int> v, const char* name) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != 0 && v[i] != 1) {
      throw Error(Errc::invalid_data, std::string(name) + " must be 0/1 (record " +
                                          std::to_string(i) + ")");
    }
  }
}

void require_finite(std::span<const double> v, const char* name) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw Error(Errc::invalid_data, std::string(name) + " is not finite (record " +
                                          std::to_string(i) + ")");
    }
  }
}

}  // namespace

ObservationSet ObservationSet::iv(std::vector<double> y, std::vector<int> d,
                                  std::vector<int> z, Eigen::MatrixXd x) {
  const std::size_t n = y.size();
  if (d.size() != n || z.size() != n || static_cast<std::size_t>(x.rows()) != n) {
    throw Error(Errc::invalid_data, "IV columns have different lengths");
  }
  require_finite(y, "y");
  require_binary(d, "d");
  require_binary(z, "z");
  if (!x.allFinite()) throw Error(Errc::invalid_data, "covariates must be finite");

  ObservationSet out;
  out.design_ = Design::iv;
  out.y_ = std::move(y);
  out.d_ = std::move(d);
  out.z_ = std::move(z);
  out.x_ = std::move(x);
  return out;
}

ObservationSet ObservationSet::rdd(std::vector<double> y, std::vector<int> d,
                                   std::vector<double> r) {
  const std::size_t n = y.size();
  if (d.size() != n || r.size() != n) {
    throw Error(Errc::invalid_data, "RDD columns have different lengths");
  }
  require_finite(y, "y");
  require_binary(d, "d");
  require_finite(r, "r");

  ObservationSet out;
  out.design_ = Design::rdd;
  out.y_ = std::move(y);
  out.d_ = std::move(d);
  out.r_ = std::move(r);
  return out;
}

ObservationSet ObservationSet::subset(std::span<const std::size_t> rows) const {
  ObservationSet out;
  out.design_ = design_;
  out.flipped_ = flipped_;
  const std::size_t m = rows.size();
  out.y_.resize(m);
  out.d_.resize(m);
  if (design_ == Design::iv) {
    out.z_.resize(m);
    out.x_.resize(static_cast<Eigen::Index>(m), x_.cols());
  } else {
    out.r_.resize(m);
  }
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t src = rows[i];
    if (src >= size()) throw Error(Errc::invalid_argument, "subset row out of range");
    out.y_[i] = y_[src];
    out.d_[i] = d_[src];
    if (design_ == Design::iv) {
      out.z_[i] = z_[src];
      out.x_.row(static_cast<Eigen::Index>(i)) = x_.row(static_cast<Eigen::Index>(src));
    } else {
      out.r_[i] = r_[src];
    }
  }
  return out;
}

ObservationSet ObservationSet::shifted(double delta) const {
  ObservationSet out = *this;
  for (double& v : out.y_) v += delta;
  return out;
}

ObservationSet flip_outcomes(const ObservationSet& data) {
  ObservationSet out = data;
  for (double& v : out.y_) v = -v;
  out.flipped_ = !data.flipped_;
  return out;
}

StepCdf::StepCdf(std::vector<double> knots, std::vector<double> values, bool flipped)
    : knots_(std::move(knots)), values_(std::move(values)), flipped_(flipped) {
  if (knots_.size() != values_.size()) {
    throw Error(Errc::invalid_argument, "StepCdf knots and values differ in length");
  }
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (!std::isfinite(knots_[i]) || !std::isfinite(values_[i])) {
      throw Error(Errc::invalid_argument, "StepCdf entries must be finite");
    }
    if (i > 0 && !(knots_[i - 1] < knots_[i])) {
      throw Error(Errc::invalid_argument, "StepCdf knots must be strictly increasing");
    }
  }
}

double StepCdf::operator()(double y) const {
  // First knot >= y; the value in force is the one of the knot before it.
  const auto it = std::lower_bound(knots_.begin(), knots_.end(), y);
  const auto idx = static_cast<std::size_t>(it - knots_.begin());
  return idx == 0 ? 0.0 : values_[idx - 1];
}

StepCdf StepCdf::shifted(double delta) const {
  std::vector<double> k = knots_;
  for (double& v : k) v += delta;
  return StepCdf(std::move(k), values_, flipped_);
}

double evaluate(const StepCdf& cdf, double y) { return cdf(y); }

MonotoneCdf::MonotoneCdf(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
  if (knots_.size() != values_.size()) {
    throw Error(Errc::invalid_argument, "MonotoneCdf knots and values differ in length");
  }
}

MonotoneCdf monotone_rearrange(const StepCdf& cdf) {
  const auto raw = cdf.values();
  std::vector<double> out(raw.size());
  double running = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < raw.size(); ++i) {
    running = std::max(running, raw[i]);
    out[i] = std::clamp(running, 0.0, 1.0);
  }
  return MonotoneCdf(std::vector<double>(cdf.knots().begin(), cdf.knots().end()),
                     std::move(out));
}

double left_inverse(const MonotoneCdf& m, double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw Error(Errc::invalid_argument, "quantile level must lie in (0,1)");
  }
  const auto vals = m.values();
  const auto it = std::lower_bound(vals.begin(), vals.end(), q);
  if (it == vals.end()) {
    throw Error(Errc::quantile_unreachable,
                "estimated CDF peaks at " + std::to_string(m.max_value()) +
                    " below level " + std::to_string(q));
  }
  return m.knots()[static_cast<std::size_t>(it - vals.begin())];
}

StepCdf empirical_cdf(std::span<const double> sample) {
  if (sample.empty()) throw Error(Errc::invalid_argument, "empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> knots;
  std::vector<double> values;
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    knots.push_back(sorted[i]);
    values.push_back(static_cast<double>(i + 1) / n);
  }
  return StepCdf(std::move(knots), std::move(values));
}

}  // namespace eqte
