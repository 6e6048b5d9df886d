#ifndef EQTE_CORE_HPP
#define EQTE_CORE_HPP

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "eqte/error.hpp"

namespace eqte {

enum class Design { iv, rdd };

// Unit records for either research design, stored column-wise.
//   IV:  y, d, z and an n x k covariate matrix x.
//   RDD: y, d and the running variable r.
// Instances are validated on construction and immutable afterwards.
class ObservationSet {
 public:
  static ObservationSet iv(std::vector<double> y, std::vector<int> d,
                           std::vector<int> z, Eigen::MatrixXd x);
  static ObservationSet rdd(std::vector<double> y, std::vector<int> d,
                            std::vector<double> r);

  Design design() const noexcept { return design_; }
  std::size_t size() const noexcept { return y_.size(); }
  std::size_t covariate_dim() const noexcept {
    return static_cast<std::size_t>(x_.cols());
  }
  // True when outcomes have been negated for lower-tail analysis.
  bool flipped() const noexcept { return flipped_; }

  std::span<const double> y() const noexcept { return y_; }
  std::span<const int> d() const noexcept { return d_; }
  std::span<const int> z() const noexcept { return z_; }
  std::span<const double> r() const noexcept { return r_; }
  const Eigen::MatrixXd& x() const noexcept { return x_; }

  // Rows in the order given; indices may repeat.
  ObservationSet subset(std::span<const std::size_t> rows) const;

  // Same records with every outcome replaced by y + delta.
  ObservationSet shifted(double delta) const;

  friend ObservationSet flip_outcomes(const ObservationSet& data);

 private:
  ObservationSet() = default;

  Design design_ = Design::iv;
  bool flipped_ = false;
  std::vector<double> y_;
  std::vector<int> d_;
  std::vector<int> z_;
  std::vector<double> r_;
  Eigen::MatrixXd x_;
};

// y -> -y for every record; all other fields are kept. Involution.
ObservationSet flip_outcomes(const ObservationSet& data);

// Piecewise-constant estimate of a CDF on a strictly increasing knot grid.
//
// Evaluation is left-continuous: the value on (knots[i-1], knots[i]] is
// values[i-1], the value at or below knots[0] is 0 and the value above the
// last knot is values.back(). Equivalently values[i] is the estimate of
// P(Y <= knots[i]). Values may leave [0, 1] and need not be monotone.
class StepCdf {
 public:
  StepCdf() = default;
  StepCdf(std::vector<double> knots, std::vector<double> values, bool flipped = false);

  std::span<const double> knots() const noexcept { return knots_; }
  std::span<const double> values() const noexcept { return values_; }
  bool flipped() const noexcept { return flipped_; }
  std::size_t size() const noexcept { return knots_.size(); }
  bool empty() const noexcept { return knots_.empty(); }

  double operator()(double y) const;

  // Knots moved to knot + delta, values untouched.
  StepCdf shifted(double delta) const;

  friend bool operator==(const StepCdf&, const StepCdf&) = default;

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
  bool flipped_ = false;
};

double evaluate(const StepCdf& cdf, double y);

// Running maximum of a StepCdf's values clipped to [0, 1]; the form used for
// every quantile lookup.
class MonotoneCdf {
 public:
  MonotoneCdf(std::vector<double> knots, std::vector<double> values);

  std::span<const double> knots() const noexcept { return knots_; }
  std::span<const double> values() const noexcept { return values_; }
  double max_value() const noexcept { return values_.empty() ? 0.0 : values_.back(); }

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
};

MonotoneCdf monotone_rearrange(const StepCdf& cdf);

// inf{knot y : M(y) >= q}. Throws Errc::quantile_unreachable if max M < q.
double left_inverse(const MonotoneCdf& m, double q);

// Empirical CDF of a sample in the StepCdf convention (values[i] is the share
// of observations <= knots[i]).
StepCdf empirical_cdf(std::span<const double> sample);

}  // namespace eqte

#endif  // EQTE_CORE_HPP
