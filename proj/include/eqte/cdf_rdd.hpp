#ifndef EQTE_CDF_RDD_HPP
#define EQTE_CDF_RDD_HPP

#include <cmath>
#include <span>
#include <vector>

#include "eqte/core.hpp"

namespace eqte {

// Epanechnikov kernel with bandwidth h: K(u) = 0.75 (1 - u^2) on |u| <= 1.
struct KernelSpec {
  double bandwidth = 1.0;

  explicit KernelSpec(double h);
  double weight(double r) const noexcept {
    const double u = r / bandwidth;
    return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
  }
};

enum class Side { above, below };

// sd(R) * n^(-1/5), with the n - 1 sample variance.
double rot_bandwidth(std::span<const double> r);

// Local-constant kernel mean of g over the records with 0 < r <= h (above)
// or 0 < -r <= h (below). Throws Errc::empty_window when that set is empty or
// carries no kernel mass.
double one_sided_nw(std::span<const double> r, std::span<const double> g, Side side, double h);

template <class G>
double one_sided_nw(const ObservationSet& data, Side side, G&& g, double h) {
  std::vector<double> values(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) values[i] = g(i);
  return one_sided_nw(data.r(), values, side, h);
}

struct RddCdfPair {
  StepCdf beta0;
  StepCdf beta1;
  double denom0 = 0.0;  // jump of E[1 - D | R] at the cutoff
  double denom1 = 0.0;  // jump of E[D | R] at the cutoff
  double bandwidth = 0.0;
  double cutoff = 0.0;
};

// Fuzzy-RDD complier CDFs at the cutoff r = 0 from one-sided Nadaraya-Watson
// limits. Knots are the distinct outcomes of records with |r| <= h.
RddCdfPair rdd_cdf(const ObservationSet& data, double h);

}  // namespace eqte

#endif  // EQTE_CDF_RDD_HPP
