#ifndef EQTE_ERROR_HPP
#define EQTE_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace eqte {

enum class Errc {
  invalid_argument,
  invalid_data,
  quantile_unreachable,
  no_convergence,
  separation_detected,
  degenerate_denominator,
  zero_variance,
  empty_window,
  non_positive_survival,
  empty_tail,
  not_beyond_threshold,
  invalid_alpha,
  unstable_subsampling,
  config_error,
  schema_error,
};

std::string_view errc_name(Errc code) noexcept;

// Every failure raised by the library carries one of the codes above so the
// CLI can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace eqte

#endif  // EQTE_ERROR_HPP
