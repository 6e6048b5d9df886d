#ifndef EQTE_CLI_HPP
#define EQTE_CLI_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "eqte/core.hpp"
#include "eqte/inference.hpp"

namespace eqte::cli {

// Everything a run depends on. Field names match the flat JSON keys.
struct RunConfig {
  std::string command;  // estimate-iv, estimate-rdd or simulate
  std::string input;
  TailSide tail = TailSide::upper;
  std::vector<double> q;
  double omega = kDefaultOmega;
  double ymin_level = kDefaultThresholdLevel;
  double trim = kDefaultPropensityTrim;
  bool intercept = true;
  std::size_t b = 0;
  std::size_t B = 500;
  double ci_level = 0.95;
  SubsampleScheme scheme = SubsampleScheme::refit_all;
  std::uint64_t seed = 20240101;
  // simulate only
  Design design = Design::iv;
  std::vector<std::size_t> n{2500, 5000, 10000};
  std::size_t reps = 500;
  bool ci = true;
  // Not part of the recorded configuration: neither changes any output byte.
  std::filesystem::path out = ".";
  unsigned threads = 0;
};

// Maps an error to the process exit code: 2 configuration, 3 data, 4 estimation.
int exit_code(Errc code) noexcept;

// %.17g, with "nan", "inf" and "-inf" for non-finite values.
std::string format_number(double v);

// Applies the keys present in `j` on top of `cfg`. Unknown keys and ill-typed
// values are configuration errors; a "diagnostics" member is ignored so that
// run.json can be fed back as a config file.
void apply_json(RunConfig& cfg, const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});
nlohmann::json to_json(const RunConfig& cfg);

// Throws Errc::config_error on the first invalid field.
void validate(const RunConfig& cfg);

// CSV ingestion. IV header: y,d,z,x1,...,xk. RDD header: y,d,r.
// Schema problems throw Errc::schema_error naming the file line.
ObservationSet read_iv_csv(std::istream& in);
ObservationSet read_rdd_csv(std::istream& in);
ObservationSet read_observations(const std::filesystem::path& path, Design design);

// y,beta0,beta1 on the grid shared by the two arms; read_cdf_csv inverts it
// exactly.
void write_cdf_csv(std::ostream& out, const StepCdf& beta0, const StepCdf& beta1);
std::pair<StepCdf, StepCdf> read_cdf_csv(std::istream& in);

void cmd_estimate(const RunConfig& cfg);
void cmd_simulate(const RunConfig& cfg);

// Entry point used by the executable. Messages go to `err`.
int run(int argc, const char* const* argv, std::ostream& err);

}  // namespace eqte::cli

#endif  // EQTE_CLI_HPP
