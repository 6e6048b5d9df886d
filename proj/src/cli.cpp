#include "eqte/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include <CLI11.hpp>

#include "eqte/simulate.hpp"

namespace eqte::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<double> kTableLevels{0.005, 0.010, 0.015, 0.020, 0.025};

[[noreturn]] void config_error(const std::string& what) {
  throw Error(Errc::config_error, what);
}

[[noreturn]] void schema_error(std::size_t line, const std::string& what) {
  throw Error(Errc::schema_error, "line " + std::to_string(line) + ": " + what);
}

std::string_view side_name(TailSide s) { return s == TailSide::upper ? "upper" : "lower"; }
std::string_view design_name(Design d) { return d == Design::iv ? "iv" : "rdd"; }

std::string_view scheme_name(SubsampleScheme s) {
  switch (s) {
    case SubsampleScheme::frozen: return "frozen";
    case SubsampleScheme::refit_survival: return "refit_survival";
    case SubsampleScheme::refit_all: return "refit_all";
  }
  return "";
}

TailSide parse_side(const std::string& s) {
  if (s == "upper") return TailSide::upper;
  if (s == "lower") return TailSide::lower;
  config_error("tail must be 'upper' or 'lower', got '" + s + "'");
}

Design parse_design(const std::string& s) {
  if (s == "iv") return Design::iv;
  if (s == "rdd") return Design::rdd;
  config_error("design must be 'iv' or 'rdd', got '" + s + "'");
}

SubsampleScheme parse_scheme(const std::string& s) {
  if (s == "frozen") return SubsampleScheme::frozen;
  if (s == "refit_survival") return SubsampleScheme::refit_survival;
  if (s == "refit_all") return SubsampleScheme::refit_all;
  config_error("scheme must be frozen, refit_survival or refit_all, got '" + s + "'");
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_number(std::string_view field, std::size_t line, std::string_view column) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    schema_error(line, "column " + std::string(column) + ": '" + std::string(field) +
                           "' is not a finite number");
  }
  return v;
}

int parse_binary(std::string_view field, std::size_t line, std::string_view column) {
  const double v = parse_number(field, line, column);
  if (v != 0.0 && v != 1.0) {
    schema_error(line, "column " + std::string(column) + " must be 0 or 1, got '" +
                           std::string(field) + "'");
  }
  return v == 1.0 ? 1 : 0;
}

// Reads lines, dropping a trailing '\r' and skipping blank lines. The header
// goes to `on_header`, each row to `row` with its line number.
template <class HeaderFn, class RowFn>
void read_csv(std::istream& in, HeaderFn&& on_header, RowFn&& row) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  bool have_header = false;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (!have_header) {
      for (auto f : fields) header.emplace_back(f);
      on_header(header);
      have_header = true;
      continue;
    }
    if (fields.size() != header.size()) {
      schema_error(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                std::to_string(fields.size()));
    }
    row(fields, line_no);
    ++rows;
  }
  if (!have_header) throw Error(Errc::schema_error, "empty file, no header");
  if (rows == 0) throw Error(Errc::schema_error, "no data rows");
}

void expect_header(const std::vector<std::string>& got, const std::vector<std::string>& want) {
  if (got != want) {
    std::string w, g;
    for (const auto& s : want) w += (w.empty() ? "" : ",") + s;
    for (const auto& s : got) g += (g.empty() ? "" : ",") + s;
    schema_error(1, "header must be '" + w + "', got '" + g + "'");
  }
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) config_error("cannot write " + path.string());
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out = open_output(path);
  out << text;
  if (!out) config_error("failed writing " + path.string());
}

template <class T>
T get_as(const json& j, const char* key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    config_error(std::string("config key '") + key + "' has the wrong type");
  }
}

void ensure_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) config_error("cannot create output directory " + dir.string());
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

EstimatorSettings settings_of(const RunConfig& cfg) {
  EstimatorSettings s;
  s.omega = cfg.omega;
  s.ymin_level = cfg.ymin_level;
  s.p_trim = cfg.trim;
  s.intercept = cfg.intercept;
  return s;
}

SubsampleConfig subsample_of(const RunConfig& cfg) {
  SubsampleConfig s;
  s.b = cfg.b;
  s.B = cfg.B;
  s.level = cfg.ci_level;
  s.scheme = cfg.scheme;
  return s;
}

std::string pareto_rows(std::string_view arm, const StepCdf& cdf, const TailFit& fit) {
  std::string rows;
  const auto knots = cdf.knots();
  const auto values = cdf.values();
  const double lo = fit.threshold();
  const double hi = fit.truncation - fit.shift;
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (knots[i] < lo) continue;
    if (knots[i] > hi) break;
    const double pareto = fit.c_hat * std::pow(knots[i] + fit.shift, -fit.alpha_hat);
    rows += std::string(arm) + "," + format_number(knots[i]) + "," +
            format_number(1.0 - values[i]) + "," + format_number(pareto) + "\n";
  }
  return rows;
}

// Display form for table.csv: magnitudes beyond 10 are censored as in
// published tables; cells.csv keeps the exact values.
std::string table_cell(double v) {
  if (v > 10.0) return ">10";
  if (v < -10.0) return "<-10";
  return format_number(v);
}

}  // namespace

int exit_code(Errc code) noexcept {
  switch (code) {
    case Errc::config_error: return 2;
    case Errc::schema_error:
    case Errc::invalid_data: return 3;
    default: return 4;
  }
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void apply_json(RunConfig& cfg, const json& j) {
  if (!j.is_object()) config_error("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    const char* k = key.c_str();
    if (key == "diagnostics") continue;
    if (key == "command") {
      const auto c = get_as<std::string>(v, k);
      if (!cfg.command.empty() && c != cfg.command) {
        config_error("config was written for '" + c + "', not '" + cfg.command + "'");
      }
      cfg.command = c;
    } else if (key == "input") {
      cfg.input = get_as<std::string>(v, k);
    } else if (key == "tail") {
      cfg.tail = parse_side(get_as<std::string>(v, k));
    } else if (key == "q") {
      cfg.q = get_as<std::vector<double>>(v, k);
    } else if (key == "omega") {
      cfg.omega = get_as<double>(v, k);
    } else if (key == "ymin_level") {
      cfg.ymin_level = get_as<double>(v, k);
    } else if (key == "trim") {
      cfg.trim = get_as<double>(v, k);
    } else if (key == "intercept") {
      cfg.intercept = get_as<bool>(v, k);
    } else if (key == "b") {
      cfg.b = get_as<std::size_t>(v, k);
    } else if (key == "B") {
      cfg.B = get_as<std::size_t>(v, k);
    } else if (key == "ci_level") {
      cfg.ci_level = get_as<double>(v, k);
    } else if (key == "scheme") {
      cfg.scheme = parse_scheme(get_as<std::string>(v, k));
    } else if (key == "seed") {
      cfg.seed = get_as<std::uint64_t>(v, k);
    } else if (key == "design") {
      cfg.design = parse_design(get_as<std::string>(v, k));
    } else if (key == "n") {
      cfg.n = get_as<std::vector<std::size_t>>(v, k);
    } else if (key == "reps") {
      cfg.reps = get_as<std::size_t>(v, k);
    } else if (key == "ci") {
      cfg.ci = get_as<bool>(v, k);
    } else {
      config_error("unknown config key '" + key + "'");
    }
  }
}

RunConfig load_config(const fs::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    config_error("config " + path.string() + " is not valid JSON: " + e.what());
  }
  apply_json(base, j);
  return base;
}

json to_json(const RunConfig& cfg) {
  json j;
  j["command"] = cfg.command;
  j["seed"] = cfg.seed;
  j["q"] = cfg.q;
  j["omega"] = cfg.omega;
  j["ymin_level"] = cfg.ymin_level;
  j["b"] = cfg.b;
  j["B"] = cfg.B;
  j["ci_level"] = cfg.ci_level;
  j["scheme"] = scheme_name(cfg.scheme);
  if (cfg.command == "simulate") {
    j["design"] = design_name(cfg.design);
    j["n"] = cfg.n;
    j["reps"] = cfg.reps;
    j["ci"] = cfg.ci;
    j["trim"] = cfg.trim;
    j["intercept"] = cfg.intercept;
  } else {
    j["input"] = cfg.input;
    j["tail"] = side_name(cfg.tail);
    if (cfg.command == "estimate-iv") {
      j["trim"] = cfg.trim;
      j["intercept"] = cfg.intercept;
    }
  }
  return j;
}

void validate(const RunConfig& cfg) {
  const bool sim = cfg.command == "simulate";
  if (!sim && cfg.command != "estimate-iv" && cfg.command != "estimate-rdd") {
    config_error("unknown command '" + cfg.command + "'");
  }
  if (!sim && cfg.q.empty()) config_error("no quantile levels given (--q)");
  for (double q : cfg.q) {
    if (sim ? !(q > 0.0 && q < 0.5) : !(q > 0.0 && q < 1.0)) {
      config_error(sim ? "simulation levels are lower-tail levels in (0, 0.5)"
                       : "quantile levels must lie in (0, 1)");
    }
  }
  if (!(cfg.omega > 0.0) || !std::isfinite(cfg.omega)) config_error("omega must be positive");
  if (!(cfg.ymin_level > 0.0 && cfg.ymin_level < 1.0)) {
    config_error("ymin_level must lie in (0, 1)");
  }
  if (!(cfg.trim >= 0.0 && cfg.trim < 0.2)) config_error("trim must lie in [0, 0.2)");
  if (!(cfg.ci_level > 0.0 && cfg.ci_level < 1.0)) config_error("ci_level must lie in (0, 1)");
  if (cfg.B < 100) config_error("B must be at least 100");
  if (sim) {
    if (cfg.n.empty()) config_error("no sample sizes given (--n)");
    if (cfg.reps < 1) config_error("reps must be at least 1");
  } else if (cfg.input.empty()) {
    config_error("no input file given (--input)");
  }
}

ObservationSet read_iv_csv(std::istream& in) {
  std::vector<double> y;
  std::vector<int> d, z;
  std::vector<double> x;  // row-major
  std::size_t k = 0;
  read_csv(
      in,
      [&](const std::vector<std::string>& header) {
        k = header.size() < 3 ? 0 : header.size() - 3;
        std::vector<std::string> want{"y", "d", "z"};
        for (std::size_t j = 1; j <= k; ++j) want.push_back("x" + std::to_string(j));
        expect_header(header, want);
      },
      [&](const std::vector<std::string_view>& f, std::size_t line) {
        y.push_back(parse_number(f[0], line, "y"));
        d.push_back(parse_binary(f[1], line, "d"));
        z.push_back(parse_binary(f[2], line, "z"));
        for (std::size_t j = 0; j < k; ++j) {
          x.push_back(parse_number(f[3 + j], line, "x" + std::to_string(j + 1)));
        }
      });

  const auto n = static_cast<Eigen::Index>(y.size());
  Eigen::MatrixXd xm(n, static_cast<Eigen::Index>(k));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      xm(i, static_cast<Eigen::Index>(j)) = x[static_cast<std::size_t>(i) * k + j];
    }
  }
  return ObservationSet::iv(std::move(y), std::move(d), std::move(z), std::move(xm));
}

ObservationSet read_rdd_csv(std::istream& in) {
  std::vector<double> y, r;
  std::vector<int> d;
  read_csv(
      in, [](const std::vector<std::string>& header) { expect_header(header, {"y", "d", "r"}); },
      [&](const std::vector<std::string_view>& f, std::size_t line) {
        y.push_back(parse_number(f[0], line, "y"));
        d.push_back(parse_binary(f[1], line, "d"));
        r.push_back(parse_number(f[2], line, "r"));
      });
  return ObservationSet::rdd(std::move(y), std::move(d), std::move(r));
}

ObservationSet read_observations(const fs::path& path, Design design) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::invalid_data, "cannot open input " + path.string());
  return design == Design::iv ? read_iv_csv(in) : read_rdd_csv(in);
}

void write_cdf_csv(std::ostream& out, const StepCdf& beta0, const StepCdf& beta1) {
  if (!std::equal(beta0.knots().begin(), beta0.knots().end(), beta1.knots().begin(),
                  beta1.knots().end())) {
    throw Error(Errc::invalid_argument, "arms must share the knot grid");
  }
  out << "y,beta0,beta1\n";
  for (std::size_t i = 0; i < beta0.size(); ++i) {
    out << format_number(beta0.knots()[i]) << ',' << format_number(beta0.values()[i]) << ','
        << format_number(beta1.values()[i]) << '\n';
  }
}

std::pair<StepCdf, StepCdf> read_cdf_csv(std::istream& in) {
  std::vector<double> knots, v0, v1;
  read_csv(
      in,
      [](const std::vector<std::string>& header) {
        expect_header(header, {"y", "beta0", "beta1"});
      },
      [&](const std::vector<std::string_view>& f, std::size_t line) {
        knots.push_back(parse_number(f[0], line, "y"));
        v0.push_back(parse_number(f[1], line, "beta0"));
        v1.push_back(parse_number(f[2], line, "beta1"));
      });
  return {StepCdf(knots, std::move(v0)), StepCdf(knots, std::move(v1))};
}

void cmd_estimate(const RunConfig& cfg) {
  validate(cfg);
  const Design design = cfg.command == "estimate-iv" ? Design::iv : Design::rdd;
  const ObservationSet data = read_observations(cfg.input, design);
  const EstimatorSettings settings = settings_of(cfg);
  const Analysis a =
      analyze(data, cfg.tail, cfg.q, settings, subsample_of(cfg), cfg.seed, cfg.threads);
  ensure_out_dir(cfg.out);

  // cdf.csv is always on the original outcome scale.
  {
    const ArmCdfs original =
        cfg.tail == TailSide::upper ? a.fit.cdfs : estimate_cdfs(data, settings);
    std::ostringstream s;
    write_cdf_csv(s, original.beta0, original.beta1);
    write_text(cfg.out / "cdf.csv", s.str());
  }
  write_text(cfg.out / "paretofit.csv",
             "arm,y,survival,pareto\n" + pareto_rows("0", a.fit.cdfs.beta0, a.fit.fit0) +
                 pareto_rows("1", a.fit.cdfs.beta1, a.fit.fit1));
  {
    std::string s = "q,estimate,ci_lo,ci_hi\n";
    for (const QteResult& r : a.results) {
      s += format_number(r.q) + "," + format_number(r.point) + "," + format_number(r.lo) +
           "," + format_number(r.hi) + "\n";
    }
    write_text(cfg.out / "qte.csv", s);
  }

  json j = to_json(cfg);
  json diag;
  diag["n"] = data.size();
  diag["b"] = a.replicates.b;
  diag["rate_ratio"] = a.rate_ratio;
  diag["draws_requested"] = a.replicates.requested;
  diag["draws_discarded"] = a.replicates.failed;
  diag["shift"] = a.fit.shift;
  if (design == Design::rdd) diag["bandwidth"] = a.fit.cdfs.bandwidth;
  const auto arm = [&](const char* tag, const TailFit& f) {
    const std::string t(tag);
    diag["y_min" + t] = f.threshold();
    diag["alpha" + t] = f.alpha_hat;
    diag["c" + t] = f.c_hat;
    diag["s_min" + t] = f.s_min;
    diag["truncation" + t] = f.truncation - f.shift;
  };
  arm("0", a.fit.fit0);
  arm("1", a.fit.fit1);
  j["diagnostics"] = diag;
  write_text(cfg.out / "run.json", dump(j));
}

void cmd_simulate(const RunConfig& cfg) {
  validate(cfg);
  sim::McConfig mc;
  mc.design = cfg.design;
  mc.ns = cfg.n;
  mc.qs = cfg.q.empty() ? kTableLevels : cfg.q;
  mc.reps = cfg.reps;
  mc.seed = cfg.seed;
  mc.settings = settings_of(cfg);
  mc.subsample = subsample_of(cfg);
  mc.with_ci = cfg.ci;
  mc.threads = cfg.threads;
  const sim::McReport report = sim::run_mc(mc);
  ensure_out_dir(cfg.out);

  std::string table = "n,stat";
  for (double q : mc.qs) table += "," + format_number(q);
  table += "\n";
  const std::pair<const char*, double sim::McCell::*> stats[] = {
      {"Bias", &sim::McCell::bias},
      {"SD", &sim::McCell::sd},
      {"RMSE", &sim::McCell::rmse},
      {"95%", &sim::McCell::coverage}};
  for (std::size_t n : mc.ns) {
    for (const auto& [name, member] : stats) {
      table += std::to_string(n) + "," + name;
      for (double q : mc.qs) table += "," + table_cell(report.cell(n, q).*member);
      table += "\n";
    }
  }
  write_text(cfg.out / "table.csv", table);

  std::string cells =
      "n,q,reps,failed,truth,bias,sd,rmse,coverage,ci_failed,mean_ci_width,truth_alt,"
      "bias_alt,rmse_alt,coverage_alt,discarded_draws\n";
  for (const sim::McCell& c : report.cells) {
    cells += std::to_string(c.n) + "," + format_number(c.q) + "," + std::to_string(c.reps) +
             "," + std::to_string(c.failed) + "," + format_number(c.truth) + "," +
             format_number(c.bias) + "," + format_number(c.sd) + "," + format_number(c.rmse) +
             "," + format_number(c.coverage) + "," + std::to_string(c.ci_failed) + "," +
             format_number(c.mean_ci_width) + "," + format_number(c.truth_alt) + "," +
             format_number(c.bias_alt) + "," + format_number(c.rmse_alt) + "," +
             format_number(c.coverage_alt) + "," + std::to_string(c.discarded_draws) + "\n";
  }
  write_text(cfg.out / "cells.csv", cells);

  RunConfig recorded = cfg;
  recorded.q = mc.qs;
  json j = to_json(recorded);
  json diag;
  std::size_t failed = 0;
  for (const sim::McCell& c : report.cells) failed += c.failed;
  diag["cells"] = report.cells.size();
  diag["failed_estimates"] = failed;
  j["diagnostics"] = diag;
  write_text(cfg.out / "run.json", dump(j));
}

int run(int argc, const char* const* argv, std::ostream& err) {
  CLI::App app{"Extreme quantile treatment effects under endogeneity"};
  app.require_subcommand(1);

  std::string config_path, input, tail, design, scheme;
  std::vector<double> q;
  double omega = 0, ymin_level = 0, trim = 0, ci_level = 0;
  std::size_t b = 0, B = 0, reps = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> ns;
  std::string out;
  unsigned threads = 0;
  bool no_intercept = false, no_ci = false;

  struct Common {
    CLI::Option *config, *q, *omega, *ymin, *trim, *b, *B, *level, *seed, *out, *threads,
        *scheme;
  };
  auto add_common = [&](CLI::App* sub) {
    Common c;
    c.config = sub->add_option("--config", config_path, "flat JSON config; flags override it");
    c.q = sub->add_option("--q", q, "quantile levels, comma separated")->delimiter(',');
    c.omega = sub->add_option("--omega", omega, "tail weight exponent (default 1)");
    c.ymin = sub->add_option("--ymin-level", ymin_level, "threshold level (default 0.975)");
    c.trim = sub->add_option("--trim", trim, "propensity trimming (IV, default 0.01)");
    c.b = sub->add_option("--b", b, "subsample size (default ceil(n^0.7))");
    c.B = sub->add_option("--B", B, "number of subsamples (default 500)");
    c.level = sub->add_option("--ci-level", ci_level, "confidence level (default 0.95)");
    c.seed = sub->add_option("--seed", seed, "master seed");
    c.out = sub->add_option("--out", out, "output directory (default .)");
    c.threads = sub->add_option("--threads", threads, "worker threads, 0 = all cores");
    c.scheme = sub->add_option("--scheme", scheme,
                               "subsample statistic: refit_all, refit_survival or frozen");
    return c;
  };

  CLI::App* est_iv = app.add_subcommand("estimate-iv", "QTE with a binary instrument");
  CLI::App* est_rdd = app.add_subcommand("estimate-rdd", "QTE in a fuzzy RDD");
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo tables");
  const Common civ = add_common(est_iv);
  const Common crdd = add_common(est_rdd);
  const Common csim = add_common(simulate);
  CLI::Option* o_input_iv = est_iv->add_option("--input", input, "CSV with y,d,z,x1..xk");
  CLI::Option* o_input_rdd = est_rdd->add_option("--input", input, "CSV with y,d,r");
  CLI::Option* o_tail_iv = est_iv->add_option("--tail", tail, "upper (default) or lower");
  CLI::Option* o_tail_rdd = est_rdd->add_option("--tail", tail, "upper (default) or lower");
  CLI::Option* o_noint = est_iv->add_flag("--no-intercept", no_intercept,
                                          "no constant column in the propensity logit");
  CLI::Option* o_design = simulate->add_option("--design", design, "iv or rdd");
  CLI::Option* o_n = simulate->add_option("--n", ns, "sample sizes")->delimiter(',');
  CLI::Option* o_reps = simulate->add_option("--reps", reps, "replications per n");
  CLI::Option* o_noci = simulate->add_flag("--no-ci", no_ci, "point estimates only");
  CLI::Option* o_noint_sim = simulate->add_flag("--no-intercept", no_intercept,
                                                "no constant column in the propensity logit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    err << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    RunConfig cfg;
    const Common* c = nullptr;
    if (est_iv->parsed()) {
      cfg.command = "estimate-iv";
      c = &civ;
    } else if (est_rdd->parsed()) {
      cfg.command = "estimate-rdd";
      c = &crdd;
    } else {
      cfg.command = "simulate";
      c = &csim;
    }
    if (c->config->count()) cfg = load_config(config_path, cfg);

    if (c->q->count()) cfg.q = q;
    if (c->omega->count()) cfg.omega = omega;
    if (c->ymin->count()) cfg.ymin_level = ymin_level;
    if (c->trim->count()) cfg.trim = trim;
    if (c->b->count()) cfg.b = b;
    if (c->B->count()) cfg.B = B;
    if (c->level->count()) cfg.ci_level = ci_level;
    if (c->seed->count()) cfg.seed = seed;
    if (c->out->count()) cfg.out = out;
    if (c->threads->count()) cfg.threads = threads;
    if (c->scheme->count()) cfg.scheme = parse_scheme(scheme);
    if (o_input_iv->count() || o_input_rdd->count()) cfg.input = input;
    if (o_tail_iv->count() || o_tail_rdd->count()) cfg.tail = parse_side(tail);
    if (o_noint->count() || o_noint_sim->count()) cfg.intercept = !no_intercept;
    if (o_design->count()) cfg.design = parse_design(design);
    if (o_n->count()) cfg.n = ns;
    if (o_reps->count()) cfg.reps = reps;
    if (o_noci->count()) cfg.ci = !no_ci;

    if (cfg.command == "simulate") {
      cmd_simulate(cfg);
    } else {
      cmd_estimate(cfg);
    }
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace eqte::cli
