#pragma once

// Command layer: validated run configurations and the five operations behind
// the CLI — decompose, test, power, figure4, rates. Each command checks its
// whole configuration up front (reporting every violation in one error),
// computes, and writes a self-describing comma-separated table.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "flm.hpp"
#include "io.hpp"
#include "montecarlo.hpp"
#include "rates.hpp"
#include "simstudy.hpp"
#include "version.hpp"

namespace fdatest {

// Usage and configuration problems exit 1, broken input data exits 2,
// numerical failures exit 3; success is 0.
inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::ParseError:
    case ErrorKind::NonMonotoneTime:
    case ErrorKind::EmptyFile:
    case ErrorKind::IOError:
    case ErrorKind::EmptyGroup:
    case ErrorKind::EmptySample:
    case ErrorKind::ResolutionExceeded:
    case ErrorKind::InsufficientDF:
      return 2;
    case ErrorKind::NotSPD:
    case ErrorKind::RankDeficient:
    case ErrorKind::NoBracket:
    case ErrorKind::NoConvergence:
    case ErrorKind::NotMonotone:
      return 3;
    default:
      return 1;
  }
}

namespace detail {

// Collects every configuration violation so the user sees them all at once.
class ConfigCheck {
 public:
  void require(bool ok, const std::string& problem) {
    if (!ok) problems_.push_back(problem);
  }
  void finish(const char* command) const {
    if (problems_.empty()) return;
    std::string msg(command);
    msg += ": invalid configuration";
    for (const auto& p : problems_) msg += "\n  - " + p;
    fail(ErrorKind::InvalidConfig, msg);
  }

 private:
  std::vector<std::string> problems_;
};

inline void check_weights(ConfigCheck& ck, const WeightScheme& w) {
  if (w.kind == WeightKind::fzz)
    ck.require(w.s > 0.5, "fzz weights need s > 0.5, got " + fmt_num(w.s));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// textual option parsing shared by the CLI and JSON config files

// "opt" | "uwq" | "cvm" | "fzz:s=<v>"
inline std::optional<WeightScheme> try_parse_weights(const std::string& text) {
  if (text == "opt") return WeightScheme::opt();
  if (text == "uwq") return WeightScheme::uwq();
  if (text == "cvm") return WeightScheme::cvm();
  if (text.rfind("fzz:s=", 0) == 0) {
    const std::string num = text.substr(6);
    char* end = nullptr;
    const double s = std::strtod(num.c_str(), &end);
    if (!num.empty() && end == num.c_str() + num.size() && std::isfinite(s))
      return WeightScheme::fzz(s);
  }
  return std::nullopt;
}

inline std::optional<HypKind> try_parse_hypothesis(const std::string& text) {
  if (text == "same-slope") return HypKind::same_slope;
  if (text == "common-trend") return HypKind::common_trend;
  return std::nullopt;
}

inline const char* hypothesis_name(HypKind k) {
  return k == HypKind::same_slope ? "same-slope" : "common-trend";
}

// "g1-g2,g1-g3" as group-label pairs; empty text means every pair
inline std::optional<std::vector<std::pair<std::string, std::string>>> try_parse_pairs(
    const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    const std::string chunk = text.substr(start, comma - start);
    const std::size_t dash = chunk.find('-');
    if (dash == std::string::npos || dash == 0 || dash + 1 >= chunk.size())
      return std::nullopt;
    out.emplace_back(chunk.substr(0, dash), chunk.substr(dash + 1));
    start = comma + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// decompose

struct DecomposeConfig {
  std::string input;
  std::string out;
  int p = 65;

  void validate() const {
    detail::ConfigCheck ck;
    ck.require(!input.empty(), "--input is required");
    ck.require(!out.empty(), "--out is required");
    ck.require(p >= 1, "p must be at least 1, got " + std::to_string(p));
    ck.finish("decompose");
  }
};

struct DecomposeResult {
  FourierCoeffs coeffs;
  std::vector<std::string> units;
  bool interpolated = false;
};

// Writes one row (j, unit, coefficient) per frequency and unit, with the
// coefficient averaged across replicates.
inline DecomposeResult cmd_decompose(const DecomposeConfig& cfg) {
  cfg.validate();
  const LoadedCurves lc = load_curves(cfg.input);
  const FourierCoeffs coeffs = decompose(lc.curves, cfg.p);

  Table t;
  t.comments = {std::string(kProgram) + " " + kVersion,
                "command: decompose",
                "input: " + cfg.input,
                "p: " + std::to_string(cfg.p),
                "units: " + std::to_string(coeffs.n_units),
                "replicates: " + std::to_string(coeffs.n_rep),
                "interpolated: " + std::string(lc.interpolated ? "yes" : "no"),
                "coefficient: mean across replicates",
                "seed: n/a (deterministic)",
                "iterations: n/a (deterministic)"};
  t.columns = {"j", "unit", "coefficient"};
  for (int jj = 0; jj < coeffs.p; ++jj)
    for (int k = 0; k < coeffs.n_units; ++k) {
      double mean = 0.0;
      for (int i = 0; i < coeffs.n_rep; ++i) mean += coeffs.at(i, jj, k);
      mean /= coeffs.n_rep;
      t.rows.push_back({std::to_string(jj + 1), lc.units[static_cast<std::size_t>(k)],
                        fmt_num(mean)});
    }
  write_table(cfg.out, t);
  return {coeffs, lc.units, lc.interpolated};
}

// ---------------------------------------------------------------------------
// test

struct TestConfig {
  std::string input;
  std::string meta;
  std::string out;  // optional: empty writes no file
  int p = 65;
  WeightScheme weights = WeightScheme::opt();
  HypKind hypothesis = HypKind::same_slope;
  std::vector<std::pair<std::string, std::string>> pairs;  // empty = every pair
  long iterations = 20000;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  unsigned threads = 1;

  void validate() const {
    detail::ConfigCheck ck;
    ck.require(!input.empty(), "--input is required");
    ck.require(!meta.empty(), "--meta is required");
    ck.require(p >= 1, "p must be at least 1, got " + std::to_string(p));
    ck.require(iterations >= static_cast<long>(kMinIterations),
               "iters must be at least 1000, got " + std::to_string(iterations));
    ck.require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1), got " + fmt_num(alpha));
    ck.require(threads >= 1, "threads must be at least 1");
    detail::check_weights(ck, weights);
    ck.finish("test");
  }
};

struct TestReport {
  std::vector<double> F;       // per-frequency statistics
  std::vector<double> freq_p;  // F(nu, df2) upper-tail p-values
  int nu = 1;
  long df2 = 0;
  int argmax_j = 1;  // 1-based frequency with the largest F
  double global_stat = 0.0;
  double global_p = 1.0;
  double cutoff = 0.0;
  int n_units = 0;
  int n_rep = 1;
  int n_groups = 0;
  bool interpolated = false;
};

// The full data path: ingest curves and groups, decompose, test the
// functional linear hypothesis per frequency, combine with the chosen
// weights, and calibrate the combined statistic by null simulation.
inline TestReport cmd_test(const TestConfig& cfg) {
  cfg.validate();
  const LoadedCurves lc = load_curves(cfg.input);
  const GroupTable gt = load_group_table(cfg.meta, lc.units);

  const auto group_id = [&](const std::string& name) -> int {
    for (std::size_t g = 0; g < gt.group_names.size(); ++g)
      if (gt.group_names[g] == name) return static_cast<int>(g);
    fail(ErrorKind::InvalidConfig, "test: unknown group label '" + name + "'");
  };
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(cfg.pairs.size());
  for (const auto& pr : cfg.pairs) pairs.emplace_back(group_id(pr.first), group_id(pr.second));

  const FourierCoeffs coeffs = decompose(lc.curves, cfg.p);
  DesignSpec design;
  design.X = make_group_design(gt.layout);
  design.L = build_hypothesis(cfg.hypothesis, pairs, gt.layout);
  const FPerFreq per = component_F(coeffs, design);
  const std::vector<double> w =
      make_weights(cfg.weights, cfg.p, static_cast<long>(coeffs.n_rep));

  TestReport rep;
  rep.F = per.F;
  rep.nu = per.nu;
  rep.df2 = per.df2;
  rep.global_stat = f_global(per.F, w);
  rep.freq_p.resize(per.F.size());
  for (std::size_t j = 0; j < per.F.size(); ++j)
    rep.freq_p[j] = f_sf(per.nu, static_cast<double>(per.df2), per.F[j]);
  rep.argmax_j =
      1 + static_cast<int>(std::max_element(per.F.begin(), per.F.end()) - per.F.begin());
  rep.n_units = coeffs.n_units;
  rep.n_rep = coeffs.n_rep;
  rep.n_groups = gt.layout.n_groups;
  rep.interpolated = lc.interpolated;

  const StatSpec null_spec = StatSpec::f_global(
      static_cast<std::size_t>(cfg.p), static_cast<std::size_t>(per.nu),
      static_cast<std::size_t>(coeffs.n_rep), cfg.weights, static_cast<double>(per.df2));
  const std::vector<double> null_draws =
      null_sample(null_spec, static_cast<std::size_t>(cfg.iterations), cfg.seed, cfg.threads);
  rep.global_p = p_value(null_draws, rep.global_stat);
  rep.cutoff = cutoff(null_draws, cfg.alpha);

  if (!cfg.out.empty()) {
    Table t;
    t.comments = {std::string(kProgram) + " " + kVersion,
                  "command: test",
                  "input: " + cfg.input,
                  "meta: " + cfg.meta,
                  "hypothesis: " + std::string(hypothesis_name(cfg.hypothesis)),
                  "weights: " + cfg.weights.name(),
                  "units: " + std::to_string(rep.n_units) + ", replicates: " +
                      std::to_string(rep.n_rep) + ", groups: " + std::to_string(rep.n_groups),
                  "nu: " + std::to_string(rep.nu) + ", df2: " + std::to_string(rep.df2),
                  "statistic: F_global = sum_{j=1}^{" + std::to_string(cfg.p) + "} w_j F_j",
                  "F_global: " + fmt_num(rep.global_stat),
                  "global p-value: " + fmt_num(rep.global_p) + " (simulated)",
                  "cutoff at alpha=" + fmt_num(cfg.alpha) + ": " + fmt_num(rep.cutoff),
                  "interpolated: " + std::string(rep.interpolated ? "yes" : "no"),
                  "seed: " + std::to_string(cfg.seed),
                  "iterations: " + std::to_string(cfg.iterations)};
    t.columns = {"j", "F", "p_value"};
    for (std::size_t j = 0; j < rep.F.size(); ++j)
      t.rows.push_back(
          {std::to_string(j + 1), fmt_num(rep.F[j]), fmt_num(rep.freq_p[j])});
    write_table(cfg.out, t);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// power

struct PowerConfig {
  std::string out;
  int p = 127;
  long n = 64;
  double alpha = 0.05;
  long iterations = 20000;  // null calibration and power alike
  std::uint64_t seed = 1;
  unsigned threads = 1;
  WeightScheme weights = WeightScheme::uwq();
  std::string alt_class = "spiked";  // spiked | smooth
  double index_value = 1.0;          // spike position j0, or decay setting b
  std::optional<double> lambda;      // default: calibrated to 40% UWQ power

  void validate() const {
    detail::ConfigCheck ck;
    ck.require(!out.empty(), "--out is required");
    ck.require(p >= 1, "p must be at least 1, got " + std::to_string(p));
    ck.require(n >= 1, "n must be at least 1, got " + std::to_string(n));
    ck.require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1), got " + fmt_num(alpha));
    ck.require(iterations >= static_cast<long>(kMinIterations),
               "iters must be at least 1000, got " + std::to_string(iterations));
    ck.require(threads >= 1, "threads must be at least 1");
    const bool spiked = alt_class == "spiked";
    ck.require(spiked || alt_class == "smooth",
               "class must be 'spiked' or 'smooth', got '" + alt_class + "'");
    if (spiked)
      ck.require(index_value == std::floor(index_value) && index_value >= 1.0 &&
                     index_value <= static_cast<double>(p),
                 "spiked index must be an integer in [1, p], got " + fmt_num(index_value));
    else if (alt_class == "smooth")
      ck.require(index_value > 0.0 && index_value < 1.0,
                 "smooth shape b must lie in (0,1), got " + fmt_num(index_value));
    if (lambda) ck.require(*lambda >= 0.0, "lambda must be nonnegative, got " + fmt_num(*lambda));
    detail::check_weights(ck, weights);
    ck.finish("power");
  }
};

struct PowerRow {
  std::string statistic;
  std::string alt_class;
  double index_value = 0.0;
  double lambda = 0.0;
  double cutoff = 0.0;
  PowerEstimate estimate;
};

// Power of one tapered statistic against one alternative, with the cutoff
// simulated under the null at the same iteration count.
inline PowerRow cmd_power(const PowerConfig& cfg) {
  cfg.validate();
  const double lambda =
      cfg.lambda ? *cfg.lambda : calibrate_lambda(cfg.p, cfg.n, 1, cfg.alpha, 0.4);
  const std::vector<double> theta =
      cfg.alt_class == "spiked"
          ? spiked_theta(static_cast<int>(cfg.index_value), lambda, cfg.p)
          : smooth_theta(cfg.index_value, lambda, cfg.p);

  const StatSpec spec = StatSpec::quadratic(static_cast<std::size_t>(cfg.p), 1,
                                            static_cast<std::size_t>(cfg.n), cfg.weights);
  detail::SeedSequence seq(cfg.seed);
  const std::vector<double> null_draws =
      null_sample(spec, static_cast<std::size_t>(cfg.iterations), seq.next(), cfg.threads);
  PowerRow row;
  row.statistic = cfg.weights.name();
  row.alt_class = cfg.alt_class;
  row.index_value = cfg.index_value;
  row.lambda = lambda;
  row.cutoff = cutoff(null_draws, cfg.alpha);
  row.estimate = power(spec, theta, row.cutoff, static_cast<std::size_t>(cfg.iterations),
                       seq.next(), cfg.threads);

  Table t;
  t.comments = {std::string(kProgram) + " " + kVersion,
                "command: power",
                "p: " + std::to_string(cfg.p) + ", n: " + std::to_string(cfg.n) +
                    ", alpha: " + fmt_num(cfg.alpha),
                "lambda: " + fmt_num(lambda) +
                    (cfg.lambda ? "" : " (calibrated to 40% power of the unweighted form)"),
                "seed: " + std::to_string(cfg.seed),
                "iterations: " + std::to_string(cfg.iterations) + " (null and power)"};
  t.columns = {"statistic", "class", "index_value", "lambda", "cutoff", "power", "std_error"};
  t.rows.push_back({row.statistic, row.alt_class, fmt_num(row.index_value), fmt_num(row.lambda),
                    fmt_num(row.cutoff), fmt_num(row.estimate.power),
                    fmt_num(row.estimate.std_error)});
  write_table(cfg.out, t);
  return row;
}

// ---------------------------------------------------------------------------
// figure4

struct Figure4CmdConfig {
  std::string out;
  Figure4Config sim;
  std::uint64_t seed = 1;

  void validate() const {
    detail::ConfigCheck ck;
    ck.require(!out.empty(), "--out is required");
    ck.require(sim.p >= 2, "p must be at least 2, got " + std::to_string(sim.p));
    ck.require(sim.n >= 1, "n must be at least 1, got " + std::to_string(sim.n));
    ck.require(sim.alpha > 0.0 && sim.alpha < 1.0,
               "alpha must lie in (0,1), got " + fmt_num(sim.alpha));
    ck.require(sim.cutoff_iterations >= kMinIterations,
               "cutoff iterations must be at least 1000, got " +
                   std::to_string(sim.cutoff_iterations));
    ck.require(sim.power_iterations >= kMinIterations,
               "power iterations must be at least 1000, got " +
                   std::to_string(sim.power_iterations));
    ck.require(sim.threads >= 1, "threads must be at least 1");
    ck.finish("figure4");
  }
};

// The two-class power study: every statistic against every spiked and smooth
// alternative, written as plot-ready rows.
inline Figure4Result cmd_figure4(const Figure4CmdConfig& cfg) {
  cfg.validate();
  const Figure4Result res = run_figure4(cfg.sim, cfg.seed);

  Table t;
  t.comments = {std::string(kProgram) + " " + kVersion,
                "command: figure4",
                "p: " + std::to_string(cfg.sim.p) + ", n: " + std::to_string(cfg.sim.n) +
                    ", alpha: " + fmt_num(cfg.sim.alpha),
                "lambda: " + fmt_num(res.lambda),
                "spiked smoothness range: [" + fmt_num(res.spiked_s_lo) + ", " +
                    fmt_num(res.spiked_s_hi) + "]",
                "smooth smoothness range: [" + fmt_num(res.smooth_s_lo) + ", " +
                    fmt_num(res.smooth_s_hi) + "]",
                "seed: " + std::to_string(cfg.seed),
                "cutoff iterations: " + std::to_string(cfg.sim.cutoff_iterations),
                "power iterations: " + std::to_string(cfg.sim.power_iterations)};
  t.columns = {"class", "index_value", "statistic", "power", "std_error"};
  for (const Figure4Row& r : res.rows)
    t.rows.push_back({r.alt_class, fmt_num(r.index_value), r.statistic, fmt_num(r.power),
                      fmt_num(r.std_error)});
  write_table(cfg.out, t);
  return res;
}

// ---------------------------------------------------------------------------
// rates

struct RatesCmdConfig {
  std::string out;
  RatesConfig probe;

  void validate() const {
    detail::ConfigCheck ck;
    ck.require(!out.empty(), "--out is required");
    ck.require(probe.s > 0.5, "s must exceed 0.5, got " + fmt_num(probe.s));
    ck.require(probe.M > 0.0, "M must be positive, got " + fmt_num(probe.M));
    ck.require(probe.p_rule == "cbrt" || probe.p_rule == "ingster",
               "p_rule must be 'cbrt' or 'ingster', got '" + probe.p_rule + "'");
    ck.require(probe.delta_rule == "opt", "delta_rule must be 'opt', got '" +
                                              probe.delta_rule + "'");
    bool grid_ok = true;  // an empty grid falls back to the default sweep
    for (std::size_t i = 0; grid_ok && i < probe.n_grid.size(); ++i)
      grid_ok = probe.n_grid[i] >= 2 && (i == 0 || probe.n_grid[i] > probe.n_grid[i - 1]);
    ck.require(grid_ok, "n grid must be strictly increasing with entries >= 2");
    detail::check_weights(ck, probe.weights);
    ck.finish("rates");
  }
};

struct RatesOutput {
  RateProbe probe;
  std::vector<BoundaryRate> boundary;
};

// Deterministic rate diagnostics: the two detectability sequences and the
// boundary separation per sample size.
inline RatesOutput cmd_rates(const RatesCmdConfig& cfg) {
  cfg.validate();
  RatesConfig probe = cfg.probe;
  if (probe.n_grid.empty()) probe.n_grid = default_n_grid();
  RatesOutput out{rate_probe(probe), boundary_rate_scan(probe)};

  std::size_t saturated = 0;
  for (const BoundaryRate& b : out.boundary) saturated += b.saturated ? 1 : 0;

  Table t;
  t.comments = {std::string(kProgram) + " " + kVersion,
                "command: rates",
                "weights: " + cfg.probe.weights.name(),
                "p_rule: " + cfg.probe.p_rule + ", delta_rule: " + cfg.probe.delta_rule,
                "s: " + fmt_num(cfg.probe.s) + ", M: " + fmt_num(cfg.probe.M),
                "seq_i log-log slope: " + fmt_num(out.probe.slope_i) +
                    ", max/min: " + fmt_num(out.probe.ratio_i),
                "seq_ii log-log slope: " + fmt_num(out.probe.slope_ii) +
                    ", max/min: " + fmt_num(out.probe.ratio_ii),
                "interpolation: linear in squared weights between integer frequencies",
                "saturated boundary points: " + std::to_string(saturated) + " of " +
                    std::to_string(out.boundary.size()),
                "seed: n/a (deterministic)",
                "iterations: n/a (deterministic)"};
  t.columns = {"n", "seq_i", "seq_ii", "delta_hat"};
  for (std::size_t i = 0; i < out.probe.n_grid.size(); ++i)
    t.rows.push_back({std::to_string(out.probe.n_grid[i]), fmt_num(out.probe.seq_i[i]),
                      fmt_num(out.probe.seq_ii[i]), fmt_num(out.boundary[i].delta_hat)});
  write_table(cfg.out, t);
  return out;
}

}  // namespace fdatest
