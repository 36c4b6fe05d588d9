#pragma once

// The command-line surface. Lives in a header so the parser and its
// flag-over-config-file-over-default precedence are testable in-process.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "commands.hpp"
#include "version.hpp"

namespace fdatest {
namespace detail {

// Values from a --config JSON object. Flags override these; these override
// built-in defaults.
class ConfigFile {
 public:
  ConfigFile() = default;

  explicit ConfigFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::InvalidConfig, "cannot open config: " + path);
    try {
      json_ = nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorKind::InvalidConfig, "config " + path + ": " + e.what());
    }
    if (!json_.is_object())
      fail(ErrorKind::InvalidConfig, "config " + path + ": expected a JSON object");
  }

  template <typename T>
  void apply(const char* key, T& slot) const {
    if (!json_.contains(key)) return;
    try {
      slot = json_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      fail(ErrorKind::InvalidConfig, std::string("config key '") + key + "' has the wrong type");
    }
  }

  std::optional<std::string> get_string(const char* key) const {
    if (!json_.contains(key)) return std::nullopt;
    if (!json_.at(key).is_string())
      fail(ErrorKind::InvalidConfig, std::string("config key '") + key + "' must be a string");
    return json_.at(key).get<std::string>();
  }

 private:
  nlohmann::json json_ = nlohmann::json::object();
};

// CLI option storage: empty optionals mean "not given on the command line".
struct CliFlags {
  std::optional<std::string> input, meta, config, out;
  std::optional<std::string> weights, hypothesis, pairs, alt_class;
  std::optional<std::string> p_rule, delta_rule, n_grid;
  std::optional<std::uint64_t> seed;
  std::optional<long> iters, cutoff_iters, power_iters, n;
  std::optional<int> p, threads;
  std::optional<double> alpha, index_value, lambda, s_smooth, m_bound;
};

inline void set_weights(const std::string& text, const char* who, WeightScheme& slot,
                        ConfigCheck& ck) {
  const auto w = try_parse_weights(text);
  if (w)
    slot = *w;
  else
    ck.require(false, std::string(who) + ": expected opt|uwq|cvm|fzz:s=<v>, got '" + text + "'");
}

inline void set_hypothesis(const std::string& text, const char* who, HypKind& slot,
                           ConfigCheck& ck) {
  const auto h = try_parse_hypothesis(text);
  if (h)
    slot = *h;
  else
    ck.require(false,
               std::string(who) + ": expected same-slope|common-trend, got '" + text + "'");
}

inline void set_pairs(const std::string& text, const char* who,
                      std::vector<std::pair<std::string, std::string>>& slot, ConfigCheck& ck) {
  const auto p = try_parse_pairs(text);
  if (p)
    slot = *p;
  else
    ck.require(false, std::string(who) + ": expected g1-g2[,g3-g4...], got '" + text + "'");
}

inline void set_n_grid(const std::string& text, const char* who, std::vector<long>& slot,
                       ConfigCheck& ck) {
  std::vector<long> grid;
  std::size_t start = 0;
  bool ok = !text.empty();
  while (ok && start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    const std::string chunk = text.substr(start, comma - start);
    char* end = nullptr;
    const long v = std::strtol(chunk.c_str(), &end, 10);
    ok = !chunk.empty() && end == chunk.c_str() + chunk.size();
    if (ok) grid.push_back(v);
    start = comma + 1;
  }
  if (ok)
    slot = std::move(grid);
  else
    ck.require(false, std::string(who) + ": expected comma-separated integers, got '" + text +
                          "'");
}

}  // namespace detail

// Parses argv, assembles the selected command's configuration (defaults,
// then --config JSON, then explicit flags), runs it, and maps errors onto
// exit codes: 1 usage/config, 2 data, 3 numerical.
inline int run_cli(int argc, const char* const* argv) {
  CLI::App app{std::string(kProgram) + " " + kVersion +
               " — global hypothesis tests for sampled curves"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kProgram) + " " + kVersion);

  detail::CliFlags fl;

  CLI::App* dec = app.add_subcommand(
      "decompose", "Project curves onto the basis; writes (j, unit, coefficient)");
  dec->add_option("--input", fl.input, "curve file: header row, time first column");
  dec->add_option("--out", fl.out, "output table");
  dec->add_option("--p", fl.p, "number of basis functions (default 65)");
  dec->add_option("--config", fl.config, "JSON file supplying any of these settings");

  CLI::App* tst = app.add_subcommand(
      "test", "Test a functional linear hypothesis across groups of curves");
  tst->add_option("--input", fl.input, "curve file: header row, time first column");
  tst->add_option("--meta", fl.meta, "metadata table: unit,group,covariate");
  tst->add_option("--out", fl.out, "per-frequency report (optional)");
  tst->add_option("--p", fl.p, "number of basis functions (default 65)");
  tst->add_option("--weights", fl.weights, "opt|uwq|cvm|fzz:s=<v> (default opt)");
  tst->add_option("--hypothesis", fl.hypothesis, "same-slope|common-trend (default same-slope)");
  tst->add_option("--pairs", fl.pairs,
                  "group pairs to contrast, e.g. east-west,east-north (default: all pairs; "
                  "labels must not contain '-' or ',')");
  tst->add_option("--iters", fl.iters, "null-simulation iterations (default 20000)");
  tst->add_option("--alpha", fl.alpha, "test level (default 0.05)");
  tst->add_option("--seed", fl.seed, "simulation seed (default 1)");
  tst->add_option("--threads", fl.threads, "worker threads (default 1)");
  tst->add_option("--config", fl.config, "JSON file supplying any of these settings");

  CLI::App* pow = app.add_subcommand(
      "power", "Simulated power of one weighted statistic against one alternative");
  pow->add_option("--out", fl.out, "output table");
  pow->add_option("--p", fl.p, "number of frequencies (default 127)");
  pow->add_option("--n", fl.n, "sample size (default 64)");
  pow->add_option("--weights", fl.weights, "opt|uwq|cvm|fzz:s=<v> (default uwq)");
  pow->add_option("--class", fl.alt_class, "alternative class: spiked|smooth (default spiked)");
  pow->add_option("--index", fl.index_value,
                  "spike position j0, or smooth decay b (default 1)");
  pow->add_option("--lambda", fl.lambda,
                  "alternative energy (default: calibrated to 40% power of the unweighted form)");
  pow->add_option("--alpha", fl.alpha, "test level (default 0.05)");
  pow->add_option("--iters", fl.iters, "iterations for cutoff and power (default 20000)");
  pow->add_option("--seed", fl.seed, "simulation seed (default 1)");
  pow->add_option("--threads", fl.threads, "worker threads (default 1)");
  pow->add_option("--config", fl.config, "JSON file supplying any of these settings");

  CLI::App* fig = app.add_subcommand(
      "figure4", "Power of every statistic across the spiked and smooth alternative grids");
  fig->add_option("--out", fl.out, "output table");
  fig->add_option("--p", fl.p, "number of frequencies (default 127)");
  fig->add_option("--n", fl.n, "sample size (default 64)");
  fig->add_option("--alpha", fl.alpha, "test level (default 0.05)");
  fig->add_option("--iters", fl.iters, "sets cutoff and power iterations together");
  fig->add_option("--cutoff-iters", fl.cutoff_iters, "null-cutoff iterations (default 20000)");
  fig->add_option("--power-iters", fl.power_iters, "power iterations (default 20000)");
  fig->add_option("--seed", fl.seed, "simulation seed (default 1)");
  fig->add_option("--threads", fl.threads, "worker threads (default 1)");
  fig->add_option("--config", fl.config, "JSON file supplying any of these settings");

  CLI::App* rts = app.add_subcommand(
      "rates", "Deterministic detectability-rate diagnostics for a weight scheme");
  rts->add_option("--out", fl.out, "output table");
  rts->add_option("--weights", fl.weights, "opt|uwq|cvm|fzz:s=<v> (default opt)");
  rts->add_option("--s", fl.s_smooth, "smoothness index, must exceed 0.5 (default 1)");
  rts->add_option("--M", fl.m_bound, "smoothness-ball radius (default 1)");
  rts->add_option("--p-rule", fl.p_rule, "frequency-count rule: cbrt|ingster (default cbrt)");
  rts->add_option("--delta-rule", fl.delta_rule, "separation rule: opt (default opt)");
  rts->add_option("--n-grid", fl.n_grid,
                  "comma-separated sample sizes (default: powers of two, 64..1048576)");
  rts->add_option("--config", fl.config, "JSON file supplying any of these settings");

  try {
    app.parse(argc, argv);

    const detail::ConfigFile cf =
        fl.config ? detail::ConfigFile(*fl.config) : detail::ConfigFile();
    detail::ConfigCheck ck;

    if (dec->parsed()) {
      DecomposeConfig cfg;
      cf.apply("input", cfg.input);
      cf.apply("out", cfg.out);
      cf.apply("p", cfg.p);
      if (fl.input) cfg.input = *fl.input;
      if (fl.out) cfg.out = *fl.out;
      if (fl.p) cfg.p = *fl.p;
      ck.finish("decompose options");
      const DecomposeResult r = cmd_decompose(cfg);
      std::cout << "wrote " << r.coeffs.p << " x " << r.coeffs.n_units
                << " coefficients to " << cfg.out
                << (r.interpolated ? " (values interpolated onto a uniform grid)" : "") << "\n";
      return 0;
    }

    if (tst->parsed()) {
      TestConfig cfg;
      cf.apply("input", cfg.input);
      cf.apply("meta", cfg.meta);
      cf.apply("out", cfg.out);
      cf.apply("p", cfg.p);
      cf.apply("iters", cfg.iterations);
      cf.apply("alpha", cfg.alpha);
      cf.apply("seed", cfg.seed);
      cf.apply("threads", cfg.threads);
      if (const auto w = cf.get_string("weights")) detail::set_weights(*w, "config key 'weights'", cfg.weights, ck);
      if (const auto h = cf.get_string("hypothesis"))
        detail::set_hypothesis(*h, "config key 'hypothesis'", cfg.hypothesis, ck);
      if (const auto pr = cf.get_string("pairs")) detail::set_pairs(*pr, "config key 'pairs'", cfg.pairs, ck);
      if (fl.input) cfg.input = *fl.input;
      if (fl.meta) cfg.meta = *fl.meta;
      if (fl.out) cfg.out = *fl.out;
      if (fl.p) cfg.p = *fl.p;
      if (fl.iters) cfg.iterations = *fl.iters;
      if (fl.alpha) cfg.alpha = *fl.alpha;
      if (fl.seed) cfg.seed = *fl.seed;
      if (fl.threads) cfg.threads = static_cast<unsigned>(std::max(1, *fl.threads));
      if (fl.weights) detail::set_weights(*fl.weights, "--weights", cfg.weights, ck);
      if (fl.hypothesis) detail::set_hypothesis(*fl.hypothesis, "--hypothesis", cfg.hypothesis, ck);
      if (fl.pairs) detail::set_pairs(*fl.pairs, "--pairs", cfg.pairs, ck);
      ck.finish("test options");
      const TestReport rep = cmd_test(cfg);
      std::cout << "units: " << rep.n_units << ", replicates: " << rep.n_rep
                << ", groups: " << rep.n_groups << ", nu: " << rep.nu
                << ", df2: " << rep.df2 << "\n"
                << "F_global = " << fmt_num(rep.global_stat) << "\n"
                << "simulated global p-value = " << fmt_num(rep.global_p) << " ("
                << cfg.iterations << " iterations, seed " << cfg.seed << ")\n"
                << "largest per-frequency F at j = " << rep.argmax_j << "\n";
      if (!cfg.out.empty()) std::cout << "wrote per-frequency report to " << cfg.out << "\n";
      return 0;
    }

    if (pow->parsed()) {
      PowerConfig cfg;
      cf.apply("out", cfg.out);
      cf.apply("p", cfg.p);
      cf.apply("n", cfg.n);
      cf.apply("alpha", cfg.alpha);
      cf.apply("iters", cfg.iterations);
      cf.apply("seed", cfg.seed);
      cf.apply("threads", cfg.threads);
      cf.apply("class", cfg.alt_class);
      cf.apply("index", cfg.index_value);
      if (const auto w = cf.get_string("weights")) detail::set_weights(*w, "config key 'weights'", cfg.weights, ck);
      {
        double lam = -1.0;
        cf.apply("lambda", lam);
        if (lam >= 0.0) cfg.lambda = lam;
      }
      if (fl.out) cfg.out = *fl.out;
      if (fl.p) cfg.p = *fl.p;
      if (fl.n) cfg.n = *fl.n;
      if (fl.alpha) cfg.alpha = *fl.alpha;
      if (fl.iters) cfg.iterations = *fl.iters;
      if (fl.seed) cfg.seed = *fl.seed;
      if (fl.threads) cfg.threads = static_cast<unsigned>(std::max(1, *fl.threads));
      if (fl.alt_class) cfg.alt_class = *fl.alt_class;
      if (fl.index_value) cfg.index_value = *fl.index_value;
      if (fl.lambda) cfg.lambda = *fl.lambda;
      if (fl.weights) detail::set_weights(*fl.weights, "--weights", cfg.weights, ck);
      ck.finish("power options");
      const PowerRow row = cmd_power(cfg);
      std::cout << row.statistic << " power against the " << row.alt_class
                << " alternative at " << fmt_num(row.index_value) << ": "
                << fmt_num(row.estimate.power) << " +- " << fmt_num(row.estimate.std_error)
                << "\nwrote " << cfg.out << "\n";
      return 0;
    }

    if (fig->parsed()) {
      Figure4CmdConfig cfg;
      cf.apply("out", cfg.out);
      cf.apply("p", cfg.sim.p);
      cf.apply("n", cfg.sim.n);
      cf.apply("alpha", cfg.sim.alpha);
      cf.apply("seed", cfg.seed);
      {
        long iters = -1, ci = -1, pi = -1;
        int threads = 0;
        cf.apply("iters", iters);
        cf.apply("cutoff_iters", ci);
        cf.apply("power_iters", pi);
        cf.apply("threads", threads);
        if (iters >= 0) {
          cfg.sim.cutoff_iterations = static_cast<std::size_t>(iters);
          cfg.sim.power_iterations = static_cast<std::size_t>(iters);
        }
        if (ci >= 0) cfg.sim.cutoff_iterations = static_cast<std::size_t>(ci);
        if (pi >= 0) cfg.sim.power_iterations = static_cast<std::size_t>(pi);
        if (threads >= 1) cfg.sim.threads = static_cast<unsigned>(threads);
      }
      if (fl.out) cfg.out = *fl.out;
      if (fl.p) cfg.sim.p = *fl.p;
      if (fl.n) cfg.sim.n = *fl.n;
      if (fl.alpha) cfg.sim.alpha = *fl.alpha;
      if (fl.seed) cfg.seed = *fl.seed;
      if (fl.iters && *fl.iters >= 0) {
        cfg.sim.cutoff_iterations = static_cast<std::size_t>(*fl.iters);
        cfg.sim.power_iterations = static_cast<std::size_t>(*fl.iters);
      }
      if (fl.cutoff_iters && *fl.cutoff_iters >= 0)
        cfg.sim.cutoff_iterations = static_cast<std::size_t>(*fl.cutoff_iters);
      if (fl.power_iters && *fl.power_iters >= 0)
        cfg.sim.power_iterations = static_cast<std::size_t>(*fl.power_iters);
      if (fl.threads) cfg.sim.threads = static_cast<unsigned>(std::max(1, *fl.threads));
      ck.finish("figure4 options");
      const Figure4Result res = cmd_figure4(cfg);
      std::cout << "wrote " << res.rows.size() << " power rows to " << cfg.out
                << " (lambda = " << fmt_num(res.lambda) << ")\n";
      return 0;
    }

    if (rts->parsed()) {
      RatesCmdConfig cfg;
      cf.apply("out", cfg.out);
      cf.apply("s", cfg.probe.s);
      cf.apply("M", cfg.probe.M);
      cf.apply("p_rule", cfg.probe.p_rule);
      cf.apply("delta_rule", cfg.probe.delta_rule);
      cf.apply("n_grid", cfg.probe.n_grid);
      if (const auto w = cf.get_string("weights")) detail::set_weights(*w, "config key 'weights'", cfg.probe.weights, ck);
      if (fl.out) cfg.out = *fl.out;
      if (fl.s_smooth) cfg.probe.s = *fl.s_smooth;
      if (fl.m_bound) cfg.probe.M = *fl.m_bound;
      if (fl.p_rule) cfg.probe.p_rule = *fl.p_rule;
      if (fl.delta_rule) cfg.probe.delta_rule = *fl.delta_rule;
      if (fl.n_grid) detail::set_n_grid(*fl.n_grid, "--n-grid", cfg.probe.n_grid, ck);
      if (fl.weights) detail::set_weights(*fl.weights, "--weights", cfg.probe.weights, ck);
      ck.finish("rates options");
      const RatesOutput out = cmd_rates(cfg);
      std::cout << "wrote " << out.probe.n_grid.size() << " rows to " << cfg.out
                << " (seq_i max/min = " << fmt_num(out.probe.ratio_i) << ")\n";
      return 0;
    }

    return 0;  // unreachable: a subcommand is required
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace fdatest
