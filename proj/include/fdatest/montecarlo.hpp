#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <thread>
#include <vector>

#include "error.hpp"
#include "fourier.hpp"
#include "random.hpp"
#include "teststats.hpp"

namespace fdatest {

enum class StatFamily { quadratic, adaptive_neyman, ht, ht_bar, f_global };

inline const char* stat_family_name(StatFamily f) {
  switch (f) {
    case StatFamily::quadratic: return "quadratic";
    case StatFamily::adaptive_neyman: return "adaptive_neyman";
    case StatFamily::ht: return "ht";
    case StatFamily::ht_bar: return "ht_bar";
    case StatFamily::f_global: return "f_global";
  }
  return "?";
}

// Everything needed to simulate one statistic's null (and alternative)
// distribution. Build through the factories; validate() re-checks the
// combination when a spec is assembled field by field.
struct StatSpec {
  StatFamily family = StatFamily::quadratic;
  std::size_t p = 0;     // number of frequency components
  std::size_t nu = 1;    // rows per component in the discrete model
  std::size_t n = 1;     // sample-size scaling inside the statistic
  WeightScheme weights = WeightScheme::uwq();        // quadratic / f_global
  double df2 = 0.0;                                  // f_global denominator df
  HTParams ht_params{};                              // ht
  std::vector<HTParams> htbar_configs;               // ht_bar
  std::map<int, double> htbar_cutoffs;               // ht_bar, keyed on k_dstar

  static StatSpec quadratic(std::size_t p, std::size_t nu, std::size_t n, WeightScheme w) {
    StatSpec s;
    s.family = StatFamily::quadratic;
    s.p = p;
    s.nu = nu;
    s.n = n;
    s.weights = w;
    s.validate();
    return s;
  }

  static StatSpec adaptive_neyman(std::size_t p, std::size_t n) {
    StatSpec s;
    s.family = StatFamily::adaptive_neyman;
    s.p = p;
    s.nu = 1;
    s.n = n;
    s.validate();
    return s;
  }

  static StatSpec ht(std::size_t p, const HTParams& params) {
    StatSpec s;
    s.family = StatFamily::ht;
    s.p = p;
    s.nu = 1;
    s.n = static_cast<std::size_t>(params.n);
    s.ht_params = params;
    s.validate();
    return s;
  }

  static StatSpec ht_bar(std::size_t p, std::vector<HTParams> configs,
                         std::map<int, double> cutoffs) {
    StatSpec s;
    s.family = StatFamily::ht_bar;
    s.p = p;
    s.nu = 1;
    s.n = configs.empty() ? 1 : static_cast<std::size_t>(configs.front().n);
    s.htbar_configs = std::move(configs);
    s.htbar_cutoffs = std::move(cutoffs);
    s.validate();
    return s;
  }

  static StatSpec f_global(std::size_t p, std::size_t nu, std::size_t n, WeightScheme w,
                           double df2) {
    StatSpec s;
    s.family = StatFamily::f_global;
    s.p = p;
    s.nu = nu;
    s.n = n;
    s.weights = w;
    s.df2 = df2;
    s.validate();
    return s;
  }

  void validate() const {
    if (p == 0) fail(ErrorKind::InvalidParameter, "StatSpec: p must be >= 1");
    if (nu == 0) fail(ErrorKind::InvalidParameter, "StatSpec: nu must be >= 1");
    if (n == 0) fail(ErrorKind::InvalidParameter, "StatSpec: n must be >= 1");
    switch (family) {
      case StatFamily::quadratic:
        break;
      case StatFamily::adaptive_neyman:
        if (nu != 1) fail(ErrorKind::UnsupportedNu, "StatSpec: adaptive_neyman needs nu == 1");
        break;
      case StatFamily::ht:
        if (nu != 1) fail(ErrorKind::UnsupportedNu, "StatSpec: ht needs nu == 1");
        if (static_cast<std::size_t>(ht_params.n) != n)
          fail(ErrorKind::InvalidParameter, "StatSpec: ht params built for a different n");
        if (p < static_cast<std::size_t>(ht_params.required_p()))
          fail(ErrorKind::InsufficientP, "StatSpec: p too small for the ht level range");
        break;
      case StatFamily::ht_bar: {
        if (nu != 1) fail(ErrorKind::UnsupportedNu, "StatSpec: ht_bar needs nu == 1");
        if (htbar_configs.empty())
          fail(ErrorKind::InvalidParameter, "StatSpec: ht_bar needs at least one config");
        for (const auto& cfg : htbar_configs) {
          if (static_cast<std::size_t>(cfg.n) != n)
            fail(ErrorKind::InvalidParameter, "StatSpec: ht_bar config built for a different n");
          if (p < static_cast<std::size_t>(cfg.required_p()))
            fail(ErrorKind::InsufficientP, "StatSpec: p too small for an ht_bar config");
          auto it = htbar_cutoffs.find(cfg.k_dstar);
          if (it == htbar_cutoffs.end())
            fail(ErrorKind::MissingCutoff, "StatSpec: no cutoff for an ht_bar config");
          if (!(it->second > 0.0))
            fail(ErrorKind::InvalidParameter, "StatSpec: ht_bar cutoffs must be positive");
        }
        break;
      }
      case StatFamily::f_global:
        if (!(df2 >= 1.0)) fail(ErrorKind::InsufficientDF, "StatSpec: f_global needs df2 >= 1");
        break;
    }
  }
};

namespace detail {

// Stateless evaluator: one simulated draw of the statistic per call.
// All randomness comes through the caller's Rng, so a per-iteration stream
// makes every draw independent of evaluation order.
class StatEval {
 public:
  explicit StatEval(const StatSpec& spec) : spec_(spec) {
    spec_.validate();
    if (spec_.family == StatFamily::quadratic || spec_.family == StatFamily::f_global)
      w_ = make_weights(spec_.weights, static_cast<int>(spec_.p), static_cast<long>(spec_.n));
    inv_sqrt_n_ = 1.0 / std::sqrt(static_cast<double>(spec_.n));
  }

  const StatSpec& spec() const { return spec_; }

  // Null model: each discrete component is an independent N(0, 1/n) draw
  // (f_global instead draws its per-frequency F ratios directly).
  double null_draw(Rng& rng, std::vector<double>& buf) const {
    if (spec_.family == StatFamily::f_global) return f_global_draw(rng);
    fill_null(rng, buf);
    return eval_model(buf);
  }

  // Location alternative: component j is theta_j + N(0, 1/n). Only defined
  // for the nu == 1 model families.
  double power_draw(Rng& rng, const std::vector<double>& theta,
                    std::vector<double>& buf) const {
    fill_null(rng, buf);
    for (std::size_t j = 0; j < spec_.p; ++j) buf[j] += theta[j];
    return eval_model(buf);
  }

 private:
  void fill_null(Rng& rng, std::vector<double>& buf) const {
    buf.resize(spec_.p * spec_.nu);
    for (auto& v : buf) v = rng.next_gaussian() * inv_sqrt_n_;
  }

  double eval_model(const std::vector<double>& y) const {
    const double dn = static_cast<double>(spec_.n);
    switch (spec_.family) {
      case StatFamily::quadratic:
        return quad_kernel(y.data(), static_cast<int>(spec_.p), static_cast<int>(spec_.nu), dn,
                           w_.data());
      case StatFamily::adaptive_neyman: {
        int k_hat = 0;
        return an_kernel(y.data(), static_cast<int>(spec_.p), dn, &k_hat);
      }
      case StatFamily::ht:
        return ht_kernel(y.data(), dn, spec_.ht_params);
      case StatFamily::ht_bar: {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& cfg : spec_.htbar_configs) {
          const double c = spec_.htbar_cutoffs.at(cfg.k_dstar);
          best = std::max(best, ht_kernel(y.data(), dn, cfg) / c);
        }
        return best;
      }
      default:
        fail(ErrorKind::InvalidParameter, "StatEval: family has no model evaluation");
    }
  }

  double f_global_draw(Rng& rng) const {
    const double dnu = static_cast<double>(spec_.nu);
    double sum = 0.0;
    for (std::size_t j = 0; j < spec_.p; ++j) {
      const double num = chisq_draw(rng, dnu) / dnu;
      const double den = chisq_draw(rng, spec_.df2) / spec_.df2;
      sum += w_[j] * (num / den);
    }
    return sum;
  }

  StatSpec spec_;
  std::vector<double> w_;
  double inv_sqrt_n_ = 1.0;
};

template <typename Fn>
inline void run_indexed(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const unsigned used = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  std::vector<std::thread> pool;
  pool.reserve(used);
  for (unsigned t = 0; t < used; ++t) {
    pool.emplace_back([&, t]() {
      for (std::size_t i = t; i < count; i += used) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

constexpr std::size_t kMinIterations = 1000;

// Simulated null distribution, sorted ascending. Iteration i uses stream
// (seed, i), so the sample is independent of the thread count.
inline std::vector<double> null_sample(const StatSpec& spec, std::size_t iterations,
                                       std::uint64_t seed, unsigned threads = 1) {
  if (iterations < kMinIterations)
    fail(ErrorKind::InvalidParameter, "null_sample: iterations must be >= 1000");
  detail::StatEval eval(spec);
  std::vector<double> out(iterations);
  detail::run_indexed(iterations, threads, [&](std::size_t i) {
    Rng rng(RandomStream{seed, i});
    std::vector<double> buf;
    out[i] = eval.null_draw(rng, buf);
  });
  std::sort(out.begin(), out.end());
  return out;
}

// Level-alpha rejection cutoff from an ascending null sample: element number
// ceil((1 - alpha) * m), 1-based.
inline double cutoff(const std::vector<double>& sorted_null, double alpha) {
  if (sorted_null.empty()) fail(ErrorKind::EmptySample, "cutoff: empty null sample");
  if (!(alpha > 0.0 && alpha < 1.0))
    fail(ErrorKind::InvalidParameter, "cutoff: alpha must be in (0, 1)");
  if (!std::is_sorted(sorted_null.begin(), sorted_null.end()))
    fail(ErrorKind::InvalidParameter, "cutoff: null sample must be sorted ascending");
  const double m = static_cast<double>(sorted_null.size());
  auto idx = static_cast<std::size_t>(std::ceil((1.0 - alpha) * m));
  if (idx < 1) idx = 1;
  if (idx > sorted_null.size()) idx = sorted_null.size();
  return sorted_null[idx - 1];
}

// Add-one Monte Carlo p-value: (1 + #{null >= observed}) / (1 + m).
inline double p_value(const std::vector<double>& sorted_null, double observed) {
  if (sorted_null.empty()) fail(ErrorKind::EmptySample, "p_value: empty null sample");
  if (!std::is_sorted(sorted_null.begin(), sorted_null.end()))
    fail(ErrorKind::InvalidParameter, "p_value: null sample must be sorted ascending");
  const auto it = std::lower_bound(sorted_null.begin(), sorted_null.end(), observed);
  const auto count = static_cast<double>(sorted_null.end() - it);
  return (1.0 + count) / (1.0 + static_cast<double>(sorted_null.size()));
}

struct TestOutcome {
  double statistic = 0.0;
  double cutoff = 0.0;
  double p_value = 0.0;
  bool reject = false;
  double alpha = 0.0;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
};

inline TestOutcome run_test(const StatSpec& spec, double observed, double alpha,
                            std::size_t iterations, std::uint64_t seed, unsigned threads = 1) {
  const auto null = null_sample(spec, iterations, seed, threads);
  TestOutcome out;
  out.statistic = observed;
  out.cutoff = cutoff(null, alpha);
  out.p_value = p_value(null, observed);
  out.reject = observed > out.cutoff;
  out.alpha = alpha;
  out.iterations = iterations;
  out.seed = seed;
  return out;
}

struct PowerEstimate {
  double power = 0.0;
  double std_error = 0.0;
  std::size_t rejections = 0;
  std::size_t iterations = 0;
};

// Rejection rate against a fixed cutoff under the location alternative
// theta. Only the nu == 1 model families have that alternative; f_global is
// simulated as a ratio and has no component-shift version.
inline PowerEstimate power(const StatSpec& spec, const std::vector<double>& theta,
                           double stat_cutoff, std::size_t iterations, std::uint64_t seed,
                           unsigned threads = 1) {
  if (spec.family == StatFamily::f_global)
    fail(ErrorKind::InvalidParameter, "power: f_global has no location alternative");
  if (spec.nu != 1) fail(ErrorKind::InvalidParameter, "power: requires nu == 1");
  if (theta.size() != spec.p)
    fail(ErrorKind::LengthMismatch, "power: theta length must equal p");
  if (iterations < kMinIterations)
    fail(ErrorKind::InvalidParameter, "power: iterations must be >= 1000");
  detail::StatEval eval(spec);
  std::vector<std::uint8_t> hit(iterations, 0);
  detail::run_indexed(iterations, threads, [&](std::size_t i) {
    Rng rng(RandomStream{seed, i});
    std::vector<double> buf;
    hit[i] = eval.power_draw(rng, theta, buf) > stat_cutoff ? 1 : 0;
  });
  PowerEstimate out;
  out.iterations = iterations;
  for (auto h : hit) out.rejections += h;
  out.power = static_cast<double>(out.rejections) / static_cast<double>(iterations);
  out.std_error = std::sqrt(out.power * (1.0 - out.power) / static_cast<double>(iterations));
  return out;
}

// Stationary Gaussian noise curves: eps(t_l) = sum_m gamma_m eta_{l - lag_m}
// with the white-noise index wrapped circularly over the grid and the
// coefficient vector rescaled so the marginal variance is one.
struct MANoiseSpec {
  std::vector<double> gamma;
  int first_lag = 0;
};

inline CurveSet ma_noise_curves(const MANoiseSpec& spec, const Grid& grid, int n_units,
                                int n_rep, std::uint64_t seed) {
  grid.validate();
  if (n_units < 1 || n_rep < 1)
    fail(ErrorKind::InvalidParameter, "ma_noise_curves: need n_units >= 1 and n_rep >= 1");
  double energy = 0.0;
  for (double g : spec.gamma) {
    if (!std::isfinite(g)) fail(ErrorKind::InvalidParameter, "ma_noise_curves: gamma not finite");
    energy += g * g;
  }
  if (!(energy > 0.0))
    fail(ErrorKind::AllZeroGamma, "ma_noise_curves: gamma must have a nonzero coefficient");
  std::vector<double> g(spec.gamma);
  const double scale = 1.0 / std::sqrt(energy);
  for (auto& v : g) v *= scale;

  const int r = grid.r;
  CurveSet curves = CurveSet::zeros(grid, n_rep, n_units);
  std::vector<double> eta(static_cast<std::size_t>(r));
  for (int i = 0; i < n_rep; ++i) {
    for (int k = 0; k < n_units; ++k) {
      const std::uint64_t sid =
          static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n_units) +
          static_cast<std::uint64_t>(k);
      Rng rng(RandomStream{seed, sid});
      for (auto& e : eta) e = rng.next_gaussian();
      for (int l = 0; l < r; ++l) {
        double acc = 0.0;
        for (std::size_t m = 0; m < g.size(); ++m) {
          const int lag = spec.first_lag + static_cast<int>(m);
          int src = (l - lag) % r;
          if (src < 0) src += r;
          acc += g[m] * eta[static_cast<std::size_t>(src)];
        }
        curves.at(i, k, l) = acc;
      }
    }
  }
  return curves;
}

}  // namespace fdatest
