#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "error.hpp"
#include "montecarlo.hpp"
#include "numerics.hpp"
#include "random.hpp"
#include "teststats.hpp"

namespace fdatest {

// Mean sequence concentrated at a single frequency: theta_{j0} = sqrt(lambda).
inline std::vector<double> spiked_theta(int j0, double lambda, int p) {
  if (p < 1) fail(ErrorKind::InvalidParameter, "spiked_theta: need p >= 1");
  if (j0 < 1 || j0 > p)
    fail(ErrorKind::IndexOutOfRange, "spiked_theta: j0 = " + std::to_string(j0) +
                                         " outside 1.." + std::to_string(p));
  if (!(lambda >= 0.0)) fail(ErrorKind::InvalidParameter, "spiked_theta: lambda must be >= 0");
  std::vector<double> theta(static_cast<std::size_t>(p), 0.0);
  theta[static_cast<std::size_t>(j0 - 1)] = std::sqrt(lambda);
  return theta;
}

namespace detail {

// Decay exponent chosen so roughly 80% of the energy sits below frequency b*p.
inline double smooth_d(double b) {
  return 0.5 * (std::log(0.2) / std::log(1.0 - b) - 1.0);
}

}  // namespace detail

// Polynomially decaying mean sequence theta_j ∝ (1 - j/(p+1))^d, rescaled so
// the total energy is lambda.
inline std::vector<double> smooth_theta(double b, double lambda, int p) {
  if (p < 1) fail(ErrorKind::InvalidParameter, "smooth_theta: need p >= 1");
  if (!(b > 0.0 && b < 1.0))
    fail(ErrorKind::InvalidB, "smooth_theta: b must lie in (0, 1), got " + std::to_string(b));
  if (!(lambda >= 0.0)) fail(ErrorKind::InvalidParameter, "smooth_theta: lambda must be >= 0");
  const double d = detail::smooth_d(b);
  std::vector<double> theta(static_cast<std::size_t>(p));
  double energy = 0.0;
  for (int j = 1; j <= p; ++j) {
    const double base = 1.0 - static_cast<double>(j) / (p + 1.0);
    const double v = std::pow(base, d);
    theta[static_cast<std::size_t>(j - 1)] = v;
    energy += v * v;
  }
  const double scale = std::sqrt(lambda / energy);
  for (auto& v : theta) v *= scale;
  return theta;
}

// Energy lambda making the flat-weight test's power equal target_power at
// level alpha: solves P(chi-square(p*nu, n*lambda) > q_{1-alpha}) = target.
inline double calibrate_lambda(int p, long n, int nu, double alpha,
                               double target_power = 0.4) {
  if (p < 1 || n < 1 || nu < 1)
    fail(ErrorKind::InvalidParameter, "calibrate_lambda: need p, n, nu >= 1");
  if (!(alpha > 0.0 && alpha < 1.0))
    fail(ErrorKind::InvalidParameter, "calibrate_lambda: alpha must be in (0, 1)");
  if (!(target_power > 0.0 && target_power < 1.0))
    fail(ErrorKind::InvalidParameter, "calibrate_lambda: target must be in (0, 1)");
  if (target_power == alpha) return 0.0;  // the null already rejects at rate alpha
  const double df = static_cast<double>(p) * nu;
  const double q = chisq_quantile(df, 1.0 - alpha);
  const auto excess = [&](double delta) { return chisq_sf(df, delta, q) - target_power; };
  const double at_zero = excess(0.0);
  if (std::abs(at_zero) <= 1e-9) return 0.0;  // inside the quantile solver's resolution
  if (at_zero > 0.0)
    fail(ErrorKind::NoConvergence, "calibrate_lambda: target power below the test's size");
  double hi = df;
  int guard = 0;
  while (excess(hi) < 0.0) {
    hi *= 2.0;
    if (++guard > 60) fail(ErrorKind::NoConvergence, "calibrate_lambda: no finite bracket");
  }
  const double delta = bisect(excess, 0.0, hi, 1e-8);
  return delta / static_cast<double>(n);
}

// Smoothness summary of an alternative: the ellipsoid Sum_j j^{2s} theta_j^2
// <= M it sits on.
struct SobolevFit {
  double s = 0.5;
  double M = 0.0;
};

// 20 spike positions spread evenly over 1..p (nearest integer, ties up,
// duplicates dropped).
inline std::vector<int> spiked_j0_grid(int p) {
  if (p < 1) fail(ErrorKind::InvalidParameter, "spiked_j0_grid: need p >= 1");
  std::vector<int> grid;
  for (int i = 1; i <= 20; ++i) {
    const double x = 1.0 + (p - 1.0) * (i - 1.0) / 19.0;
    const int j0 = static_cast<int>(std::floor(x + 0.5));
    if (grid.empty() || grid.back() != j0) grid.push_back(j0);
  }
  return grid;
}

// 20 decay settings evenly spaced over [0.01, 0.80], endpoints included.
inline std::vector<double> smooth_b_grid() {
  std::vector<double> grid(20);
  for (int i = 1; i <= 20; ++i)
    grid[static_cast<std::size_t>(i - 1)] = 0.01 + 0.79 * (i - 1.0) / 19.0;
  return grid;
}

// Spiked alternatives sit exactly on Sum j^{2s} theta^2 = lambda*(p+1):
// s solves j0^{2s} = p + 1. The degenerate spike at j0 = 1 borrows the value
// at the grid's second position so the summary stays finite.
inline SobolevFit sobolev_fit_spiked(int j0, double lambda, int p) {
  if (p < 1) fail(ErrorKind::InvalidParameter, "sobolev_fit_spiked: need p >= 1");
  if (j0 < 1 || j0 > p)
    fail(ErrorKind::IndexOutOfRange, "sobolev_fit_spiked: j0 = " + std::to_string(j0) +
                                         " outside 1.." + std::to_string(p));
  SobolevFit fit;
  fit.M = lambda * (p + 1.0);
  int at = j0;
  if (j0 == 1) {
    const auto grid = spiked_j0_grid(p);
    if (grid.size() < 2)
      fail(ErrorKind::InvalidParameter, "sobolev_fit_spiked: no second grid point at this p");
    at = grid[1];
  }
  fit.s = std::log(p + 1.0) / (2.0 * std::log(static_cast<double>(at)));
  return fit;
}

// Reference ellipsoid size for the smooth class: Sum_j j * theta_j^2 at
// s = 1/2 with the decay indexed at b = 0.81.
inline double smooth_reference_M(double lambda, int p) {
  if (!(lambda > 0.0))
    fail(ErrorKind::InvalidParameter, "smooth_reference_M: lambda must be positive");
  const auto theta = smooth_theta(0.81, lambda, p);
  double m = 0.0;
  for (int j = 1; j <= p; ++j) {
    const double t = theta[static_cast<std::size_t>(j - 1)];
    m += static_cast<double>(j) * t * t;
  }
  return m;
}

// Fits s so the smooth alternative sits exactly on the reference ellipsoid:
// Sum_j j^{2s} theta_j(b)^2 = M_ref, solved on s in [0.5, 10].
inline SobolevFit sobolev_fit_smooth(double b, double lambda, int p, double M_ref) {
  if (!(b > 0.0 && b <= 0.80))
    fail(ErrorKind::InvalidB, "sobolev_fit_smooth: b must lie in (0, 0.80]");
  if (!(lambda > 0.0))
    fail(ErrorKind::InvalidParameter, "sobolev_fit_smooth: lambda must be positive");
  if (!(M_ref > 0.0))
    fail(ErrorKind::InvalidParameter, "sobolev_fit_smooth: M_ref must be positive");
  const auto theta = smooth_theta(b, lambda, p);
  const auto moment = [&](double s) {
    double acc = 0.0;
    for (int j = 1; j <= p; ++j) {
      const double t = theta[static_cast<std::size_t>(j - 1)];
      acc += std::pow(static_cast<double>(j), 2.0 * s) * t * t;
    }
    return acc - M_ref;
  };
  SobolevFit fit;
  fit.M = M_ref;
  fit.s = bisect(moment, 0.5, 10.0, 1e-8);
  return fit;
}

// ---------------------------------------------------------------------------
// power-curve experiment

struct Figure4Config {
  int p = 127;
  long n = 64;
  double alpha = 0.05;
  std::size_t cutoff_iterations = 20000;
  std::size_t power_iterations = 20000;
  unsigned threads = 1;
};

struct Figure4Row {
  std::string alt_class;   // "spiked" or "smooth"
  double index_value = 0;  // spike position j0, or decay setting b
  std::string statistic;   // fzz, uwq, opt, cvm, an, htbar
  double power = 0.0;
  double std_error = 0.0;
};

struct Figure4Result {
  double lambda = 0.0;
  double spiked_s_lo = 0.0, spiked_s_hi = 0.0;
  double smooth_s_lo = 0.0, smooth_s_hi = 0.0;
  std::vector<Figure4Row> rows;
};

namespace detail {

// Deterministic sub-seed dispenser: call order fixes the assignment, so one
// base seed reproduces the whole experiment.
class SeedSequence {
 public:
  explicit SeedSequence(std::uint64_t base) : base_(base) {}
  std::uint64_t next() { return mix64(base_ + 0x9E3779B97F4A7C15ull * ++counter_); }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

}  // namespace detail

// Simulated power of the six statistics over both alternative classes.
// Sub-seeds are drawn in a fixed order (shared cutoffs, then per class:
// threshold-config cutoffs, the combined threshold cutoff, per-alternative
// fzz cutoffs, then powers alternative-by-alternative), so the table is a
// pure function of (config, seed).
inline Figure4Result run_figure4(const Figure4Config& cfg, std::uint64_t seed) {
  if (cfg.p < 2) fail(ErrorKind::InvalidParameter, "run_figure4: need p >= 2");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    fail(ErrorKind::InvalidParameter, "run_figure4: alpha must be in (0, 1)");
  if (cfg.cutoff_iterations < kMinIterations || cfg.power_iterations < kMinIterations)
    fail(ErrorKind::InvalidParameter, "run_figure4: iteration counts must be >= 1000");

  detail::SeedSequence seq(seed);
  Figure4Result out;
  out.lambda = calibrate_lambda(cfg.p, cfg.n, 1, cfg.alpha);

  const auto j0s = spiked_j0_grid(cfg.p);
  const auto bs = smooth_b_grid();
  const double m_ref = smooth_reference_M(out.lambda, cfg.p);

  std::vector<double> s_spiked, s_smooth;
  s_spiked.reserve(j0s.size());
  for (int j0 : j0s) s_spiked.push_back(sobolev_fit_spiked(j0, out.lambda, cfg.p).s);
  s_smooth.reserve(bs.size());
  for (double b : bs) s_smooth.push_back(sobolev_fit_smooth(b, out.lambda, cfg.p, m_ref).s);
  out.spiked_s_lo = *std::min_element(s_spiked.begin(), s_spiked.end());
  out.spiked_s_hi = *std::max_element(s_spiked.begin(), s_spiked.end());
  out.smooth_s_lo = *std::min_element(s_smooth.begin(), s_smooth.end());
  out.smooth_s_hi = *std::max_element(s_smooth.begin(), s_smooth.end());

  const std::size_t P = static_cast<std::size_t>(cfg.p);
  struct Shared {
    const char* name;
    StatSpec spec;
    double cut = 0.0;
  };
  std::vector<Shared> shared;
  shared.push_back({"uwq", StatSpec::quadratic(P, 1, static_cast<std::size_t>(cfg.n),
                                               WeightScheme::uwq())});
  shared.push_back({"opt", StatSpec::quadratic(P, 1, static_cast<std::size_t>(cfg.n),
                                               WeightScheme::opt())});
  shared.push_back({"cvm", StatSpec::quadratic(P, 1, static_cast<std::size_t>(cfg.n),
                                               WeightScheme::cvm())});
  shared.push_back({"an", StatSpec::adaptive_neyman(P, static_cast<std::size_t>(cfg.n))});
  for (auto& st : shared)
    st.cut = cutoff(null_sample(st.spec, cfg.cutoff_iterations, seq.next(), cfg.threads),
                    cfg.alpha);

  struct ClassPlan {
    const char* name;
    const std::vector<double>* index;  // j0 (as double) or b
    const std::vector<double>* s_fit;
  };
  std::vector<double> j0s_real(j0s.begin(), j0s.end());
  const ClassPlan plans[2] = {{"spiked", &j0s_real, &s_spiked}, {"smooth", &bs, &s_smooth}};

  for (const auto& plan : plans) {
    const bool spiked = std::string(plan.name) == "spiked";
    const double s_lo = spiked ? out.spiked_s_lo : out.smooth_s_lo;
    const double s_hi = spiked ? out.spiked_s_hi : out.smooth_s_hi;

    const auto configs = ht_bar_configs(cfg.n, s_lo, s_hi);
    std::map<int, double> config_cuts;
    for (const auto& prm : configs) {
      const auto spec = StatSpec::ht(P, prm);
      config_cuts[prm.k_dstar] =
          cutoff(null_sample(spec, cfg.cutoff_iterations, seq.next(), cfg.threads), cfg.alpha);
    }
    const auto htbar_spec = StatSpec::ht_bar(P, configs, config_cuts);
    const double htbar_cut = cutoff(
        null_sample(htbar_spec, cfg.cutoff_iterations, seq.next(), cfg.threads), cfg.alpha);

    std::map<double, StatSpec> fzz_spec_by_s;
    std::map<double, double> fzz_cut_by_s;
    for (double s : *plan.s_fit) {
      if (fzz_cut_by_s.count(s)) continue;
      const auto spec = StatSpec::quadratic(P, 1, static_cast<std::size_t>(cfg.n),
                                            WeightScheme::fzz(s));
      fzz_spec_by_s.emplace(s, spec);
      fzz_cut_by_s[s] =
          cutoff(null_sample(spec, cfg.cutoff_iterations, seq.next(), cfg.threads), cfg.alpha);
    }

    for (std::size_t i = 0; i < plan.index->size(); ++i) {
      const double idx = (*plan.index)[i];
      const double s_alt = (*plan.s_fit)[i];
      const auto theta = spiked
                             ? spiked_theta(static_cast<int>(idx), out.lambda, cfg.p)
                             : smooth_theta(idx, out.lambda, cfg.p);
      const auto emit = [&](const char* stat, const StatSpec& spec, double cut) {
        const auto est =
            power(spec, theta, cut, cfg.power_iterations, seq.next(), cfg.threads);
        out.rows.push_back({plan.name, idx, stat, est.power, est.std_error});
      };
      emit("fzz", fzz_spec_by_s.at(s_alt), fzz_cut_by_s.at(s_alt));
      for (const auto& st : shared) emit(st.name, st.spec, st.cut);
      emit("htbar", htbar_spec, htbar_cut);
    }
  }
  return out;
}

}  // namespace fdatest
