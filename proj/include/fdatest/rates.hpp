#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "error.hpp"
#include "numerics.hpp"
#include "teststats.hpp"

namespace fdatest {

// Weight-sequence summaries driving the detectability bounds: the tapering
// mass S, the minimal squared weight W, and the ratio U = q*W(q)/S(p).
struct TaperSummaries {
  double S = 0.0;
  double W = 0.0;
  double U = 0.0;
};

namespace detail {

inline void require_nonincreasing(const std::vector<double>& w) {
  for (std::size_t j = 1; j < w.size(); ++j)
    if (w[j] > w[j - 1])
      fail(ErrorKind::NotMonotone, "weights must be nonincreasing for the rate summaries");
}

// Squared weight at a real index: linear in q between the integer values.
inline double w2_interp(const std::vector<double>& w, double q) {
  const double fl = std::floor(q);
  const auto lo = static_cast<std::size_t>(fl);
  const double w2lo = w[lo - 1] * w[lo - 1];
  if (q == fl || lo >= w.size()) return w2lo;
  const double w2hi = w[lo] * w[lo];
  return w2lo + (q - fl) * (w2hi - w2lo);
}

}  // namespace detail

inline TaperSummaries taper_summaries(const std::vector<double>& weights, int p, double q) {
  if (weights.empty()) fail(ErrorKind::InvalidParameter, "taper_summaries: empty weights");
  if (p < 1 || static_cast<std::size_t>(p) > weights.size())
    fail(ErrorKind::IndexOutOfRange, "taper_summaries: p outside 1..length(weights)");
  if (!(q >= 1.0) || !(q <= static_cast<double>(p)))
    fail(ErrorKind::IndexOutOfRange, "taper_summaries: q outside [1, p]");
  detail::require_nonincreasing(weights);
  TaperSummaries t;
  double w_min2 = weights[0] * weights[0];
  for (int j = 1; j <= p; ++j) {
    const double w2 = weights[static_cast<std::size_t>(j - 1)] * weights[static_cast<std::size_t>(j - 1)];
    t.S += w2;
    w_min2 = std::min(w_min2, w2);
  }
  t.W = w_min2;
  t.U = q * detail::w2_interp(weights, q) / t.S;
  return t;
}

// Probe settings: named rules keep the configuration serializable.
//   p_rule "cbrt":    p_n = ceil((n^2 / ln n)^{1/3})
//   p_rule "ingster": p_n = ceil(n^{2/(4s+1)})
//   delta_rule "opt": delta_n = (n^2 / ln n)^{-s/(4s+1)}
struct RatesConfig {
  WeightScheme weights = WeightScheme::opt();
  std::string p_rule = "cbrt";
  std::string delta_rule = "opt";
  double s = 1.0;
  double M = 1.0;
  std::vector<long> n_grid;
};

inline std::vector<long> default_n_grid() {
  std::vector<long> grid;
  for (int k = 6; k <= 20; ++k) grid.push_back(1L << k);
  return grid;
}

namespace detail {

inline int p_of_n(const std::string& rule, long n, double stilde) {
  const double dn = static_cast<double>(n);
  if (rule == "cbrt") return static_cast<int>(std::ceil(std::pow(dn * dn / std::log(dn), 1.0 / 3.0)));
  if (rule == "ingster") return static_cast<int>(std::ceil(std::pow(dn, 2.0 / stilde)));
  fail(ErrorKind::InvalidRule, "unknown p rule '" + rule + "' (use cbrt or ingster)");
}

inline double delta_of_n(const std::string& rule, long n, double s, double stilde) {
  const double dn = static_cast<double>(n);
  if (rule == "opt") return std::pow(dn * dn / std::log(dn), -s / stilde);
  fail(ErrorKind::InvalidRule, "unknown delta rule '" + rule + "' (use opt)");
}

inline void validate_rates_config(const RatesConfig& cfg) {
  if (!(cfg.s > 0.5)) fail(ErrorKind::InvalidParameter, "rates: need s > 1/2");
  if (!(cfg.M > 0.0)) fail(ErrorKind::InvalidParameter, "rates: need M > 0");
  if (cfg.n_grid.empty()) fail(ErrorKind::InvalidParameter, "rates: empty n grid");
  long last = 1;
  for (long n : cfg.n_grid) {
    if (n < 2) fail(ErrorKind::InvalidParameter, "rates: grid entries must be >= 2");
    if (n <= last && last > 1)
      fail(ErrorKind::InvalidParameter, "rates: grid must increase strictly");
    last = n;
  }
}

inline double loglog_slope(const std::vector<long>& ns, const std::vector<double>& seq) {
  const std::size_t m = ns.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += std::log(static_cast<double>(ns[i]));
    my += std::log(seq[i]);
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dx = std::log(static_cast<double>(ns[i])) - mx;
    sxy += dx * (std::log(seq[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace detail

// Finite-n evaluation of the two boundedness sequences, with least-squares
// log-log slopes as the boundedness heuristic. Diagnostics only: a slope near
// zero suggests a bounded sequence, nothing is proven.
struct RateProbe {
  std::vector<long> n_grid;
  std::vector<int> p_values;
  std::vector<double> q_values;
  std::vector<std::uint8_t> q_clamped;  // q_n forced into [1, p_n]
  std::vector<double> seq_i;            // n^2 U(p_n) p_n^{-stilde}
  std::vector<double> seq_ii;           // n^2 U(p_n, q_n) q_n^{-stilde}
  double slope_i = 0.0, slope_ii = 0.0;
  double ratio_i = 0.0, ratio_ii = 0.0;  // max/min over the grid
};

inline RateProbe rate_probe(const RatesConfig& cfg) {
  detail::validate_rates_config(cfg);
  const double stilde = 4.0 * cfg.s + 1.0;
  RateProbe out;
  out.n_grid = cfg.n_grid;
  for (long n : cfg.n_grid) {
    const int p = detail::p_of_n(cfg.p_rule, n, stilde);
    const auto w = make_weights(cfg.weights, p, n);
    detail::require_nonincreasing(w);
    const double dn = static_cast<double>(n);
    const double dp = static_cast<double>(p);
    const auto at_p = taper_summaries(w, p, dp);
    out.p_values.push_back(p);
    out.seq_i.push_back(dn * dn * at_p.U * std::pow(dp, -stilde));

    const double delta = detail::delta_of_n(cfg.delta_rule, n, cfg.s, stilde);
    double q = std::pow(delta / cfg.M, -1.0 / cfg.s);
    bool clamped = false;
    if (q < 1.0) {
      q = 1.0;
      clamped = true;
    } else if (q > dp) {
      q = dp;
      clamped = true;
    }
    const auto at_q = taper_summaries(w, p, q);
    out.q_values.push_back(q);
    out.q_clamped.push_back(clamped ? 1 : 0);
    out.seq_ii.push_back(dn * dn * at_q.U * std::pow(q, -stilde));
  }
  out.slope_i = detail::loglog_slope(out.n_grid, out.seq_i);
  out.slope_ii = detail::loglog_slope(out.n_grid, out.seq_ii);
  const auto mm_i = std::minmax_element(out.seq_i.begin(), out.seq_i.end());
  const auto mm_ii = std::minmax_element(out.seq_ii.begin(), out.seq_ii.end());
  out.ratio_i = *mm_i.second / *mm_i.first;
  out.ratio_ii = *mm_ii.second / *mm_ii.first;
  return out;
}

namespace detail {

// Root of n^2 * U(p, q) * q^{-stilde} = 1 on q in [1, p]; the map decreases
// in q for nonincreasing weights. Saturates at p when even q = p leaves the
// expression above one.
inline std::pair<double, bool> boundary_q(const std::vector<double>& w, int p, long n,
                                          double stilde) {
  const double dn = static_cast<double>(n);
  const double dp = static_cast<double>(p);
  double S = 0.0;
  for (int j = 1; j <= p; ++j) S += w[static_cast<std::size_t>(j - 1)] * w[static_cast<std::size_t>(j - 1)];
  const auto excess = [&](double q) {
    return dn * dn * q * w2_interp(w, q) / S * std::pow(q, -stilde) - 1.0;
  };
  if (excess(1.0) < 0.0)
    fail(ErrorKind::NoBracket, "boundary_q: expression below one already at q = 1");
  if (excess(dp) > 0.0) return {dp, true};
  return {bisect(excess, 1.0, dp, 1e-9), false};
}

}  // namespace detail

struct BoundaryRate {
  long n = 0;
  int p = 0;
  double q = 1.0;
  double delta_hat = 0.0;
  bool saturated = false;
};

// Per-n detectability threshold of the configured test: solve the boundary
// equation for q, then report delta_hat = M * q^{-s}.
inline std::vector<BoundaryRate> boundary_rate_scan(const RatesConfig& cfg) {
  detail::validate_rates_config(cfg);
  const double stilde = 4.0 * cfg.s + 1.0;
  std::vector<BoundaryRate> out;
  out.reserve(cfg.n_grid.size());
  for (long n : cfg.n_grid) {
    const int p = detail::p_of_n(cfg.p_rule, n, stilde);
    const auto w = make_weights(cfg.weights, p, n);
    detail::require_nonincreasing(w);
    const auto root = detail::boundary_q(w, p, n, stilde);
    BoundaryRate r;
    r.n = n;
    r.p = p;
    r.q = root.first;
    r.saturated = root.second;
    r.delta_hat = cfg.M * std::pow(r.q, -cfg.s);
    out.push_back(r);
  }
  return out;
}

}  // namespace fdatest
