#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "error.hpp"
#include "model.hpp"
#include "numerics.hpp"

namespace fdatest {

// ---------------------------------------------------------------------------
// frequency weights

enum class WeightKind { opt, uwq, cvm, fzz, custom };

struct WeightScheme {
  WeightKind kind = WeightKind::opt;
  double s = 1.0;               // smoothness parameter for the fzz taper
  std::vector<double> custom;   // explicit weights when kind == custom

  static WeightScheme opt() { return {WeightKind::opt, 1.0, {}}; }
  static WeightScheme uwq() { return {WeightKind::uwq, 1.0, {}}; }
  static WeightScheme cvm() { return {WeightKind::cvm, 1.0, {}}; }
  static WeightScheme fzz(double s) { return {WeightKind::fzz, s, {}}; }
  static WeightScheme custom_weights(std::vector<double> w) {
    return {WeightKind::custom, 1.0, std::move(w)};
  }

  std::string name() const {
    switch (kind) {
      case WeightKind::opt: return "opt";
      case WeightKind::uwq: return "uwq";
      case WeightKind::cvm: return "cvm";
      case WeightKind::fzz: {
        char buf[32];
        std::snprintf(buf, sizeof buf, "fzz:s=%g", s);
        return buf;
      }
      case WeightKind::custom: return "custom";
    }
    return "?";
  }
};

// Weights w_1..w_p for a sample size n. All schemes produce values in (0, 1].
inline std::vector<double> make_weights(const WeightScheme& scheme, int p, long n) {
  if (p < 1) fail(ErrorKind::InvalidParameter, "make_weights: need p >= 1");
  if (n < 1) fail(ErrorKind::InvalidParameter, "make_weights: need n >= 1");
  std::vector<double> w(p);
  switch (scheme.kind) {
    case WeightKind::opt:
      for (int j = 1; j <= p; ++j) w[j - 1] = 1.0 / std::sqrt(static_cast<double>(j));
      break;
    case WeightKind::uwq:
      for (int j = 1; j <= p; ++j) w[j - 1] = 1.0;
      break;
    case WeightKind::cvm:
      for (int j = 1; j <= p; ++j) w[j - 1] = 1.0 / (static_cast<double>(j) * j);
      break;
    case WeightKind::fzz: {
      if (!(scheme.s > 0.5))
        fail(ErrorKind::InvalidParameter, "make_weights: fzz taper needs s > 1/2");
      const double s = scheme.s;
      const double xi = std::pow(static_cast<double>(n), -4.0 * s / (4.0 * s + 1.0));
      for (int j = 1; j <= p; ++j) {
        // 1 - t^2/(1+t)^2 written as (1+2t)/(1+t)^2 so positivity is exact
        const double t = std::pow(static_cast<double>(j), 2.0 * s) * xi;
        w[j - 1] = (1.0 + 2.0 * t) / ((1.0 + t) * (1.0 + t));
      }
      break;
    }
    case WeightKind::custom: {
      if (scheme.custom.size() < static_cast<std::size_t>(p))
        fail(ErrorKind::LengthMismatch,
             "make_weights: custom scheme provides " + std::to_string(scheme.custom.size()) +
                 " weights, need " + std::to_string(p));
      for (int j = 0; j < p; ++j) w[j] = scheme.custom[j];
      break;
    }
  }
  for (int j = 0; j < p; ++j)
    if (!(w[j] > 0.0) || !(w[j] <= 1.0))
      fail(ErrorKind::InvalidWeight, "make_weights: weight " + std::to_string(j + 1) +
                                         " = " + std::to_string(w[j]) +
                                         " falls outside (0,1]");
  return w;
}

// ---------------------------------------------------------------------------
// statistic kernels over raw per-frequency summaries (shared with simulation)

namespace detail {

inline double quad_kernel(const double* Y, int p, int nu, double n, const double* w) {
  double acc = 0.0;
  for (int jj = 0; jj < p; ++jj) {
    double row = 0.0;
    for (int c = 0; c < nu; ++c) {
      const double v = Y[static_cast<std::size_t>(jj) * nu + c];
      row += v * v;
    }
    acc += w[jj] * row;
  }
  return n * acc;
}

inline double an_kernel(const double* Y, int p, double n, int* k_hat_out) {
  double running = 0.0;
  double best = 0.0;
  int best_k = 0;
  for (int k = 1; k <= p; ++k) {
    const double v = Y[k - 1];
    running += n * v * v;
    const double cand = (running - k) / std::sqrt(static_cast<double>(k));
    if (best_k == 0 || cand > best) {  // strict: ties keep the smallest k
      best = cand;
      best_k = k;
    }
  }
  if (k_hat_out) *k_hat_out = best_k;
  return best;
}

}  // namespace detail

// Weighted quadratic statistic n * sum_j w_j |Y_j|^2.
inline double quadratic_stat(const DiscreteModel& model, const std::vector<double>& weights) {
  model.validate();
  if (weights.size() != static_cast<std::size_t>(model.p))
    fail(ErrorKind::LengthMismatch, "quadratic_stat: weights length " +
                                        std::to_string(weights.size()) + " vs p = " +
                                        std::to_string(model.p));
  for (std::size_t j = 0; j < weights.size(); ++j)
    if (!(weights[j] > 0.0) || !(weights[j] <= 1.0))
      fail(ErrorKind::InvalidWeight, "quadratic_stat: weight " + std::to_string(j + 1) +
                                         " falls outside (0,1]");
  return detail::quad_kernel(model.Y.data(), model.p, model.nu,
                             static_cast<double>(model.n), weights.data());
}

inline double quadratic_stat(const DiscreteModel& model, const WeightScheme& scheme) {
  return quadratic_stat(model, make_weights(scheme, model.p, model.n));
}

// Adaptive truncation: max_k (N_k - k)/sqrt(k) with N_k the cumulative scaled
// energy of the first k frequencies; ties resolve to the smallest k.
struct AdaptiveNeyman {
  double stat = 0.0;
  int k_hat = 0;
};

inline AdaptiveNeyman adaptive_neyman(const DiscreteModel& model) {
  model.validate();
  if (model.nu != 1)
    fail(ErrorKind::UnsupportedNu, "adaptive_neyman: defined for nu = 1 only");
  AdaptiveNeyman out;
  out.stat = detail::an_kernel(model.Y.data(), model.p, static_cast<double>(model.n), &out.k_hat);
  return out;
}

// ---------------------------------------------------------------------------
// dyadic (wavelet-style) frequency bookkeeping

// Level k slot l (1-based within the level) occupies flat index 2^k + l - 1.
inline int wavelet_index(int k, int l) {
  if (k < 0 || k > 30) fail(ErrorKind::InvalidPosition, "wavelet_index: level out of range");
  if (l < 1 || l > (1 << k))
    fail(ErrorKind::InvalidPosition, "wavelet_index: slot " + std::to_string(l) +
                                         " outside level " + std::to_string(k));
  return (1 << k) + l - 1;
}

struct WaveletPosition {
  int level;
  int slot;  // 1-based within the level
};

inline WaveletPosition level_of(int j) {
  if (j < 1) fail(ErrorKind::InvalidPosition, "level_of: index must be >= 1");
  int k = 0;
  while ((1 << (k + 1)) <= j) ++k;
  return {k, j - (1 << k) + 1};
}

// Mean of Z^2 1{|Z| > xi} for standard normal Z: 2(xi phi(xi) + 1 - Phi(xi)).
inline double mu_ht(double xi) {
  if (!(xi >= 0.0)) fail(ErrorKind::InvalidParameter, "mu_ht: threshold must be >= 0");
  const PdfCdf nc = std_normal(xi);
  return 2.0 * (xi * nc.pdf + 1.0 - nc.cdf);
}

// Smallest integer strictly greater than x.
inline int ceil_exceed(double x) {
  const double fl = std::floor(x);
  if (x == fl) return static_cast<int>(fl) + 1;
  return static_cast<int>(std::ceil(x));
}

// ---------------------------------------------------------------------------
// thresholded dyadic statistic

struct HTParams {
  long n = 2;
  double s = 1.0;
  int k_star = 1;       // top dyadic level: smallest k with 2^k >= n
  int k_dstar = 0;      // last fully-summed level, set by the smoothness s
  bool one_sided = false;

  int required_p() const { return (1 << (k_star + 1)) - 1; }
  double xi(int k) const {
    return std::sqrt((k - k_dstar + 8.0) * std::log(2.0));
  }
};

// k_star uses the standard ceiling of log2(n) computed in integer arithmetic
// (n = 64 -> 6); k_dstar uses the strictly-exceeding ceiling of its ratio.
inline HTParams make_ht_params(long n, double s, bool one_sided = false) {
  if (n < 2) fail(ErrorKind::InvalidParameter, "make_ht_params: need n >= 2");
  if (!(s > 0.5)) fail(ErrorKind::InvalidParameter, "make_ht_params: need s > 1/2");
  HTParams p;
  p.n = n;
  p.s = s;
  p.one_sided = one_sided;
  p.k_star = 0;
  while ((1L << p.k_star) < n) ++p.k_star;
  const double ratio = std::log2(static_cast<double>(n)) / (2.0 * s + 0.5);
  int kd = ceil_exceed(ratio);
  if (kd < 0) kd = 0;
  if (kd > p.k_star) kd = p.k_star;
  p.k_dstar = kd;
  return p;
}

namespace detail {

inline double ht_kernel(const double* Y, double n, const HTParams& prm) {
  const double sqrt_n = std::sqrt(n);
  double acc = 0.0;
  // fully summed block: levels 0..k_dstar, each term n Y^2 - 1
  for (int k = 0; k <= prm.k_dstar; ++k)
    for (int l = 1; l <= (1 << k); ++l) {
      const int j = (1 << k) + l - 1;
      const double v = Y[j - 1];
      acc += n * v * v - 1.0;
    }
  // thresholded block: levels k_dstar+1..k_star, centered by mu_ht
  for (int k = prm.k_dstar + 1; k <= prm.k_star; ++k) {
    const double xi = prm.xi(k);
    const double mu = mu_ht(xi);
    for (int l = 1; l <= (1 << k); ++l) {
      const int j = (1 << k) + l - 1;
      const double v = Y[j - 1];
      const double z = sqrt_n * v;
      const bool keep = prm.one_sided ? (z > xi) : (std::abs(z) > xi);
      acc += (keep ? n * v * v : 0.0) - mu;
    }
  }
  return acc;
}

}  // namespace detail

inline double ht_stat(const DiscreteModel& model, const HTParams& params) {
  model.validate();
  if (model.nu != 1) fail(ErrorKind::UnsupportedNu, "ht_stat: defined for nu = 1 only");
  if (model.n != params.n)
    fail(ErrorKind::InvalidParameter, "ht_stat: model n differs from the parameter n");
  if (model.p < params.required_p())
    fail(ErrorKind::InsufficientP, "ht_stat: needs p >= " + std::to_string(params.required_p()) +
                                       ", got " + std::to_string(model.p));
  return detail::ht_kernel(model.Y.data(), static_cast<double>(model.n), params);
}

// Distinct threshold configurations met when s sweeps (s_lo, s_hi) at 1e-3
// resolution; one entry per distinct k_dstar, ordered by increasing k_dstar.
inline std::vector<HTParams> ht_bar_configs(long n, double s_lo, double s_hi,
                                            bool one_sided = false) {
  if (!(s_lo > 0.5)) fail(ErrorKind::InvalidParameter, "ht_bar_configs: need s_lo > 1/2");
  if (!(s_hi > s_lo)) fail(ErrorKind::InvalidParameter, "ht_bar_configs: need s_hi > s_lo");
  std::map<int, HTParams> by_kd;
  for (long i = 1;; ++i) {
    const double s = s_lo + 1e-3 * static_cast<double>(i);
    if (!(s < s_hi)) break;
    const HTParams prm = make_ht_params(n, s, one_sided);
    by_kd.emplace(prm.k_dstar, prm);
  }
  if (by_kd.empty())
    fail(ErrorKind::InvalidParameter, "ht_bar_configs: range narrower than the sweep step");
  std::vector<HTParams> out;
  out.reserve(by_kd.size());
  for (const auto& kv : by_kd) out.push_back(kv.second);
  return out;
}

// Max over configurations of the thresholded statistic scaled by its cutoff;
// cutoffs are keyed on k_dstar.
inline double ht_bar_stat(const DiscreteModel& model, const std::vector<HTParams>& configs,
                          const std::map<int, double>& cutoffs) {
  if (configs.empty()) fail(ErrorKind::InvalidParameter, "ht_bar_stat: no configurations");
  double best = 0.0;
  bool first = true;
  for (const HTParams& prm : configs) {
    const auto it = cutoffs.find(prm.k_dstar);
    if (it == cutoffs.end())
      fail(ErrorKind::MissingCutoff,
           "ht_bar_stat: no cutoff for configuration k_dstar = " + std::to_string(prm.k_dstar));
    if (!(it->second > 0.0))
      fail(ErrorKind::InvalidParameter, "ht_bar_stat: cutoffs must be positive");
    const double v = ht_stat(model, prm) / it->second;
    if (first || v > best) {
      best = v;
      first = false;
    }
  }
  return best;
}

}  // namespace fdatest
