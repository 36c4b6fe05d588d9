#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "fourier.hpp"
#include "matrix.hpp"
#include "model.hpp"

namespace fdatest {

// ---------------------------------------------------------------------------
// design + contrast specification

struct DesignSpec {
  Matrix X;  // units x parameters
  Matrix L;  // parameters x contrasts

  int n_units() const { return static_cast<int>(X.rows()); }
  int n_params() const { return static_cast<int>(X.cols()); }
  int nu() const { return static_cast<int>(L.cols()); }

  void validate() const;
};

namespace detail {

inline void check_full_column_rank(const Matrix& m, const char* who) {
  const std::vector<double> sigma = singular_values(m);
  const double s_max = sigma.back();
  const double s_min = sigma.front();
  if (s_max == 0.0 || s_min <= 1e-10 * s_max)
    fail(ErrorKind::RankDeficient, std::string(who) + ": columns are linearly dependent");
}

}  // namespace detail

inline void DesignSpec::validate() const {
  if (X.rows() == 0 || X.cols() == 0)
    fail(ErrorKind::DimensionMismatch, "DesignSpec: empty design matrix");
  if (L.rows() != X.cols())
    fail(ErrorKind::DimensionMismatch, "DesignSpec: contrast rows " + std::to_string(L.rows()) +
                                           " vs design parameters " + std::to_string(X.cols()));
  if (L.cols() < 1) fail(ErrorKind::DimensionMismatch, "DesignSpec: no contrast columns");
  if (L.cols() > L.rows())
    fail(ErrorKind::DimensionMismatch, "DesignSpec: more contrasts than parameters");
  if (X.cols() > X.rows())
    fail(ErrorKind::DimensionMismatch, "DesignSpec: more parameters than units");
  detail::check_full_column_rank(X, "DesignSpec design");
  detail::check_full_column_rank(L, "DesignSpec contrast");
}

// ---------------------------------------------------------------------------
// least squares over replicated coefficient responses

namespace detail {

// mean over replicates of coefficients at frequency jj, as a unit vector
inline std::vector<double> mean_response(const FourierCoeffs& coeffs, int jj) {
  std::vector<double> out(coeffs.n_units, 0.0);
  for (int i = 0; i < coeffs.n_rep; ++i)
    for (int k = 0; k < coeffs.n_units; ++k) out[k] += coeffs.at(i, jj, k);
  for (auto& v : out) v /= coeffs.n_rep;
  return out;
}

}  // namespace detail

// Per-frequency least squares estimates; row jj holds beta-hat for frequency jj+1.
inline Matrix fit_ls(const FourierCoeffs& coeffs, const Matrix& x) {
  if (coeffs.n_units != static_cast<int>(x.rows()))
    fail(ErrorKind::DimensionMismatch, "fit_ls: coefficient units " +
                                           std::to_string(coeffs.n_units) + " vs design rows " +
                                           std::to_string(x.rows()));
  detail::check_full_column_rank(x, "fit_ls design");
  const Matrix a = sym_inverse(transpose(x) * x);
  const Matrix axt = a * transpose(x);  // P x N
  Matrix beta(coeffs.p, x.cols());
  for (int jj = 0; jj < coeffs.p; ++jj) {
    const std::vector<double> ybar = detail::mean_response(coeffs, jj);
    const std::vector<double> b = matvec(axt, ybar);
    for (std::size_t c = 0; c < b.size(); ++c) beta(jj, c) = b[c];
  }
  return beta;
}

struct SigmaEstimate {
  std::vector<double> sigma2;  // per frequency
  long df2 = 0;                // n*N - P
};

// Residual mean square per frequency, pooled over replicates and units.
inline SigmaEstimate estimate_sigma(const FourierCoeffs& coeffs, const Matrix& x) {
  const long df2 = static_cast<long>(coeffs.n_rep) * coeffs.n_units -
                   static_cast<long>(x.cols());
  if (df2 < 1)
    fail(ErrorKind::InsufficientDF,
         "estimate_sigma: residual degrees of freedom " + std::to_string(df2));
  const Matrix beta = fit_ls(coeffs, x);
  SigmaEstimate out;
  out.df2 = df2;
  out.sigma2.assign(coeffs.p, 0.0);
  for (int jj = 0; jj < coeffs.p; ++jj) {
    double acc = 0.0;
    for (int i = 0; i < coeffs.n_rep; ++i)
      for (int k = 0; k < coeffs.n_units; ++k) {
        double fitted = 0.0;
        for (std::size_t c = 0; c < x.cols(); ++c) fitted += x(k, c) * beta(jj, c);
        const double r = coeffs.at(i, jj, k) - fitted;
        acc += r * r;
      }
    out.sigma2[jj] = acc / static_cast<double>(df2);
  }
  return out;
}

// ---------------------------------------------------------------------------
// reduction to per-frequency contrast summaries

struct SigmaSpec {
  bool is_known = false;
  std::vector<double> sigma;  // used when is_known

  static SigmaSpec known(std::vector<double> s) { return {true, std::move(s)}; }
  static SigmaSpec estimated() { return {false, {}}; }
};

// Y_j = H L^T (X^T X)^{-1} X^T ybar_j / sigma_j with H the inverse square root
// of L^T (X^T X)^{-1} L, so that sqrt(n) Y_j is standard normal under the null.
inline DiscreteModel transform_to_discrete(const FourierCoeffs& coeffs, const DesignSpec& design,
                                           const SigmaSpec& sigma_spec) {
  design.validate();
  if (coeffs.n_units != design.n_units())
    fail(ErrorKind::DimensionMismatch, "transform_to_discrete: units mismatch");

  const Matrix a = sym_inverse(transpose(design.X) * design.X);
  const Matrix h = sym_inv_sqrt(transpose(design.L) * a * design.L);
  const Matrix t = h * transpose(design.L) * a * transpose(design.X);  // nu x N

  DiscreteModel model;
  model.p = coeffs.p;
  model.nu = design.nu();
  model.n = coeffs.n_rep;
  model.Y.assign(static_cast<std::size_t>(coeffs.p) * model.nu, 0.0);

  if (sigma_spec.is_known) {
    if (sigma_spec.sigma.size() != static_cast<std::size_t>(coeffs.p))
      fail(ErrorKind::LengthMismatch, "transform_to_discrete: sigma list vs p");
    for (double s : sigma_spec.sigma)
      if (!(s > 0.0))
        fail(ErrorKind::InvalidParameter, "transform_to_discrete: sigma must be positive");
    model.sigma_mode.estimated = false;
    model.sigma_mode.sigma = sigma_spec.sigma;
    model.sigma_mode.df2 = 0;
  } else {
    const SigmaEstimate est = estimate_sigma(coeffs, design.X);
    model.sigma_mode.estimated = true;
    model.sigma_mode.df2 = est.df2;
    model.sigma_mode.sigma.resize(coeffs.p);
    for (int jj = 0; jj < coeffs.p; ++jj) {
      if (!(est.sigma2[jj] > 0.0))
        fail(ErrorKind::InvalidParameter,
             "transform_to_discrete: estimated variance vanished at frequency " +
                 std::to_string(jj + 1));
      model.sigma_mode.sigma[jj] = std::sqrt(est.sigma2[jj]);
    }
  }

  for (int jj = 0; jj < coeffs.p; ++jj) {
    const std::vector<double> ybar = detail::mean_response(coeffs, jj);
    const std::vector<double> v = matvec(t, ybar);
    const double s = model.sigma_mode.sigma[jj];
    for (int c = 0; c < model.nu; ++c) model.y(jj, c) = v[c] / s;
  }
  return model;
}

// Per-frequency F statistics: (n |v_j|^2 / nu) / sigma2_j with v_j the
// whitened contrast estimate; distributed F(nu, n*N - P) under the null.
struct FPerFreq {
  std::vector<double> F;
  int nu = 1;
  long df2 = 0;
  std::vector<double> sigma2;
};

inline FPerFreq component_F(const FourierCoeffs& coeffs, const DesignSpec& design) {
  const DiscreteModel model = transform_to_discrete(coeffs, design, SigmaSpec::estimated());
  FPerFreq out;
  out.nu = model.nu;
  out.df2 = model.sigma_mode.df2;
  out.sigma2.resize(coeffs.p);
  out.F.resize(coeffs.p);
  for (int jj = 0; jj < coeffs.p; ++jj) {
    const double s = model.sigma_mode.sigma[jj];
    out.sigma2[jj] = s * s;
    out.F[jj] = static_cast<double>(model.n) * model.norm2_row(jj) / model.nu;
  }
  return out;
}

// Tapered combination of the per-frequency statistics.
inline double f_global(const std::vector<double>& f_stats, const std::vector<double>& weights) {
  if (f_stats.size() != weights.size())
    fail(ErrorKind::LengthMismatch, "f_global: " + std::to_string(f_stats.size()) +
                                        " statistics vs " + std::to_string(weights.size()) +
                                        " weights");
  if (f_stats.empty()) fail(ErrorKind::InvalidParameter, "f_global: empty input");
  double acc = 0.0;
  for (std::size_t j = 0; j < f_stats.size(); ++j) acc += weights[j] * f_stats[j];
  return acc;
}

// ---------------------------------------------------------------------------
// grouped designs and standard hypotheses

struct GroupLayout {
  std::vector<int> group_of;      // unit -> group, 0-based
  std::vector<double> covariate;  // one scalar covariate per unit
  int n_groups = 0;

  int n_units() const { return static_cast<int>(group_of.size()); }

  void validate() const {
    if (n_groups < 1) fail(ErrorKind::InvalidParameter, "GroupLayout: need n_groups >= 1");
    if (group_of.empty()) fail(ErrorKind::InvalidParameter, "GroupLayout: no units");
    if (covariate.size() != group_of.size())
      fail(ErrorKind::LengthMismatch, "GroupLayout: covariate list vs units");
    std::vector<int> count(n_groups, 0);
    for (int g : group_of) {
      if (g < 0 || g >= n_groups)
        fail(ErrorKind::InvalidParameter, "GroupLayout: group id out of range");
      ++count[g];
    }
    for (int g = 0; g < n_groups; ++g)
      if (count[g] == 0)
        fail(ErrorKind::EmptyGroup, "GroupLayout: group " + std::to_string(g + 1) + " has no units");
  }

  std::vector<int> group_sizes() const {
    std::vector<int> count(n_groups, 0);
    for (int g : group_of) ++count[g];
    return count;
  }

  double grand_mean_covariate() const {
    double acc = 0.0;
    for (double x : covariate) acc += x;
    return acc / static_cast<double>(covariate.size());
  }

  std::vector<double> group_mean_covariate() const {
    std::vector<double> mean(n_groups, 0.0);
    const std::vector<int> count = group_sizes();
    for (std::size_t k = 0; k < group_of.size(); ++k) mean[group_of[k]] += covariate[k];
    for (int g = 0; g < n_groups; ++g) mean[g] /= count[g];
    return mean;
  }
};

// Design with one intercept and one centered-covariate slope per group:
// row k = [ 1{g(k)=g} ..., 1{g(k)=g} (x_k - xbar) ... ].
inline Matrix make_group_design(const GroupLayout& layout) {
  layout.validate();
  const int n = layout.n_units();
  const int g_count = layout.n_groups;
  const double xbar = layout.grand_mean_covariate();
  Matrix x(n, 2 * g_count);
  for (int k = 0; k < n; ++k) {
    const int g = layout.group_of[k];
    x(k, g) = 1.0;
    x(k, g_count + g) = layout.covariate[k] - xbar;
  }
  return x;
}

enum class HypKind { same_slope, common_trend };

namespace detail {

// keep the earliest independent columns (modified Gram-Schmidt with a
// relative-residual drop rule)
inline Matrix keep_independent_columns(const std::vector<std::vector<double>>& cols,
                                       std::size_t dim) {
  std::vector<std::vector<double>> ortho;  // orthonormalized accepted columns
  std::vector<std::size_t> kept;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    std::vector<double> v = cols[c];
    double norm0 = 0.0;
    for (double x : v) norm0 += x * x;
    norm0 = std::sqrt(norm0);
    if (norm0 == 0.0) continue;
    for (const auto& q : ortho) {
      double dot = 0.0;
      for (std::size_t i = 0; i < dim; ++i) dot += v[i] * q[i];
      for (std::size_t i = 0; i < dim; ++i) v[i] -= dot * q[i];
    }
    double res = 0.0;
    for (double x : v) res += x * x;
    res = std::sqrt(res);
    if (res <= 1e-10 * norm0) continue;
    for (auto& x : v) x /= res;
    ortho.push_back(std::move(v));
    kept.push_back(c);
  }
  if (kept.empty())
    fail(ErrorKind::DegenerateHypothesis, "hypothesis columns span nothing");
  Matrix l(dim, kept.size());
  for (std::size_t c = 0; c < kept.size(); ++c)
    for (std::size_t i = 0; i < dim; ++i) l(i, c) = cols[kept[c]][i];
  return l;
}

}  // namespace detail

// Contrast matrix for pairwise group hypotheses over the grouped design
// parameters (G intercepts followed by G slopes). An empty pair list means
// all pairs in lexicographic order; dependent columns are dropped, keeping
// the earliest independent ones.
inline Matrix build_hypothesis(HypKind kind, std::vector<std::pair<int, int>> pairs,
                               const GroupLayout& layout) {
  layout.validate();
  const int g_count = layout.n_groups;
  if (pairs.empty()) {
    for (int g1 = 0; g1 < g_count; ++g1)
      for (int g2 = g1 + 1; g2 < g_count; ++g2) pairs.emplace_back(g1, g2);
  }
  if (pairs.empty())
    fail(ErrorKind::DegenerateHypothesis, "build_hypothesis: a single group admits no pairs");
  for (const auto& pr : pairs) {
    if (pr.first < 0 || pr.first >= g_count || pr.second < 0 || pr.second >= g_count)
      fail(ErrorKind::InvalidParameter, "build_hypothesis: group index out of range");
    if (pr.first == pr.second)
      fail(ErrorKind::InvalidParameter, "build_hypothesis: a pair must name two groups");
  }

  const std::size_t dim = 2 * static_cast<std::size_t>(g_count);
  const std::vector<int> sizes = layout.group_sizes();
  const std::vector<double> xg = layout.group_mean_covariate();
  const double xbar = layout.grand_mean_covariate();
  const double m_total = static_cast<double>(layout.n_units());

  std::vector<std::vector<double>> cols;
  cols.reserve(pairs.size());
  for (const auto& pr : pairs) {
    const int g1 = pr.first;
    const int g2 = pr.second;
    std::vector<double> c(dim, 0.0);
    if (kind == HypKind::same_slope) {
      c[g_count + g1] = 1.0;
      c[g_count + g2] = -1.0;
    } else {
      c[g1] = 1.0;
      c[g2] = -1.0;
      const double gap = xg[g1] - xg[g2];
      for (int h = 0; h < g_count; ++h) {
        double v = -(sizes[h] / m_total) * gap;
        if (h == g1) v += xg[g1] - xbar;
        if (h == g2) v -= xg[g2] - xbar;
        c[g_count + h] = v;
      }
    }
    cols.push_back(std::move(c));
  }
  return detail::keep_independent_columns(cols, dim);
}

}  // namespace fdatest
