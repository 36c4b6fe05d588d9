#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "error.hpp"
#include "numerics.hpp"

namespace fdatest {

// Uniform sampling grid t_l = a + (b-a) l / r for l = 1..r (left endpoint open).
struct Grid {
  double a = 0.0;
  double b = 1.0;
  int r = 2;

  double point(int l) const { return a + (b - a) * l / r; }  // l is 1-based

  void validate() const {
    if (!(b > a)) fail(ErrorKind::InvalidParameter, "Grid: need b > a");
    if (r < 2) fail(ErrorKind::InvalidParameter, "Grid: need at least 2 points");
  }
};

// Sampled curves, indexed [replicate][unit][grid point], all 0-based internally.
struct CurveSet {
  Grid grid;
  int n_rep = 1;
  int n_units = 1;
  std::vector<double> values;

  static CurveSet zeros(const Grid& g, int n_rep, int n_units) {
    g.validate();
    if (n_rep < 1 || n_units < 1)
      fail(ErrorKind::InvalidParameter, "CurveSet: need n_rep >= 1 and n_units >= 1");
    CurveSet c;
    c.grid = g;
    c.n_rep = n_rep;
    c.n_units = n_units;
    c.values.assign(static_cast<std::size_t>(n_rep) * n_units * g.r, 0.0);
    return c;
  }

  double& at(int i, int k, int l) {
    return values[(static_cast<std::size_t>(i) * n_units + k) * grid.r + l];
  }
  double at(int i, int k, int l) const {
    return values[(static_cast<std::size_t>(i) * n_units + k) * grid.r + l];
  }
};

// Basis coefficients, indexed [replicate][frequency][unit]; frequency index jj
// is 0-based and refers to basis function jj+1.
struct FourierCoeffs {
  int p = 1;
  int n_rep = 1;
  int n_units = 1;
  std::vector<double> c;

  static FourierCoeffs zeros(int p, int n_rep, int n_units) {
    FourierCoeffs f;
    f.p = p;
    f.n_rep = n_rep;
    f.n_units = n_units;
    f.c.assign(static_cast<std::size_t>(n_rep) * p * n_units, 0.0);
    return f;
  }

  double& at(int i, int jj, int k) {
    return c[(static_cast<std::size_t>(i) * p + jj) * n_units + k];
  }
  double at(int i, int jj, int k) const {
    return c[(static_cast<std::size_t>(i) * p + jj) * n_units + k];
  }
};

// Basis function j (1-based) sampled on the grid: the constant, then paired
// sine/cosine waves in the rescaled coordinate u = 2(t-a)/(b-a) - 1.
inline std::vector<double> basis_eval(int j, const Grid& g) {
  g.validate();
  if (j < 1) fail(ErrorKind::InvalidParameter, "basis_eval: frequency index must be >= 1");
  std::vector<double> out(g.r);
  if (j == 1) {
    for (auto& v : out) v = 1.0;
    return out;
  }
  const int m = j / 2;
  const bool is_sine = (j % 2 == 0);
  for (int l = 1; l <= g.r; ++l) {
    const double u = 2.0 * l / g.r - 1.0;
    const double arg = kPi * m * u;
    out[l - 1] = is_sine ? std::sin(arg) : std::cos(arg);
  }
  return out;
}

namespace detail {

inline std::vector<std::vector<double>> basis_table(int p, const Grid& g) {
  std::vector<std::vector<double>> table(p);
  for (int j = 1; j <= p; ++j) table[j - 1] = basis_eval(j, g);
  return table;
}

// reconstruction scale: 1 for the constant, 2 for every wave (grid mean of
// psi_j^2 is 1 for j = 1 and 1/2 otherwise)
inline double reconstruct_scale(int j) { return j == 1 ? 1.0 : 2.0; }

}  // namespace detail

// Grid-mean inner products with the first p basis functions, summed in
// ascending grid order so results are bit-reproducible.
inline FourierCoeffs decompose(const CurveSet& curves, int p) {
  curves.grid.validate();
  if (p < 1) fail(ErrorKind::InvalidParameter, "decompose: need p >= 1");
  if (p > curves.grid.r)
    fail(ErrorKind::ResolutionExceeded,
         "decompose: p = " + std::to_string(p) + " exceeds grid resolution r = " +
             std::to_string(curves.grid.r));
  const auto table = detail::basis_table(p, curves.grid);
  const int r = curves.grid.r;
  FourierCoeffs out = FourierCoeffs::zeros(p, curves.n_rep, curves.n_units);
  for (int i = 0; i < curves.n_rep; ++i)
    for (int k = 0; k < curves.n_units; ++k)
      for (int jj = 0; jj < p; ++jj) {
        const std::vector<double>& psi = table[jj];
        double acc = 0.0;
        for (int l = 0; l < r; ++l) acc += curves.at(i, k, l) * psi[l];
        out.at(i, jj, k) = acc / r;
      }
  return out;
}

// Inverse map back onto a grid: sum_j scale_j * c_j * psi_j(t_l).
inline CurveSet reconstruct(const FourierCoeffs& coeffs, const Grid& g) {
  g.validate();
  if (coeffs.p > g.r)
    fail(ErrorKind::ResolutionExceeded, "reconstruct: more frequencies than grid points");
  const auto table = detail::basis_table(coeffs.p, g);
  CurveSet out = CurveSet::zeros(g, coeffs.n_rep, coeffs.n_units);
  for (int i = 0; i < coeffs.n_rep; ++i)
    for (int k = 0; k < coeffs.n_units; ++k)
      for (int jj = 0; jj < coeffs.p; ++jj) {
        const double w = detail::reconstruct_scale(jj + 1) * coeffs.at(i, jj, k);
        const std::vector<double>& psi = table[jj];
        for (int l = 0; l < g.r; ++l) out.at(i, k, l) += w * psi[l];
      }
  return out;
}

}  // namespace fdatest
