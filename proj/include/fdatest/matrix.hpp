#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "error.hpp"

namespace fdatest {

// Dense row-major matrix; sized for small design/contrast problems, not BLAS work.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    fail(ErrorKind::DimensionMismatch,
         "matrix product " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
             " * " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

inline Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

inline std::vector<double> matvec(const Matrix& a, const std::vector<double>& x) {
  if (a.cols() != x.size())
    fail(ErrorKind::DimensionMismatch, "matvec: " + std::to_string(a.cols()) +
                                           " columns vs vector of length " +
                                           std::to_string(x.size()));
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

struct EigenSym {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column k pairs with values[k]
};

namespace detail {

inline void require_square_symmetric(const Matrix& a, const char* who) {
  if (a.rows() != a.cols() || a.rows() == 0)
    fail(ErrorKind::DimensionMismatch,
         std::string(who) + ": need a nonempty square matrix, got " +
             std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  double scale = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) scale = std::max(scale, std::abs(a(i, j)));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (std::abs(a(i, j) - a(j, i)) > 1e-12 * std::max(1.0, scale))
        fail(ErrorKind::InvalidParameter,
             std::string(who) + ": matrix is not symmetric at (" + std::to_string(i) +
                 "," + std::to_string(j) + ")");
}

}  // namespace detail

// Cyclic Jacobi sweeps; adequate and robustly accurate for the small dimensions used here.
inline EigenSym eigen_sym(Matrix a) {
  detail::require_square_symmetric(a, "eigen_sym");
  const std::size_t n = a.rows();
  Matrix v = Matrix::identity(n);

  for (int sweep = 0; sweep < 128; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    double diag = 0.0;
    for (std::size_t p = 0; p < n; ++p) diag += a(p, p) * a(p, p);
    if (off <= 1e-30 * std::max(1e-300, diag) || off == 0.0) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (r != p && r != q) {
            const double arp = a(r, p);
            const double arq = a(r, q);
            a(r, p) = arp - s * (arq + tau * arp);
            a(p, r) = a(r, p);
            a(r, q) = arq + s * (arp - tau * arq);
            a(q, r) = a(r, q);
          }
          const double vrp = v(r, p);
          const double vrq = v(r, q);
          v(r, p) = vrp - s * (vrq + tau * vrp);
          v(r, q) = vrq + s * (vrp - tau * vrq);
        }
      }
    }
  }

  EigenSym out;
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.values[i] = a(i, i);

  // sort ascending, permuting eigenvector columns alongside
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (out.values[order[j]] < out.values[order[i]]) std::swap(order[i], order[j]);

  std::vector<double> sorted(n);
  Matrix vs(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    sorted[k] = out.values[order[k]];
    for (std::size_t r = 0; r < n; ++r) vs(r, k) = v(r, order[k]);
  }
  out.values = std::move(sorted);
  out.vectors = std::move(vs);
  return out;
}

namespace detail {

// V f(lambda) V^T for a spectral function f, with an SPD floor relative to lambda_max.
template <class F>
Matrix spectral_map_spd(const Matrix& a, const char* who, F&& f) {
  EigenSym eig = eigen_sym(a);
  const std::size_t n = a.rows();
  const double lam_max = eig.values.back();
  const double eps_spd = 1e-12 * lam_max;
  for (double lam : eig.values)
    if (!(lam > eps_spd))
      fail(ErrorKind::NotSPD, std::string(who) + ": eigenvalue " + std::to_string(lam) +
                                  " below SPD floor " + std::to_string(eps_spd));
  Matrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double fk = f(eig.values[k]);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = fk * eig.vectors(i, k);
      for (std::size_t j = 0; j <= i; ++j) {
        out(i, j) += w * eig.vectors(j, k);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) out(j, i) = out(i, j);
  return out;
}

}  // namespace detail

// Singular values of a rectangular matrix by one-sided Jacobi column
// orthogonalization: accurate at the sigma scale, unlike square-rooted
// eigenvalues of A^T A whose noise floor is sqrt(eps) * sigma_max.
inline std::vector<double> singular_values(Matrix a) {
  const std::size_t n = a.rows();
  const std::size_t p = a.cols();
  if (n == 0 || p == 0) fail(ErrorKind::DimensionMismatch, "singular_values: empty matrix");
  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (std::size_t i = 0; i + 1 < p; ++i)
      for (std::size_t j = i + 1; j < p; ++j) {
        double aa = 0.0, bb = 0.0, g = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          aa += a(r, i) * a(r, i);
          bb += a(r, j) * a(r, j);
          g += a(r, i) * a(r, j);
        }
        if (g == 0.0 || aa == 0.0 || bb == 0.0) continue;
        if (std::abs(g) <= 1e-15 * std::sqrt(aa) * std::sqrt(bb)) continue;
        const double zeta = (bb - aa) / (2.0 * g);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t r = 0; r < n; ++r) {
          const double vi = a(r, i);
          const double vj = a(r, j);
          a(r, i) = c * vi - s * vj;
          a(r, j) = s * vi + c * vj;
        }
        rotated = true;
      }
    if (!rotated) break;
  }
  std::vector<double> sigma(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    double acc = 0.0;
    for (std::size_t r = 0; r < n; ++r) acc += a(r, j) * a(r, j);
    sigma[j] = std::sqrt(acc);
  }
  std::sort(sigma.begin(), sigma.end());
  return sigma;
}

// B with B * A * B = I for symmetric positive definite A.
inline Matrix sym_inv_sqrt(const Matrix& a) {
  detail::require_square_symmetric(a, "sym_inv_sqrt");
  return detail::spectral_map_spd(a, "sym_inv_sqrt",
                                  [](double lam) { return 1.0 / std::sqrt(lam); });
}

inline Matrix sym_inverse(const Matrix& a) {
  detail::require_square_symmetric(a, "sym_inverse");
  return detail::spectral_map_spd(a, "sym_inverse", [](double lam) { return 1.0 / lam; });
}

}  // namespace fdatest
