#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "error.hpp"

namespace fdatest {

inline constexpr double kTolLinalg = 1e-10;
inline constexpr double kTolDist = 1e-8;
inline constexpr int kBisectMaxIter = 200;
inline constexpr double kPi = 3.14159265358979323846;

struct PdfCdf {
  double pdf;
  double cdf;
};

inline PdfCdf std_normal(double x) {
  constexpr double inv_sqrt_2pi = 0.3989422804014326779;
  constexpr double inv_sqrt_2 = 0.7071067811865475244;
  PdfCdf out;
  out.pdf = inv_sqrt_2pi * std::exp(-0.5 * x * x);
  out.cdf = 0.5 * std::erfc(-x * inv_sqrt_2);
  return out;
}

namespace detail {

// Regularized lower incomplete gamma P(a,x) by series, for x < a + 1.
inline double gamma_p_series(double a, double x) {
  if (x <= 0.0) return 0.0;
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int i = 0; i < 1000; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a,x) by Lentz continued fraction, for x >= a + 1.
inline double gamma_q_contfrac(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 1000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double chisq_sf_central(double df, double x) {
  if (x <= 0.0) return 1.0;
  const double a = 0.5 * df;
  const double xx = 0.5 * x;
  if (x < df + 1.0) return 1.0 - gamma_p_series(a, xx);
  return gamma_q_contfrac(a, xx);
}

}  // namespace detail

// Survival function of (non)central chi-square; the noncentral case sums the
// Poisson mixture outward from its mode until 1e-12 of the weight remains.
inline double chisq_sf(double df, double noncentrality, double x) {
  if (!(df >= 1.0))
    fail(ErrorKind::InvalidParameter, "chisq_sf: df must be >= 1, got " + std::to_string(df));
  if (!(noncentrality >= 0.0))
    fail(ErrorKind::InvalidParameter,
         "chisq_sf: noncentrality must be >= 0, got " + std::to_string(noncentrality));
  if (x <= 0.0) return 1.0;
  if (noncentrality == 0.0) return detail::chisq_sf_central(df, x);

  const double lambda = 0.5 * noncentrality;
  const long mode = static_cast<long>(lambda);
  const double lw_mode = mode * std::log(lambda) - lambda - std::lgamma(mode + 1.0);
  const double w_mode = std::exp(lw_mode);

  double sum = w_mode * detail::chisq_sf_central(df + 2.0 * mode, x);
  double used = w_mode;

  double w_up = w_mode;
  double w_dn = w_mode;
  long k_up = mode;
  long k_dn = mode;
  while (used < 1.0 - 1e-12) {
    bool moved = false;
    if (w_up > 0.0) {
      w_up *= lambda / static_cast<double>(k_up + 1);
      ++k_up;
      if (w_up > 0.0) {
        sum += w_up * detail::chisq_sf_central(df + 2.0 * k_up, x);
        used += w_up;
        moved = true;
      }
    }
    if (k_dn > 0 && w_dn > 0.0) {
      w_dn *= static_cast<double>(k_dn) / lambda;
      --k_dn;
      sum += w_dn * detail::chisq_sf_central(df + 2.0 * k_dn, x);
      used += w_dn;
      moved = true;
    } else if (k_dn == 0) {
      w_dn = 0.0;
    }
    if (!moved) break;
  }
  return std::min(1.0, sum);
}

namespace detail {

// Continued fraction for the regularized incomplete beta (Lentz).
inline double betacf(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 1000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h;
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double betainc_reg(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    fail(ErrorKind::InvalidParameter, "betainc_reg: a and b must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double bt = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * detail::betacf(a, b, x) / a;
  return 1.0 - bt * detail::betacf(b, a, 1.0 - x) / b;
}

// Survival function of the F distribution with (d1, d2) degrees of freedom.
inline double f_sf(double d1, double d2, double x) {
  if (!(d1 > 0.0) || !(d2 > 0.0))
    fail(ErrorKind::InvalidParameter, "f_sf: degrees of freedom must be positive");
  if (x <= 0.0) return 1.0;
  return betainc_reg(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * x));
}

// Bisection: f continuous, f(lo) and f(hi) of opposite sign.
template <class F>
double bisect(F&& f, double lo, double hi, double tol) {
  if (!(lo < hi)) fail(ErrorKind::InvalidParameter, "bisect: need lo < hi");
  if (!(tol > 0.0)) fail(ErrorKind::InvalidParameter, "bisect: need tol > 0");
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    fail(ErrorKind::NoBracket, "bisect: f(lo) and f(hi) have the same sign");
  for (int it = 0; it < kBisectMaxIter; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    if (hi - lo <= tol) return 0.5 * (lo + hi);
  }
  fail(ErrorKind::NoConvergence, "bisect: interval still wider than tol after max iterations");
}

// Quantile of the central chi-square via bisection on the survival function.
inline double chisq_quantile(double df, double prob) {
  if (!(df >= 1.0)) fail(ErrorKind::InvalidParameter, "chisq_quantile: df must be >= 1");
  if (!(prob > 0.0 && prob < 1.0))
    fail(ErrorKind::InvalidParameter, "chisq_quantile: prob must lie in (0,1)");
  const double target = 1.0 - prob;  // sf at the quantile
  double hi = df + 10.0 * std::sqrt(2.0 * df) + 10.0;
  for (int i = 0; i < 200 && chisq_sf(df, 0.0, hi) > target; ++i) hi *= 2.0;
  auto g = [&](double x) { return chisq_sf(df, 0.0, x) - target; };
  return bisect(g, 0.0, hi, 1e-8);
}

}  // namespace fdatest
