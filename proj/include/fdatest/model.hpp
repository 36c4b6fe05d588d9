#pragma once

#include <string>
#include <vector>

#include "error.hpp"

namespace fdatest {

// How the per-frequency noise scale entered the reduction: supplied by the
// caller, or estimated from residuals with df2 denominator degrees of freedom.
struct SigmaMode {
  bool estimated = false;
  std::vector<double> sigma;  // per-frequency scale actually used
  long df2 = 0;               // residual degrees of freedom when estimated
};

// Reduced per-frequency summaries: for each frequency j = 1..p a nu-vector
// Y_j whose scaled square norm n*|Y_j|^2 is chi-square(nu) under the null.
struct DiscreteModel {
  int p = 0;
  int nu = 1;
  long n = 1;  // effective sample size multiplying |Y_j|^2
  std::vector<double> Y;  // row-major [frequency][component]
  SigmaMode sigma_mode;

  double y(int jj, int c) const { return Y[static_cast<std::size_t>(jj) * nu + c]; }
  double& y(int jj, int c) { return Y[static_cast<std::size_t>(jj) * nu + c]; }

  double norm2_row(int jj) const {
    double acc = 0.0;
    for (int c = 0; c < nu; ++c) {
      const double v = y(jj, c);
      acc += v * v;
    }
    return acc;
  }

  void validate() const {
    if (p < 1) fail(ErrorKind::InvalidParameter, "DiscreteModel: need p >= 1");
    if (nu < 1) fail(ErrorKind::InvalidParameter, "DiscreteModel: need nu >= 1");
    if (n < 1) fail(ErrorKind::InvalidParameter, "DiscreteModel: need n >= 1");
    if (Y.size() != static_cast<std::size_t>(p) * nu)
      fail(ErrorKind::LengthMismatch,
           "DiscreteModel: Y holds " + std::to_string(Y.size()) + " values for p*nu = " +
               std::to_string(static_cast<std::size_t>(p) * nu));
    if (!sigma_mode.sigma.empty() && sigma_mode.sigma.size() != static_cast<std::size_t>(p))
      fail(ErrorKind::LengthMismatch, "DiscreteModel: sigma list does not match p");
    for (double s : sigma_mode.sigma)
      if (!(s > 0.0))
        fail(ErrorKind::InvalidParameter, "DiscreteModel: sigma values must be positive");
  }
};

}  // namespace fdatest
