#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <fdatest/fourier.hpp>
#include <fdatest/random.hpp>

using namespace fdatest;

namespace {

double grid_inner(const std::vector<double>& x, const std::vector<double>& y) {
  double acc = 0.0;
  for (std::size_t l = 0; l < x.size(); ++l) acc += x[l] * y[l];
  return acc / static_cast<double>(x.size());
}

}  // namespace

TEST_CASE("grid points", "[fourier]") {
  const Grid g{2.0, 4.0, 4};
  CHECK(g.point(1) == Catch::Approx(2.5).margin(1e-15));
  CHECK(g.point(4) == Catch::Approx(4.0).margin(1e-15));
  CHECK_THROWS_MATCHES((Grid{1.0, 1.0, 4}.validate()), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.kind() == ErrorKind::InvalidParameter;
                       }));
  CHECK_THROWS_MATCHES((Grid{0.0, 1.0, 1}.validate()), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.kind() == ErrorKind::InvalidParameter;
                       }));
}

TEST_CASE("basis function values", "[fourier]") {
  const Grid g{0.0, 1.0, 8};

  SECTION("first function is the constant 1") {
    for (double v : basis_eval(1, g)) CHECK(v == 1.0);
  }
  SECTION("waves reduce to exact grid phases") {
    // sine wave m on the rescaled coordinate: psi_{2m}(t_l) = (-1)^m sin(2 pi m l / r)
    for (int m : {1, 2, 3}) {
      const std::vector<double> psi = basis_eval(2 * m, g);
      for (int l = 1; l <= g.r; ++l) {
        const double expected = (m % 2 == 0 ? 1.0 : -1.0) * std::sin(2.0 * kPi * m * l / g.r);
        CHECK(psi[l - 1] == Catch::Approx(expected).margin(1e-12));
      }
      const std::vector<double> cosd = basis_eval(2 * m + 1, g);
      for (int l = 1; l <= g.r; ++l) {
        const double expected = (m % 2 == 0 ? 1.0 : -1.0) * std::cos(2.0 * kPi * m * l / g.r);
        CHECK(cosd[l - 1] == Catch::Approx(expected).margin(1e-12));
      }
    }
  }
  SECTION("the basis does not depend on the interval, only on l/r") {
    const Grid shifted{-3.0, 11.0, 8};
    for (int j : {1, 2, 3, 4, 5}) {
      const auto a = basis_eval(j, g);
      const auto b = basis_eval(j, shifted);
      for (int l = 0; l < g.r; ++l) CHECK(a[l] == b[l]);
    }
  }
  SECTION("frequency index must be positive") {
    CHECK_THROWS_MATCHES(basis_eval(0, g), Error, Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.kind() == ErrorKind::InvalidParameter;
                         }));
  }
}

TEST_CASE("grid orthogonality", "[fourier]") {
  const Grid g{0.0, 1.0, 64};
  const int p = 31;  // p <= r/2 keeps every wave below the grid Nyquist limit
  std::vector<std::vector<double>> psi(p);
  for (int j = 1; j <= p; ++j) psi[j - 1] = basis_eval(j, g);

  for (int j = 1; j <= p; ++j)
    for (int k = j; k <= p; ++k) {
      const double ip = grid_inner(psi[j - 1], psi[k - 1]);
      if (j != k) {
        CHECK(std::abs(ip) <= 1e-12);
      } else {
        CHECK(ip == Catch::Approx(j == 1 ? 1.0 : 0.5).margin(1e-12));
      }
    }
}

TEST_CASE("decompose recovers pure basis curves", "[fourier]") {
  const Grid g{0.0, 365.0, 64};
  const int p = 9;

  for (int j = 1; j <= p; ++j) {
    CurveSet curves = CurveSet::zeros(g, 1, 1);
    const std::vector<double> psi = basis_eval(j, g);
    for (int l = 0; l < g.r; ++l) curves.at(0, 0, l) = psi[l];
    const FourierCoeffs f = decompose(curves, p);
    for (int jj = 0; jj < p; ++jj) {
      const double expected = (jj + 1 == j) ? (j == 1 ? 1.0 : 0.5) : 0.0;
      CHECK(f.at(0, jj, 0) == Catch::Approx(expected).margin(1e-12));
    }
  }
}

TEST_CASE("decompose constant and linearity", "[fourier]") {
  const Grid g{0.0, 1.0, 32};
  CurveSet c = CurveSet::zeros(g, 1, 2);
  for (int l = 0; l < g.r; ++l) {
    c.at(0, 0, l) = 3.5;
    c.at(0, 1, l) = -2.0 * basis_eval(4, g)[l] + 3.5;
  }
  const FourierCoeffs f = decompose(c, 8);
  CHECK(f.at(0, 0, 0) == Catch::Approx(3.5).margin(1e-12));
  for (int jj = 1; jj < 8; ++jj) CHECK(std::abs(f.at(0, jj, 0)) <= 1e-12);
  CHECK(f.at(0, 0, 1) == Catch::Approx(3.5).margin(1e-12));
  CHECK(f.at(0, 3, 1) == Catch::Approx(-1.0).margin(1e-12));  // -2 * 1/2
}

TEST_CASE("reconstruct inverts decompose on band-limited curves", "[fourier]") {
  const Grid g{1.0, 3.0, 64};
  const int p = 31;
  Rng rng(RandomStream{20250819, 11});

  FourierCoeffs truth = FourierCoeffs::zeros(p, 2, 3);
  for (auto& v : truth.c) v = rng.next_gaussian();

  const CurveSet curves = reconstruct(truth, g);
  const FourierCoeffs back = decompose(curves, p);

  REQUIRE(back.c.size() == truth.c.size());
  for (std::size_t i = 0; i < truth.c.size(); ++i)
    CHECK(back.c[i] == Catch::Approx(truth.c[i]).margin(1e-12));

  // and the round trip the other way reproduces the sampled values
  const CurveSet again = reconstruct(back, g);
  for (std::size_t i = 0; i < curves.values.size(); ++i)
    CHECK(again.values[i] == Catch::Approx(curves.values[i]).margin(1e-12));
}

TEST_CASE("decompose validates the frequency budget", "[fourier]") {
  const Grid g{0.0, 1.0, 16};
  const CurveSet c = CurveSet::zeros(g, 1, 1);
  CHECK_THROWS_MATCHES(decompose(c, 17), Error, Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.kind() == ErrorKind::ResolutionExceeded;
                       }));
  CHECK_THROWS_MATCHES(decompose(c, 0), Error, Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.kind() == ErrorKind::InvalidParameter;
                       }));
  CHECK_NOTHROW(decompose(c, 16));
}

TEST_CASE("replicate and unit slots stay separate", "[fourier]") {
  const Grid g{0.0, 1.0, 16};
  CurveSet c = CurveSet::zeros(g, 2, 2);
  for (int l = 0; l < g.r; ++l) c.at(1, 0, l) = 7.0;  // constant in one slot only
  const FourierCoeffs f = decompose(c, 4);
  CHECK(f.at(1, 0, 0) == Catch::Approx(7.0).margin(1e-12));
  CHECK(f.at(0, 0, 0) == 0.0);
  CHECK(f.at(0, 0, 1) == 0.0);
  CHECK(f.at(1, 0, 1) == 0.0);
}
