#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gateforge/chain.hpp"

using namespace gateforge;

TEST_CASE("single ion sits at the origin with the bare trap frequency") {
  auto ms = normal_modes({.n_ions = 1});
  CHECK(ms.positions[0] == 0.0);
  CHECK(ms.frequencies[0] == 1.0);
  CHECK(ms.vectors(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("two ions: closed-form positions and frequencies") {
  auto ms = normal_modes({.n_ions = 2});
  const double x = std::cbrt(0.25);
  CHECK(ms.positions[0] == doctest::Approx(-x).epsilon(1e-12));
  CHECK(ms.positions[1] == doctest::Approx(x).epsilon(1e-12));
  CHECK(ms.frequencies[0] == 1.0);
  CHECK(ms.frequencies[1] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("three ions: closed-form positions and frequencies") {
  auto ms = normal_modes({.n_ions = 3});
  const double d = std::cbrt(1.25);
  CHECK(ms.positions[0] == doctest::Approx(-d).epsilon(1e-12));
  CHECK(std::abs(ms.positions[1]) < 1e-12);
  CHECK(ms.positions[2] == doctest::Approx(d).epsilon(1e-12));
  CHECK(ms.frequencies[1] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
  CHECK(ms.frequencies[2] == doctest::Approx(std::sqrt(29.0 / 5.0)).epsilon(1e-12));
}

TEST_CASE("mode matrix is orthonormal and signed canonically, positions antisymmetric") {
  for (int n : {2, 3, 4, 5, 7, 10}) {
    CAPTURE(n);
    auto ms = normal_modes({.n_ions = n});

    Eigen::MatrixXd gram = ms.vectors.transpose() * ms.vectors;
    CHECK((gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);

    for (int m = 0; m < n; ++m) {
      int j = 0;
      while (j < n && std::abs(ms.vectors(j, m)) <= 1e-8) ++j;
      REQUIRE(j < n);
      CHECK(ms.vectors(j, m) > 0.0);
    }

    for (int i = 0; i < n; ++i)
      CHECK(ms.positions[i] == doctest::Approx(-ms.positions[n - 1 - i]).epsilon(1e-10));
    for (int i = 0; i + 1 < n; ++i) CHECK(ms.positions[i] < ms.positions[i + 1]);

    for (int m = 1; m < n; ++m) CHECK(ms.frequencies[m] > ms.frequencies[m - 1]);
  }
}

TEST_CASE("center-of-mass column is uniform and couplings scale as 1/sqrt(frequency)") {
  auto ms = normal_modes({.n_ions = 4, .eta_com = 0.13});
  for (int j = 0; j < 4; ++j)
    CHECK(ms.vectors(j, 0) == doctest::Approx(0.5).epsilon(1e-12));
  for (int j = 0; j < 4; ++j)
    CHECK(ms.lamb_dicke(j, 0) == doctest::Approx(0.5 * 0.13).epsilon(1e-12));
  for (int m = 0; m < 4; ++m)
    for (int j = 0; j < 4; ++j)
      CHECK(ms.lamb_dicke(j, m) ==
            doctest::Approx(ms.vectors(j, m) * 0.13 / std::sqrt(ms.frequencies[m]))
                .epsilon(1e-12));
}

TEST_CASE("zero coupling strength decouples every mode") {
  auto ms = normal_modes({.n_ions = 3, .eta_com = 0.0});
  CHECK(ms.lamb_dicke.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("invalid configurations are rejected") {
  CHECK_THROWS_AS(normal_modes({.n_ions = 0}), std::invalid_argument);
  CHECK_THROWS_AS(normal_modes({.n_ions = -2}), std::invalid_argument);
  CHECK_THROWS_AS(normal_modes({.n_ions = 2, .eta_com = -0.1}), std::invalid_argument);
  CHECK_THROWS_AS(equilibrium_positions(0), std::invalid_argument);
}

TEST_CASE("equilibrium force residual is tiny for larger chains") {
  for (int n : {6, 12, 20}) {
    auto u = equilibrium_positions(n);
    for (int i = 0; i < n; ++i) {
      double f = u[i];
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        double d = u[i] - u[j];
        f -= (d > 0 ? 1.0 : -1.0) / (d * d);
      }
      CHECK(std::abs(f) < 1e-12);
    }
  }
}
