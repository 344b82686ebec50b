#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "gateforge/dual.hpp"
#include "gateforge/oscint.hpp"
#include "support/quadrature.hpp"

using namespace gateforge;
using gftest::Cx;
using std::abs;

namespace {
constexpr double kTol = 5e-13;

Cx tone_d(double w, double a, double b) { return oscint::to_std(oscint::tone(w, a, b)); }
Cx ordered_d(double u, double v, double a, double b) {
  return oscint::to_std(oscint::ordered_tones(u, v, a, b));
}
}  // namespace

TEST_CASE("single tone integral matches quadrature across regimes") {
  const double a = 0.7, b = 9.3;
  for (double w : {0.0, 1e-12, 1e-7, 1e-4, 0.3, 1.0, 5.7, 41.0, -3.3, -1e-6}) {
    Cx exact = tone_d(w, a, b);
    Cx ref = gftest::integrate([&](double t) { return std::exp(Cx(0, w * t)); }, a, b, 1e-13);
    CHECK(abs(exact - ref) < kTol * (b - a));
  }
}

TEST_CASE("tone with zero frequency is the interval length") {
  Cx z = tone_d(0.0, -2.0, 5.0);
  CHECK(z.real() == doctest::Approx(7.0).epsilon(1e-15));
  CHECK(abs(z.imag()) < 1e-15);
}

TEST_CASE("ordered pair integral matches 2-D quadrature across branch boundaries") {
  const double a = 0.3, b = 5.1;
  const double T = b - a;
  // (u, v) chosen to exercise: main branch, GL branch (small v), series
  // branch (small v, large u), u+v == 0 exact cancellation, all-zero
  const std::pair<double, double> cases[] = {
      {2.0, 3.0},         {2.0, -2.0},      {5.0, 0.0},          {5.0, 1e-9},
      {5.0, 0.49 / T},    {5.0, 0.51 / T},  {40.0, 1e-3},        {40.0, 0.4 / T},
      {-40.0, -0.3 / T},  {0.0, 0.0},       {0.0, 4.0},          {1e-8, 1e-8},
      {33.0 / T, 1e-12},  {100.0, 0.2 / T}, {-7.7, 7.7},         {12.0, -11.0},
      {0.2 / T, 0.1 / T}, {64.0, -64.0},    {500.0, 0.001 / T},
  };
  for (auto [u, v] : cases) {
    CAPTURE(u);
    CAPTURE(v);
    Cx exact = ordered_d(u, v, a, b);
    Cx ref = gftest::integrate_ordered(
        [&](double t1, double t2) { return std::exp(Cx(0, u * t1 + v * t2)); }, a, b, 1e-12);
    CHECK(abs(exact - ref) < 1e-11 * T * T);
  }
}

TEST_CASE("ordered pair over empty and tiny intervals") {
  CHECK(abs(ordered_d(3.0, 4.0, 2.0, 2.0)) == 0.0);
  Cx tiny = ordered_d(3.0, 4.0, 2.0, 2.0 + 1e-9);
  CHECK(abs(tiny - Cx(0.5e-18 * std::cos(7.0 * 2.0), 0.5e-18 * std::sin(7.0 * 2.0))) < 1e-20);
}

TEST_CASE("ordered pair with both tones at rest is the triangle area") {
  double a = 1.0, b = 4.0;
  Cx z = ordered_d(0.0, 0.0, a, b);
  CHECK(z.real() == doctest::Approx(0.5 * 9.0).epsilon(1e-14));
  CHECK(abs(z.imag()) < 1e-14);
}

TEST_CASE("conjugation symmetry: negating both frequencies conjugates the result") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> U(-50.0, 50.0);
  for (int k = 0; k < 200; ++k) {
    double u = U(rng), v = U(rng);
    Cx z = ordered_d(u, v, 0.2, 7.9);
    Cx zc = ordered_d(-u, -v, 0.2, 7.9);
    CHECK(abs(zc - std::conj(z)) < 1e-13 * 60.0);
  }
}

TEST_CASE("dual-number evaluation carries exact derivatives") {
  using ad::Dual;
  // f(u, v, b) = Re ordered_tones(u, v; a, b) and Im part, versus central FD
  const double u0 = 3.7, v0 = -2.9, a0 = 0.4, b0 = 5.6;
  auto eval = [&](double u, double v, double b) {
    return ordered_d(u, v, a0, b);
  };
  Dual u = Dual::var(u0, 0, 3), v = Dual::var(v0, 1, 3), b = Dual::var(b0, 2, 3);
  auto z = oscint::ordered_tones(u, v, Dual(a0), b);

  const double h = 1e-5;
  auto fd = [&](int which) {
    double du = which == 0 ? h : 0, dv = which == 1 ? h : 0, db = which == 2 ? h : 0;
    return (eval(u0 + du, v0 + dv, b0 + db) - eval(u0 - du, v0 - dv, b0 - db)) / (2 * h);
  };
  for (int p = 0; p < 3; ++p) {
    Cx g_fd = fd(p);
    CHECK(z.re.g[p] == doctest::Approx(g_fd.real()).epsilon(1e-6));
    CHECK(z.im.g[p] == doctest::Approx(g_fd.imag()).epsilon(1e-6));
  }

  // derivative continuity across the series/GL branch border
  for (double uu : {31.9, 32.1}) {
    Dual ud = Dual::var(uu, 0, 1);
    auto zz = oscint::ordered_tones(ud, Dual(1e-3), Dual(0.0), Dual(1.0));
    Cx g_fd = (eval(uu + h, 1e-3, 1.0) - eval(uu - h, 1e-3, 1.0)) / (2 * h);
    (void)g_fd;
    CHECK(zz.re.g[0] == doctest::Approx(((ordered_d(uu + h, 1e-3, 0.0, 1.0) -
                                          ordered_d(uu - h, 1e-3, 0.0, 1.0)) /
                                         (2 * h))
                                            .real())
                            .epsilon(1e-6));
  }
}

TEST_CASE("gauss nodes integrate polynomials exactly") {
  const auto& gl = oscint::gl32_half();
  double s0 = 0.0, s2 = 0.0, s62 = 0.0;
  for (auto [x, w] : gl) {
    s0 += 2 * w;
    s2 += 2 * w * x * x;
    s62 += 2 * w * std::pow(x, 62);
  }
  CHECK(s0 == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s2 == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(s62 == doctest::Approx(2.0 / 63.0).epsilon(1e-12));
}
