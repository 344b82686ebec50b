#pragma once
// Test-side oracle: adaptive Simpson quadrature for complex 1-D integrands
// and a panel-doubling composite Gauss-Legendre rule for ordered-pair
// (triangle) 2-D integrals. Deliberately independent of the closed forms
// under test; slow but trustworthy.

#include <cmath>
#include <complex>
#include <cstddef>

namespace gftest {

using Cx = std::complex<double>;

namespace detail {

template <class F>
Cx simpson_rec(const F& f, double a, double b, Cx fa, Cx fm, Cx fb, Cx whole, double tol,
               int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  Cx flm = f(lm), frm = f(rm);
  Cx left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  Cx right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  Cx delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// 16-point Gauss-Legendre nodes (positive half) and weights on [-1, 1]
inline constexpr double kGlX[8] = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
    0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499};
inline constexpr double kGlW[8] = {
    0.1894506104550686, 0.1826034150449236, 0.1691565193950026, 0.1495959888165768,
    0.1246289712555340, 0.0951585116824926, 0.0622535239386477, 0.0271524594117540};

// composite GL-16 with n equal panels
template <class F>
Cx gauss_panels(const F& f, double a, double b, int n) {
  Cx acc = 0.0;
  const double h = (b - a) / n;
  for (int p = 0; p < n; ++p) {
    const double c = a + (p + 0.5) * h, r = 0.5 * h;
    Cx s = 0.0;
    for (int i = 0; i < 8; ++i) s += kGlW[i] * (f(c - r * kGlX[i]) + f(c + r * kGlX[i]));
    acc += r * s;
  }
  return acc;
}

}  // namespace detail

// integral_a^b f(t) dt, absolute tolerance; pre-split into panels so
// oscillatory integrands cannot false-converge on symmetry
template <class F>
Cx integrate(const F& f, double a, double b, double tol = 1e-11, int panels = 16) {
  if (a == b) return {0.0, 0.0};
  Cx total = 0.0;
  double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    double x0 = a + p * h, x1 = a + (p + 1) * h, xm = 0.5 * (x0 + x1);
    Cx f0 = f(x0), fm = f(xm), f1 = f(x1);
    Cx whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
    total += detail::simpson_rec(f, x0, x1, f0, fm, f1, whole, tol / panels, 24);
  }
  return total;
}

// integral over a <= t2 <= t1 <= b of f(t1, t2), absolute tolerance.
// Composite GL-16 in both directions, panel count doubled until two
// successive refinements agree; smooth oscillatory integrands converge
// super-exponentially per panel, so agreement certifies the digits.
template <class F2>
Cx integrate_ordered(const F2& f, double a, double b, double tol = 1e-10, int n0 = 8) {
  if (b <= a) return {0.0, 0.0};
  auto eval = [&](int n) {
    auto inner = [&](double t1) {
      return detail::gauss_panels([&](double t2) { return f(t1, t2); }, a, t1, n);
    };
    return detail::gauss_panels(inner, a, b, n);
  };
  Cx prev = eval(n0);
  for (int n = 2 * n0; n <= 256; n *= 2) {
    Cx cur = eval(n);
    if (std::abs(cur - prev) <= tol) return cur;
    prev = cur;
  }
  return prev;
}

}  // namespace gftest
