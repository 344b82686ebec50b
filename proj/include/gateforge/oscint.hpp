#pragma once
// Closed-form integrals of complex tones and ordered tone pairs.
//
// Everything here is exact up to roundoff; there is no step size. The only
// numerical care is near-resonant denominators, handled by switching to a
// Gauss-Legendre evaluation (still machine accurate, the integrand phase is
// bounded in that branch) or a short series. Routines are templated on the
// real scalar so the same code path runs on doubles and on forward-mode
// dual numbers.

#include <array>
#include <cmath>
#include <complex>

namespace gateforge::oscint {

// minimal complex value over an arbitrary real scalar
template <class S> struct CVal {
  S re{}, im{};
};

template <class S> CVal<S> operator+(const CVal<S>& a, const CVal<S>& b) {
  return {a.re + b.re, a.im + b.im};
}
template <class S> CVal<S> operator-(const CVal<S>& a, const CVal<S>& b) {
  return {a.re - b.re, a.im - b.im};
}
template <class S> CVal<S> operator-(const CVal<S>& a) { return {-a.re, -a.im}; }
template <class S> CVal<S> operator*(const CVal<S>& a, const CVal<S>& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
template <class S, class T> CVal<S> operator*(const CVal<S>& a, const T& s) {
  return {a.re * s, a.im * s};
}
template <class S, class T> CVal<S> operator*(const T& s, const CVal<S>& a) {
  return {a.re * s, a.im * s};
}
template <class S> CVal<S> conj(const CVal<S>& a) { return {a.re, -a.im}; }
template <class S> CVal<S> i_times(const CVal<S>& a) { return {-a.im, a.re}; }
// z / (i v) for real v
template <class S> CVal<S> div_iv(const CVal<S>& z, const S& v) {
  return {z.im / v, -z.re / v};
}
template <class S> CVal<S> cexp(const S& x) {  // e^{ix}
  using std::cos, std::sin;
  return {cos(x), sin(x)};
}

inline std::complex<double> to_std(const CVal<double>& z) { return {z.re, z.im}; }

// sin(x)/x, stable through zero
template <class S> S sinc(const S& x) {
  using std::abs, std::sin;
  if (abs(x) < 1e-4) {
    S x2 = x * x;
    return 1.0 - x2 * (1.0 / 6.0) + x2 * x2 * (1.0 / 120.0);
  }
  return sin(x) / x;
}

// 32-point Gauss-Legendre rule on [-1, 1]; positive half, mirrored at use.
inline const std::array<std::pair<double, double>, 16>& gl32_half() {
  static const std::array<std::pair<double, double>, 16> table = [] {
    std::array<std::pair<double, double>, 16> t{};
    const int n = 32;
    for (int i = 0; i < 16; ++i) {
      double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 64; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      t[i] = {x, 2.0 / ((1.0 - x * x) * dp * dp)};
    }
    return t;
  }();
  return table;
}

// ramp(w, T) = integral_0^T e^{iws} ds
template <class S> CVal<S> ramp(const S& w, const S& T) {
  S h = w * T * 0.5;
  return cexp(h) * (T * sinc(h));
}

// tone(w; a, b) = integral_a^b e^{iwt} dt
template <class S> CVal<S> tone(const S& w, const S& a, const S& b) {
  S h = w * (b - a) * 0.5;
  return cexp(w * (a + b) * 0.5) * ((b - a) * sinc(h));
}

namespace detail {

// moment_q(u, T) = integral_0^T s^q e^{ius} ds by upward recurrence;
// valid only when |uT| comfortably exceeds q (callers guarantee |uT| > 32).
template <class S> CVal<S> moment_rec(int q, const S& u, const S& T) {
  CVal<S> m = ramp(u, T);
  CVal<S> e = cexp(u * T);
  S tp = T;  // T^k
  for (int k = 1; k <= q; ++k) {
    m = div_iv(e * tp - m * double(k), u);
    tp = tp * T;
  }
  return m;
}

}  // namespace detail

// ordered_tones(u, v; a, b) = integral over a <= t2 <= t1 <= b of
// e^{i u t1} e^{i v t2} dt2 dt1.
//
// Main branch uses (ramp(u+v) - ramp(u)) / (iv); when |v(b-a)| is small that
// difference cancels, so we switch to a 32-point Gauss rule (bounded phase)
// or, if the outer tone still oscillates hard, to a series in v.
template <class S> CVal<S> ordered_tones(const S& u, const S& v, const S& a, const S& b) {
  using std::abs;
  S T = b - a;
  CVal<S> pre = cexp((u + v) * a);
  if (abs(v * T) >= 0.5) {
    CVal<S> g = div_iv(ramp(u + v, T) - ramp(u, T), v);
    return pre * g;
  }
  if (abs(u * T) <= 32.0) {
    // inner integral in closed form: s e^{ivs/2} sinc(vs/2); outer by GL-32
    CVal<S> acc{};
    const auto& gl = gl32_half();
    for (const auto& [x, wgt] : gl) {
      for (double sgn : {1.0, -1.0}) {
        S s = T * (0.5 + 0.5 * sgn * x);
        S w = T * (0.5 * wgt);
        S hv = v * s * 0.5;
        acc = acc + cexp(u * s + hv) * (w * s * sinc(hv));
      }
    }
    return pre * acc;
  }
  // |vT| < 0.5, |uT| > 32: G = sum_p (iv)^p / (p+1)! moment_{p+1}(u, T)
  CVal<S> g{};
  CVal<S> ivp{S(1.0), S(0.0)};  // (iv)^p
  double fact = 1.0;            // (p+1)!
  for (int p = 0; p <= 14; ++p) {
    fact *= (p + 1);
    g = g + ivp * detail::moment_rec(p + 1, u, T) * (1.0 / fact);
    ivp = i_times(ivp * v);
  }
  return pre * g;
}

}  // namespace gateforge::oscint
